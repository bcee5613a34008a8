#include "gsmpm/sequence.hpp"

#include "gsmpm/deform.hpp"
#include "gsmpm/errors.hpp"
#include "gsmpm/splat_io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>

namespace gsmpm {

using nlohmann::json;

std::string frame_file_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%04d.ply", index);
    return buf;
}

Frame snapshot(const ParticleSystem& system, const GaussianCloud& source, int index) {
    if (system.size() != source.count()) {
        throw ValidationError("snapshot: particle system and source cloud are not index-aligned (" +
                              std::to_string(system.size()) + " vs " +
                              std::to_string(source.count()) + ")");
    }
    Frame frame;
    frame.index = index;
    frame.time = system.time;
    frame.kernels.resize(source.count());
    frame.raw.resize(source.count());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t p = 0; p < static_cast<std::int64_t>(source.count()); ++p) {
        const GaussianKernel deformed =
            deform_kernel(source.kernels[p], system.x[p], system.F[p], system.transform);
        // Round through the on-disk float32 representation so the frame holds
        // exactly what its PLY stores; export/import is then lossless.
        frame.raw[p] = deactivate_kernel(deformed);
        frame.kernels[p] = activate_record(frame.raw[p]);
    }
    return frame;
}

namespace {

double quantize_time(double t) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", t);
    return std::strtod(buf, nullptr);
}

json manifest_to_json(const SequenceManifest& m) {
    json frames = json::array();
    for (const FrameEntry& f : m.frames) {
        frames.push_back({{"index", f.index}, {"time", quantize_time(f.time)}, {"file", f.file}});
    }
    return json{{"format_version", m.format_version},
                {"frame_count", m.frame_count},
                {"frame_dt", m.frame_dt},
                {"kernel_count", m.kernel_count},
                {"config_fingerprint", m.config_fingerprint},
                {"frames", frames}};
}

}  // namespace

SequenceManifest export_sequence(const std::vector<Frame>& frames,
                                 const std::filesystem::path& directory, double frame_dt,
                                 std::uint64_t config_fingerprint) {
    if (frames.empty()) throw ValidationError("export_sequence: no frames to export");
    const std::size_t kernel_count = frames.front().kernels.size();
    for (const Frame& f : frames) {
        if (f.kernels.size() != kernel_count) {
            throw ValidationError("export_sequence: kernel count varies across frames");
        }
    }
    for (std::size_t i = 1; i < frames.size(); ++i) {
        if (!(frames[i].time > frames[i - 1].time)) {
            throw ValidationError("export_sequence: frame times must be strictly increasing");
        }
    }

    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec && !std::filesystem::is_directory(directory)) {
        throw IoError("cannot create directory " + directory.string() + ": " + ec.message());
    }

    SequenceManifest manifest;
    manifest.format_version = kSequenceFormatVersion;
    manifest.frame_count = static_cast<int>(frames.size());
    manifest.frame_dt = frame_dt;
    manifest.kernel_count = kernel_count;
    manifest.config_fingerprint = config_fingerprint;

    for (const Frame& f : frames) {
        const std::string name = frame_file_name(f.index);
        GaussianCloud cloud;
        cloud.kernels = f.kernels;
        cloud.raw = f.raw;
        save_gaussian_ply((directory / name).string(), cloud);
        manifest.frames.push_back({f.index, f.time, name});
    }

    // Manifest last, via rename, so a partial export never looks complete.
    const std::filesystem::path tmp = directory / "manifest.json.tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << manifest_to_json(manifest).dump(2) << "\n";
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, directory / "manifest.json", ec);
    if (ec) throw IoError("cannot finalize manifest in " + directory.string() + ": " + ec.message());
    return manifest;
}

SequenceManifest read_manifest(const std::filesystem::path& directory) {
    const std::filesystem::path path = directory / "manifest.json";
    std::ifstream in(path);
    if (!in) throw IoError("missing manifest: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("malformed manifest " + path.string() + ": " + e.what());
    }

    SequenceManifest m;
    try {
        m.format_version = j.at("format_version").get<int>();
        if (m.format_version != kSequenceFormatVersion) {
            throw ParseError("unsupported sequence format_version " +
                             std::to_string(m.format_version) + " (expected " +
                             std::to_string(kSequenceFormatVersion) + ")");
        }
        m.frame_count = j.at("frame_count").get<int>();
        m.frame_dt = j.at("frame_dt").get<double>();
        m.kernel_count = j.at("kernel_count").get<std::size_t>();
        m.config_fingerprint = j.at("config_fingerprint").get<std::uint64_t>();
        for (const json& f : j.at("frames")) {
            m.frames.push_back({f.at("index").get<int>(), f.at("time").get<double>(),
                                f.at("file").get<std::string>()});
        }
    } catch (const json::exception& e) {
        throw ParseError("manifest " + path.string() + " is missing fields: " + e.what());
    }
    if (static_cast<int>(m.frames.size()) != m.frame_count) {
        throw ParseError("manifest frame_count (" + std::to_string(m.frame_count) +
                         ") does not match frames array size (" + std::to_string(m.frames.size()) +
                         ")");
    }
    return m;
}

std::vector<Frame> import_sequence(const std::filesystem::path& directory) {
    const SequenceManifest manifest = read_manifest(directory);

    std::vector<Frame> frames;
    frames.reserve(manifest.frames.size());
    double prev_time = -std::numeric_limits<double>::infinity();
    for (const FrameEntry& entry : manifest.frames) {
        const std::filesystem::path file = directory / entry.file;
        if (!std::filesystem::exists(file)) {
            throw IoError("missing frame file " + entry.file + " in " + directory.string());
        }
        GaussianCloud cloud = load_gaussian_ply(file.string());
        if (cloud.count() != manifest.kernel_count) {
            throw ParseError("frame " + entry.file + " has " + std::to_string(cloud.count()) +
                             " kernels, manifest declares " +
                             std::to_string(manifest.kernel_count));
        }
        if (!(entry.time > prev_time)) {
            throw ParseError("frame times are not strictly increasing at " + entry.file);
        }
        prev_time = entry.time;
        Frame frame;
        frame.index = entry.index;
        frame.time = entry.time;
        frame.kernels = std::move(cloud.kernels);
        frame.raw = std::move(cloud.raw);
        frames.push_back(std::move(frame));
    }
    return frames;
}

}  // namespace gsmpm
