#include "gsmpm/splat_io.hpp"

#include "gsmpm/errors.hpp"
#include "gsmpm/math3d.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

namespace gsmpm {

static_assert(std::endian::native == std::endian::little,
              "binary PLY I/O assumes a little-endian host");

namespace {

constexpr int kPropertyCount = 14;
constexpr const char* kPropertyNames[kPropertyCount] = {
    "x",       "y",       "z",       "f_dc_0",  "f_dc_1",  "f_dc_2",  "opacity",
    "scale_0", "scale_1", "scale_2", "rot_0",   "rot_1",   "rot_2",   "rot_3",
};

std::size_t scalar_type_size(std::string_view type) {
    if (type == "char" || type == "int8" || type == "uchar" || type == "uint8") return 1;
    if (type == "short" || type == "int16" || type == "ushort" || type == "uint16") return 2;
    if (type == "int" || type == "int32" || type == "uint" || type == "uint32") return 4;
    if (type == "float" || type == "float32") return 4;
    if (type == "double" || type == "float64") return 8;
    return 0;
}

bool is_float32(std::string_view type) { return type == "float" || type == "float32"; }

struct VertexLayout {
    std::size_t count = 0;
    std::size_t stride = 0;
    std::size_t offsets[kPropertyCount];  // byte offsets of the required properties
    bool seen[kPropertyCount] = {};
};

float read_f32(const std::uint8_t* p) {
    float v;
    std::memcpy(&v, p, sizeof v);
    return v;
}

void append_f32(std::vector<std::uint8_t>& out, float v) {
    std::uint8_t buf[sizeof v];
    std::memcpy(buf, &v, sizeof v);
    out.insert(out.end(), buf, buf + sizeof v);
}

[[noreturn]] void header_error(std::size_t line_no, const std::string& line, const std::string& what) {
    throw ParseError("PLY header line " + std::to_string(line_no) + " (\"" + line + "\"): " + what);
}

}  // namespace

GaussianKernel activate_record(const RawGaussianRecord& raw) {
    for (float v : raw.position)
        if (!std::isfinite(v)) throw ValidationError("raw record has non-finite position");
    for (float v : raw.f_dc)
        if (!std::isfinite(v)) throw ValidationError("raw record has non-finite f_dc");
    for (float v : raw.log_scales)
        if (!std::isfinite(v)) throw ValidationError("raw record has non-finite log_scales");
    for (float v : raw.rotation_q)
        if (!std::isfinite(v)) throw ValidationError("raw record has non-finite rotation");
    if (!std::isfinite(raw.opacity_logit)) throw ValidationError("raw record has non-finite opacity");

    GaussianKernel k;
    k.position = Vec3(raw.position[0], raw.position[1], raw.position[2]);
    k.opacity = 1.0 / (1.0 + std::exp(-static_cast<double>(raw.opacity_logit)));
    for (int i = 0; i < 3; ++i) {
        k.scales(i) = std::exp(static_cast<double>(raw.log_scales[i]));
        if (!(std::isfinite(k.scales(i)) && k.scales(i) > 0.0)) {
            throw ValidationError("activated scale overflows or underflows (log_scale = " +
                                  std::to_string(raw.log_scales[i]) + ")");
        }
        k.color(i) = std::clamp(0.5 + kShC0 * static_cast<double>(raw.f_dc[i]), 0.0, 1.0);
    }
    k.rotation = Quaternion{raw.rotation_q[0], raw.rotation_q[1], raw.rotation_q[2],
                            raw.rotation_q[3]}
                     .normalized();
    return k;
}

RawGaussianRecord deactivate_kernel(const GaussianKernel& kernel) {
    if (!kernel.position.allFinite() || !kernel.scales.allFinite() || !kernel.color.allFinite() ||
        !std::isfinite(kernel.opacity) || !std::isfinite(kernel.rotation.norm())) {
        throw ValidationError("refusing to write kernel with non-finite fields");
    }
    if (!(kernel.scales.minCoeff() > 0.0)) {
        throw ValidationError("refusing to write kernel with non-positive scales");
    }

    RawGaussianRecord raw;
    for (int i = 0; i < 3; ++i) {
        raw.position[i] = static_cast<float>(kernel.position(i));
        raw.log_scales[i] = static_cast<float>(std::log(kernel.scales(i)));
        raw.f_dc[i] = static_cast<float>((kernel.color(i) - 0.5) / kShC0);
    }
    const double a = std::clamp(kernel.opacity, 1e-6, 1.0 - 1e-6);
    raw.opacity_logit = static_cast<float>(std::log(a / (1.0 - a)));
    raw.rotation_q[0] = static_cast<float>(kernel.rotation.w);
    raw.rotation_q[1] = static_cast<float>(kernel.rotation.x);
    raw.rotation_q[2] = static_cast<float>(kernel.rotation.y);
    raw.rotation_q[3] = static_cast<float>(kernel.rotation.z);
    return raw;
}

GaussianCloud parse_gaussian_ply(std::span<const std::uint8_t> bytes) {
    // Header is newline-delimited ASCII up to and including "end_header\n".
    const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());

    VertexLayout layout;
    std::string current_element;
    bool format_seen = false;
    bool header_done = false;
    std::size_t pos = 0;
    std::size_t line_no = 0;

    while (pos < text.size()) {
        const std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) break;
        std::string line(text.substr(pos, eol - pos));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = eol + 1;
        ++line_no;

        if (line_no == 1) {
            if (line != "ply") header_error(line_no, line, "expected magic \"ply\"");
            continue;
        }

        std::istringstream ss(line);
        std::string word;
        ss >> word;
        if (word == "comment" || word == "obj_info") continue;
        if (word == "format") {
            std::string fmt, version;
            ss >> fmt >> version;
            if (fmt != "binary_little_endian" || version != "1.0") {
                header_error(line_no, line, "only \"format binary_little_endian 1.0\" is supported");
            }
            format_seen = true;
            continue;
        }
        if (word == "element") {
            std::string name;
            std::size_t count = 0;
            if (!(ss >> name >> count) && name.empty()) {
                header_error(line_no, line, "malformed element declaration");
            }
            if (name == "vertex") {
                layout.count = count;
            } else if (count != 0) {
                header_error(line_no, line, "unsupported element \"" + name + "\" with nonzero count");
            }
            current_element = name;
            continue;
        }
        if (word == "property") {
            std::string type;
            ss >> type;
            if (type == "list") {
                if (current_element == "vertex") {
                    header_error(line_no, line, "list properties are not supported on vertex");
                }
                continue;
            }
            std::string name;
            ss >> name;
            if (current_element != "vertex") continue;
            const std::size_t size = scalar_type_size(type);
            if (size == 0) header_error(line_no, line, "unknown property type \"" + type + "\"");
            for (int i = 0; i < kPropertyCount; ++i) {
                if (name == kPropertyNames[i]) {
                    if (!is_float32(type)) {
                        header_error(line_no, line,
                                     "required property \"" + name + "\" must be float");
                    }
                    layout.offsets[i] = layout.stride;
                    layout.seen[i] = true;
                    break;
                }
            }
            layout.stride += size;
            continue;
        }
        if (word == "end_header") {
            header_done = true;
            break;
        }
        header_error(line_no, line, "unrecognized header keyword");
    }

    if (!header_done) throw ParseError("PLY header: missing end_header");
    if (!format_seen) throw ParseError("PLY header: missing format declaration");

    std::string missing;
    for (int i = 0; i < kPropertyCount; ++i) {
        if (!layout.seen[i]) missing += std::string(missing.empty() ? "" : ", ") + kPropertyNames[i];
    }
    if (!missing.empty()) {
        throw ParseError("PLY header: missing required vertex properties: " + missing);
    }

    const std::size_t body_size = bytes.size() - pos;
    const std::size_t expected = layout.count * layout.stride;
    if (body_size < expected) {
        throw ParseError("PLY body truncated: header declares " + std::to_string(layout.count) +
                         " vertices (" + std::to_string(expected) + " bytes), body has " +
                         std::to_string(body_size) + " bytes");
    }
    if (body_size > expected) {
        throw ParseError("PLY body has " + std::to_string(body_size - expected) +
                         " trailing bytes after the declared vertex data");
    }

    GaussianCloud cloud;
    cloud.kernels.reserve(layout.count);
    cloud.raw.reserve(layout.count);
    const std::uint8_t* body = bytes.data() + pos;
    for (std::size_t r = 0; r < layout.count; ++r) {
        const std::uint8_t* rec = body + r * layout.stride;
        RawGaussianRecord raw;
        float* fields[kPropertyCount] = {
            &raw.position[0],   &raw.position[1],   &raw.position[2],  &raw.f_dc[0],
            &raw.f_dc[1],       &raw.f_dc[2],       &raw.opacity_logit, &raw.log_scales[0],
            &raw.log_scales[1], &raw.log_scales[2], &raw.rotation_q[0], &raw.rotation_q[1],
            &raw.rotation_q[2], &raw.rotation_q[3],
        };
        for (int i = 0; i < kPropertyCount; ++i) *fields[i] = read_f32(rec + layout.offsets[i]);
        try {
            cloud.kernels.push_back(activate_record(raw));
        } catch (const ValidationError& e) {
            throw ParseError("PLY vertex " + std::to_string(r) + ": " + e.what());
        }
        cloud.raw.push_back(raw);
    }
    return cloud;
}

std::vector<std::uint8_t> write_gaussian_ply(const GaussianCloud& cloud) {
    const bool use_raw = cloud.raw.size() == cloud.kernels.size() && !cloud.raw.empty();

    std::string header = "ply\nformat binary_little_endian 1.0\nelement vertex " +
                         std::to_string(cloud.count()) + "\n";
    for (const char* name : kPropertyNames) {
        header += "property float " + std::string(name) + "\n";
    }
    header += "end_header\n";

    std::vector<std::uint8_t> out;
    out.reserve(header.size() + cloud.count() * kPropertyCount * 4);
    out.insert(out.end(), header.begin(), header.end());

    for (std::size_t i = 0; i < cloud.count(); ++i) {
        const RawGaussianRecord raw = use_raw ? cloud.raw[i] : deactivate_kernel(cloud.kernels[i]);
        for (float v : raw.position) append_f32(out, v);
        for (float v : raw.f_dc) append_f32(out, v);
        append_f32(out, raw.opacity_logit);
        for (float v : raw.log_scales) append_f32(out, v);
        for (float v : raw.rotation_q) append_f32(out, v);
    }
    return out;
}

GaussianCloud load_gaussian_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return parse_gaussian_ply(bytes);
}

void save_gaussian_ply(const std::string& path, const GaussianCloud& cloud) {
    const std::vector<std::uint8_t> bytes = write_gaussian_ply(cloud);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path);
}

Mat3 GaussianKernel::covariance() const {
    const Mat3 r = quaternion_to_matrix(rotation);
    const Mat3 rs = r * scales.asDiagonal();
    return rs * rs.transpose();
}

}  // namespace gsmpm
