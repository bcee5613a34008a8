#pragma once

#include "gsmpm/setup.hpp"
#include "gsmpm/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gsmpm {

struct Frame {
    int index = 0;
    double time = 0.0;
    std::vector<GaussianKernel> kernels;       // index-aligned with the source cloud
    std::vector<RawGaussianRecord> raw;        // storage-exact image of `kernels`
};

struct FrameEntry {
    int index;
    double time;
    std::string file;
};

struct SequenceManifest {
    int format_version = 1;
    int frame_count = 0;
    double frame_dt = 0.0;
    std::size_t kernel_count = 0;
    std::uint64_t config_fingerprint = 0;
    std::vector<FrameEntry> frames;
};

// Deformed kernels for every particle at the system's current time. Kernel
// fields are rounded through float32 so a frame holds exactly what its PLY
// will store; export/import is then lossless.
Frame snapshot(const ParticleSystem& system, const GaussianCloud& source, int index);

// One frame_%04d.ply per frame plus manifest.json, manifest written last
// (atomically via rename) so partial exports leave no manifest behind.
SequenceManifest export_sequence(const std::vector<Frame>& frames,
                                 const std::filesystem::path& directory, double frame_dt,
                                 std::uint64_t config_fingerprint);

SequenceManifest read_manifest(const std::filesystem::path& directory);

// Frames reconstructed in index order; counts are verified against the
// manifest. A fingerprint of 0 in the manifest suppresses the (non-fatal)
// fingerprint check.
std::vector<Frame> import_sequence(const std::filesystem::path& directory);

inline constexpr int kSequenceFormatVersion = 1;

std::string frame_file_name(int index);

}  // namespace gsmpm
