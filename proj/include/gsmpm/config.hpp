#pragma once

#include "gsmpm/forces.hpp"
#include "gsmpm/grid.hpp"
#include "gsmpm/setup.hpp"
#include "gsmpm/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace gsmpm {

struct SimulationConfig {
    std::filesystem::path input_ply;
    std::filesystem::path output_dir;
    int frames = 14;
    double frame_dt = 1.0 / 24.0;
    GridConfig grid;
    MaterialParams material;
    Vec3 gravity = Vec3::Zero();
    double dt_max = 2.0e-4;
    ForceSchedule forces;
    bool deterministic = true;
    std::uint64_t seed = 0;  // reserved; the simulation is deterministic and ignores it

    // Parses the JSON config. Unknown keys anywhere are rejected; numeric
    // ranges are validated per module (errors name the offending field path).
    static SimulationConfig from_json_text(const std::string& text);
    static SimulationConfig from_file(const std::filesystem::path& path);

    std::string to_canonical_json() const;

    // FNV-1a over the canonical JSON; stored in sequence manifests.
    std::uint64_t fingerprint() const;

    void validate() const;
};

// Worker-thread cap from GSPLATMPM_THREADS (0 or unset = all hardware threads).
int worker_threads();
void apply_thread_cap();

}  // namespace gsmpm
