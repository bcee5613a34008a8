#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gsmpm {

// Malformed input files (PLY headers, truncated bodies, bad manifests).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Out-of-range parameters, violated type invariants, bad configs.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem failures, always carrying the offending path in the message.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Runtime failures of the simulation loop. `particle` and `step` are -1 when
// not applicable.
struct SimulationError : std::runtime_error {
    enum class Kind {
        CflViolation,
        InvertedElement,
        DomainEscape,
    };

    SimulationError(Kind k, const std::string& msg, std::int64_t particle_index = -1,
                    std::int64_t step_index = -1)
        : std::runtime_error(msg), kind(k), particle(particle_index), step(step_index) {}

    Kind kind;
    std::int64_t particle;
    std::int64_t step;
};

}  // namespace gsmpm
