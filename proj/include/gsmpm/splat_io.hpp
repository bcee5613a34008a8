#pragma once

#include "gsmpm/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace gsmpm {

// Degree-0 spherical harmonic basis constant, 1 / (2 sqrt(pi)).
inline constexpr double kShC0 = 0.28209479177387814;

// Applies the 3DGS ecosystem activations: sigmoid opacity, exp scales,
// normalized quaternion, color = clamp(0.5 + C0 * f_dc, 0, 1).
// Throws ValidationError for non-finite fields or a zero-norm quaternion.
GaussianKernel activate_record(const RawGaussianRecord& raw);

// Inverse activations (logit, log, (c - 0.5) / C0). Opacity is clamped to
// [1e-6, 1 - 1e-6] before the logit. Throws ValidationError for non-finite
// kernel fields.
RawGaussianRecord deactivate_kernel(const GaussianKernel& kernel);

// Parses a binary little-endian 3DGS PLY. Required float32 vertex properties:
// x y z f_dc_0..2 opacity scale_0..2 rot_0..3; extra fixed-size properties are
// skipped with correct stride. Raw records are retained on the returned cloud.
GaussianCloud parse_gaussian_ply(std::span<const std::uint8_t> bytes);

// Writes the canonical binary little-endian layout (required properties only,
// in canonical order). Uses retained raw records verbatim when the cloud has
// them, otherwise applies inverse activations.
std::vector<std::uint8_t> write_gaussian_ply(const GaussianCloud& cloud);

GaussianCloud load_gaussian_ply(const std::string& path);
void save_gaussian_ply(const std::string& path, const GaussianCloud& cloud);

}  // namespace gsmpm
