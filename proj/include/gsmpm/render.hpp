#pragma once

#include "gsmpm/sequence.hpp"
#include "gsmpm/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace gsmpm {

struct Camera {
    Vec3 position = Vec3(0.0, 0.0, -2.0);
    Vec3 look_at = Vec3::Zero();
    Vec3 up = Vec3(0.0, 1.0, 0.0);
    double vertical_fov = 60.0 * 3.14159265358979323846 / 180.0;  // radians
    int width = 512;
    int height = 512;
    double near = 0.1;

    void validate() const;
};

// Screen-space Gaussian. cov2d is symmetric [[a, b], [b, c]] in pixel^2 with
// the +0.3 px^2 diagonal floor already applied.
struct Splat2D {
    double center[2];
    double cov2d[3];  // a, b, c
    double depth;     // view-space z, > near
    Vec3 color;
    double opacity;
    std::uint32_t kernel_index;
};

// EWA local-affine projection; nullopt when the kernel is culled (at or
// behind the near plane).
std::optional<Splat2D> project_gaussian(const GaussianKernel& kernel, const Camera& camera,
                                        std::uint32_t kernel_index = 0);

struct PixelSample {
    Vec3 rgb = Vec3::Zero();
    double alpha = 0.0;  // 1 - final transmittance
};

// Front-to-back alpha compositing over depth-sorted splats, early exit once
// transmittance drops below 1e-4. Background is transparent black.
PixelSample composite_pixel(std::span<const Splat2D> sorted_splats, double px, double py);

// Spec-shaped convenience: just the RGB of composite_pixel.
Vec3 composite(std::span<const Splat2D> sorted_splats, double px, double py);

struct ImageRgba8 {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major RGBA

    std::uint8_t* at(int x, int y) { return &pixels[(static_cast<std::size_t>(y) * width + x) * 4]; }
    const std::uint8_t* at(int x, int y) const {
        return &pixels[(static_cast<std::size_t>(y) * width + x) * 4];
    }
};

ImageRgba8 render_kernels(std::span<const GaussianKernel> kernels, const Camera& camera);
ImageRgba8 render_frame(const Frame& frame, const Camera& camera);

struct CameraPath {
    double turntable_deg_per_frame = 0.0;  // 0 = fixed camera
};

// Camera for frame `index` on the path: azimuth rotated about the up axis
// through look_at by index * step.
Camera camera_for_frame(const Camera& base, const CameraPath& path, int index);

// Imports the sequence in `sequence_dir` and writes frame_%04d.png next to it
// (or into out_dir when given). Returns the PNG paths.
std::vector<std::filesystem::path> render_sequence(const std::filesystem::path& sequence_dir,
                                                   const Camera& base, const CameraPath& path,
                                                   const std::filesystem::path& out_dir = {});

}  // namespace gsmpm
