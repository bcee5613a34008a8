#include "gsmpm/render.hpp"

#include "gsmpm/errors.hpp"
#include "gsmpm/image.hpp"
#include "gsmpm/math3d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace gsmpm {

namespace {

constexpr double kEarlyExitTransmittance = 1e-4;
constexpr double kCovarianceFloor = 0.3;  // px^2 screen-space dilation
// Splats are rasterized out to the radius where a unit-opacity Gaussian
// falls below this contribution.
constexpr double kMinContribution = 1e-5;
constexpr int kTileSize = 16;

struct ViewBasis {
    Mat3 world_to_cam;  // rows: right, down, forward
    Vec3 origin;
    double fx, fy, cx, cy;
};

ViewBasis make_view(const Camera& cam) {
    const Vec3 forward = (cam.look_at - cam.position).normalized();
    const Vec3 right = forward.cross(cam.up).normalized();
    const Vec3 down = forward.cross(right);

    ViewBasis vb;
    vb.world_to_cam.row(0) = right;
    vb.world_to_cam.row(1) = down;
    vb.world_to_cam.row(2) = forward;
    vb.origin = cam.position;
    vb.fy = (cam.height / 2.0) / std::tan(cam.vertical_fov / 2.0);
    vb.fx = vb.fy;
    vb.cx = cam.width / 2.0;
    vb.cy = cam.height / 2.0;
    return vb;
}

}  // namespace

void Camera::validate() const {
    if ((look_at - position).squaredNorm() == 0.0) {
        throw ValidationError("camera position and look_at coincide");
    }
    if ((look_at - position).normalized().cross(up).squaredNorm() < 1e-16) {
        throw ValidationError("camera up vector is parallel to the view direction");
    }
    if (!(vertical_fov > 0.0 && vertical_fov < 3.14159265358979323846)) {
        throw ValidationError("camera fov must lie in (0, pi)");
    }
    if (width <= 0 || height <= 0) throw ValidationError("image size must be positive");
    if (!(near > 0.0)) throw ValidationError("camera near plane must be > 0");
}

std::optional<Splat2D> project_gaussian(const GaussianKernel& kernel, const Camera& camera,
                                        std::uint32_t kernel_index) {
    const ViewBasis vb = make_view(camera);
    const Vec3 t = vb.world_to_cam * (kernel.position - vb.origin);
    if (!(t.z() > camera.near)) return std::nullopt;

    const double inv_z = 1.0 / t.z();
    Splat2D s;
    s.center[0] = vb.fx * t.x() * inv_z + vb.cx;
    s.center[1] = vb.fy * t.y() * inv_z + vb.cy;
    s.depth = t.z();
    s.color = kernel.color;
    s.opacity = kernel.opacity;
    s.kernel_index = kernel_index;

    // Local affine (Jacobian) approximation of the perspective map at the mean.
    Eigen::Matrix<double, 2, 3> jac;
    jac << vb.fx * inv_z, 0.0, -vb.fx * t.x() * inv_z * inv_z,
           0.0, vb.fy * inv_z, -vb.fy * t.y() * inv_z * inv_z;
    const Eigen::Matrix<double, 2, 3> tmat = jac * vb.world_to_cam;
    const Eigen::Matrix2d cov = tmat * kernel.covariance() * tmat.transpose();
    s.cov2d[0] = cov(0, 0) + kCovarianceFloor;
    s.cov2d[1] = 0.5 * (cov(0, 1) + cov(1, 0));
    s.cov2d[2] = cov(1, 1) + kCovarianceFloor;
    return s;
}

PixelSample composite_pixel(std::span<const Splat2D> sorted_splats, double px, double py) {
    PixelSample out;
    double transmittance = 1.0;
    for (const Splat2D& s : sorted_splats) {
        const double det = s.cov2d[0] * s.cov2d[2] - s.cov2d[1] * s.cov2d[1];
        const double inv_det = 1.0 / det;
        const double dx = px - s.center[0];
        const double dy = py - s.center[1];
        const double power = -0.5 * inv_det *
                             (s.cov2d[2] * dx * dx - 2.0 * s.cov2d[1] * dx * dy +
                              s.cov2d[0] * dy * dy);
        const double sigma = s.opacity * std::exp(power);
        out.rgb += (transmittance * sigma) * s.color;
        transmittance *= (1.0 - sigma);
        if (transmittance < kEarlyExitTransmittance) break;
    }
    out.alpha = 1.0 - transmittance;
    return out;
}

Vec3 composite(std::span<const Splat2D> sorted_splats, double px, double py) {
    return composite_pixel(sorted_splats, px, py).rgb;
}

ImageRgba8 render_kernels(std::span<const GaussianKernel> kernels, const Camera& camera) {
    camera.validate();
    const int w = camera.width;
    const int h = camera.height;

    std::vector<Splat2D> splats;
    splats.reserve(kernels.size());
    {
        std::vector<std::optional<Splat2D>> projected(kernels.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(kernels.size()); ++i) {
            projected[i] = project_gaussian(kernels[i], camera, static_cast<std::uint32_t>(i));
        }
        for (auto& p : projected) {
            if (p) splats.push_back(*p);
        }
    }

    std::stable_sort(splats.begin(), splats.end(), [](const Splat2D& a, const Splat2D& b) {
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.kernel_index < b.kernel_index;
    });

    // Tile binning: each tile keeps its overlapping splats in global depth
    // order, so per-pixel compositing order is defined by the sort alone.
    const int tiles_x = (w + kTileSize - 1) / kTileSize;
    const int tiles_y = (h + kTileSize - 1) / kTileSize;
    std::vector<std::vector<std::uint32_t>> tile_splats(
        static_cast<std::size_t>(tiles_x) * tiles_y);
    for (std::uint32_t si = 0; si < splats.size(); ++si) {
        const Splat2D& s = splats[si];
        const double lam_max =
            0.5 * (s.cov2d[0] + s.cov2d[2]) +
            std::sqrt(std::max(0.0, 0.25 * (s.cov2d[0] - s.cov2d[2]) * (s.cov2d[0] - s.cov2d[2]) +
                                        s.cov2d[1] * s.cov2d[1]));
        const double r = std::sqrt(-2.0 * std::log(kMinContribution)) * std::sqrt(lam_max);
        const int x0 = std::clamp(static_cast<int>(std::floor(s.center[0] - r)), 0, w - 1);
        const int x1 = std::clamp(static_cast<int>(std::ceil(s.center[0] + r)), 0, w - 1);
        const int y0 = std::clamp(static_cast<int>(std::floor(s.center[1] - r)), 0, h - 1);
        const int y1 = std::clamp(static_cast<int>(std::ceil(s.center[1] + r)), 0, h - 1);
        if (s.center[0] + r < 0 || s.center[0] - r > w || s.center[1] + r < 0 ||
            s.center[1] - r > h) {
            continue;
        }
        for (int ty = y0 / kTileSize; ty <= y1 / kTileSize; ++ty) {
            for (int tx = x0 / kTileSize; tx <= x1 / kTileSize; ++tx) {
                tile_splats[static_cast<std::size_t>(ty) * tiles_x + tx].push_back(si);
            }
        }
    }

    ImageRgba8 image;
    image.width = w;
    image.height = h;
    image.pixels.assign(static_cast<std::size_t>(w) * h * 4, 0);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
    for (std::int64_t tile = 0; tile < static_cast<std::int64_t>(tile_splats.size()); ++tile) {
        const std::vector<std::uint32_t>& list = tile_splats[tile];
        if (list.empty()) continue;
        const int tx = static_cast<int>(tile % tiles_x);
        const int ty = static_cast<int>(tile / tiles_x);
        const int px0 = tx * kTileSize;
        const int py0 = ty * kTileSize;
        const int px1 = std::min(px0 + kTileSize, w);
        const int py1 = std::min(py0 + kTileSize, h);
        std::vector<Splat2D> local;
        local.reserve(list.size());
        for (std::uint32_t si : list) local.push_back(splats[si]);
        for (int y = py0; y < py1; ++y) {
            for (int x = px0; x < px1; ++x) {
                const PixelSample sample =
                    composite_pixel(local, x + 0.5, y + 0.5);  // pixel centers
                std::uint8_t* px = image.at(x, y);
                const double a = std::clamp(sample.alpha, 0.0, 1.0);
                // Straight (unassociated) alpha.
                Vec3 rgb = Vec3::Zero();
                if (a > 0.0) rgb = (sample.rgb / a).cwiseMax(0.0).cwiseMin(1.0);
                px[0] = static_cast<std::uint8_t>(std::lround(rgb.x() * 255.0));
                px[1] = static_cast<std::uint8_t>(std::lround(rgb.y() * 255.0));
                px[2] = static_cast<std::uint8_t>(std::lround(rgb.z() * 255.0));
                px[3] = static_cast<std::uint8_t>(std::lround(a * 255.0));
            }
        }
    }
    return image;
}

ImageRgba8 render_frame(const Frame& frame, const Camera& camera) {
    return render_kernels(frame.kernels, camera);
}

Camera camera_for_frame(const Camera& base, const CameraPath& path, int index) {
    if (path.turntable_deg_per_frame == 0.0 || index == 0) return base;
    const double angle = path.turntable_deg_per_frame * index * 3.14159265358979323846 / 180.0;
    const Eigen::AngleAxisd rot(angle, base.up.normalized());
    Camera cam = base;
    cam.position = base.look_at + rot * (base.position - base.look_at);
    return cam;
}

std::vector<std::filesystem::path> render_sequence(const std::filesystem::path& sequence_dir,
                                                   const Camera& base, const CameraPath& path,
                                                   const std::filesystem::path& out_dir) {
    base.validate();
    const std::vector<Frame> frames = import_sequence(sequence_dir);
    const std::filesystem::path target = out_dir.empty() ? sequence_dir : out_dir;
    if (!out_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(target, ec);
    }

    std::vector<std::filesystem::path> outputs;
    for (const Frame& frame : frames) {
        const Camera cam = camera_for_frame(base, path, frame.index);
        const ImageRgba8 image = render_frame(frame, cam);
        char name[32];
        std::snprintf(name, sizeof name, "frame_%04d.png", frame.index);
        const std::filesystem::path out = target / name;
        write_png_rgba8(out, image);
        outputs.push_back(out);
    }
    return outputs;
}

}  // namespace gsmpm
