#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace gsmpm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Storage order (w, x, y, z); w is the scalar part, matching the rot_0..rot_3
// layout of 3DGS PLY files.
struct Quaternion {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const;
    Quaternion normalized() const;  // throws ValidationError on zero norm
};

// One splat with activated (render-ready) parameters.
struct GaussianKernel {
    Vec3 position = Vec3::Zero();
    Quaternion rotation;      // unit quaternion
    Vec3 scales = Vec3::Ones();  // stddev along principal axes, > 0
    double opacity = 1.0;     // [0, 1]
    Vec3 color = Vec3::Constant(0.5);  // RGB, [0, 1]

    // Sigma = R S S^T R^T from rotation and scales.
    Mat3 covariance() const;
};

// A splat as stored on disk, before activations.
struct RawGaussianRecord {
    float position[3] = {0, 0, 0};
    float f_dc[3] = {0, 0, 0};
    float opacity_logit = 0;
    float log_scales[3] = {0, 0, 0};
    float rotation_q[4] = {1, 0, 0, 0};  // (w, x, y, z), unnormalized as stored
};

struct GaussianCloud {
    std::vector<GaussianKernel> kernels;
    // Raw records retained from parsing. When present (size matches kernels),
    // the writer emits them verbatim so parse/write round-trips are
    // byte-exact. Programmatically built clouds leave this empty and the
    // writer applies inverse activations instead.
    std::vector<RawGaussianRecord> raw;

    std::size_t count() const { return kernels.size(); }
};

// Uniform scale + translation between world and simulation coordinates:
// x_sim = scale * x_world + translation.
struct WorldTransform {
    double scale = 1.0;
    Vec3 translation = Vec3::Zero();

    Vec3 to_sim(const Vec3& world) const { return scale * world + translation; }
    Vec3 to_world(const Vec3& sim) const { return (sim - translation) / scale; }
};

}  // namespace gsmpm
