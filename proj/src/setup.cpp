#include "gsmpm/setup.hpp"

#include "gsmpm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

namespace gsmpm {

void MaterialParams::validate() const {
    if (!(density > 0.0) || !std::isfinite(density)) {
        throw ValidationError("material.density must be > 0");
    }
    if (!(youngs_modulus > 0.0) || !std::isfinite(youngs_modulus)) {
        throw ValidationError("material.youngs_modulus must be > 0");
    }
    if (!(poissons_ratio > -1.0) || !(poissons_ratio < 0.4995)) {
        throw ValidationError("material.poissons_ratio must lie in (-1, 0.4995); got " +
                              std::to_string(poissons_ratio));
    }
}

std::pair<std::vector<Vec3>, WorldTransform> normalize_to_domain(const GaussianCloud& cloud,
                                                                 double margin) {
    if (cloud.count() == 0) throw ValidationError("cannot normalize an empty cloud");
    if (!(margin > 0.0 && margin < 0.5)) throw ValidationError("margin must lie in (0, 0.5)");

    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (const GaussianKernel& k : cloud.kernels) {
        lo = lo.cwiseMin(k.position);
        hi = hi.cwiseMax(k.position);
    }
    const Vec3 extent = hi - lo;
    const double max_extent = extent.maxCoeff();

    WorldTransform tf;
    if (max_extent > 0.0) {
        tf.scale = (1.0 - 2.0 * margin) / max_extent;
    } else {
        tf.scale = 1.0;  // single point (or coincident points): center at scale 1
    }
    const Vec3 world_center = 0.5 * (lo + hi);
    tf.translation = Vec3::Constant(0.5) - tf.scale * world_center;

    std::vector<Vec3> positions;
    positions.reserve(cloud.count());
    for (const GaussianKernel& k : cloud.kernels) positions.push_back(tf.to_sim(k.position));
    return {std::move(positions), tf};
}

std::vector<double> estimate_particle_volumes(const std::vector<Vec3>& positions,
                                              double grid_spacing) {
    if (!(grid_spacing > 0.0)) throw ValidationError("grid_spacing must be > 0");

    const double inv_dx = 1.0 / grid_spacing;
    // Exact (collision-free) cell key; positions sit in [0,1]^3 so indices
    // are small.
    const std::int64_t span = static_cast<std::int64_t>(inv_dx) + 4;
    auto cell_key = [&](const Vec3& p) {
        const auto cx = static_cast<std::int64_t>(std::floor(p.x() * inv_dx)) + 1;
        const auto cy = static_cast<std::int64_t>(std::floor(p.y() * inv_dx)) + 1;
        const auto cz = static_cast<std::int64_t>(std::floor(p.z() * inv_dx)) + 1;
        return (cx * span + cy) * span + cz;
    };

    std::unordered_map<std::int64_t, int> counts;
    counts.reserve(positions.size());
    for (const Vec3& p : positions) ++counts[cell_key(p)];

    const double cell_volume = grid_spacing * grid_spacing * grid_spacing;
    std::vector<double> volumes;
    volumes.reserve(positions.size());
    for (const Vec3& p : positions) volumes.push_back(cell_volume / counts[cell_key(p)]);
    return volumes;
}

ParticleSystem init_particles(const GaussianCloud& cloud, const MaterialParams& material,
                              double grid_spacing, double margin) {
    material.validate();
    auto [positions, transform] = normalize_to_domain(cloud, margin);
    std::vector<double> volumes = estimate_particle_volumes(positions, grid_spacing);

    ParticleSystem sys;
    sys.material = material;
    sys.transform = transform;
    sys.time = 0.0;
    const std::size_t count = positions.size();
    sys.x = std::move(positions);
    sys.v.assign(count, Vec3::Zero());
    sys.F.assign(count, Mat3::Identity());
    sys.C.assign(count, Mat3::Zero());
    sys.volume0 = std::move(volumes);
    sys.mass.resize(count);
    for (std::size_t i = 0; i < count; ++i) sys.mass[i] = material.density * sys.volume0[i];
    return sys;
}

}  // namespace gsmpm
