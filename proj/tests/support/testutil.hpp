#pragma once

// Shared helpers for the test suites: deterministic random generators for
// rotations, SPD matrices, clouds, and lattice particle systems.

#include "gsmpm/grid.hpp"
#include "gsmpm/math3d.hpp"
#include "gsmpm/setup.hpp"
#include "gsmpm/splat_io.hpp"
#include "gsmpm/types.hpp"

#include <cmath>
#include <random>

namespace testutil {

using gsmpm::GaussianCloud;
using gsmpm::GaussianKernel;
using gsmpm::Mat3;
using gsmpm::ParticleSystem;
using gsmpm::Quaternion;
using gsmpm::Vec3;

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

// Shoemake's uniform random rotation.
inline Quaternion random_quaternion(std::mt19937_64& g) {
    const double u1 = uniform(g, 0.0, 1.0);
    const double u2 = uniform(g, 0.0, 2.0 * M_PI);
    const double u3 = uniform(g, 0.0, 2.0 * M_PI);
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    return Quaternion{b * std::cos(u3), a * std::sin(u2), a * std::cos(u2), b * std::sin(u3)}
        .normalized();
}

inline Mat3 random_rotation(std::mt19937_64& g) {
    return gsmpm::quaternion_to_matrix(random_quaternion(g));
}

// SPD matrix with condition number at most `max_condition` and overall scale
// in [0.1, 10].
inline Mat3 random_spd(std::mt19937_64& g, double max_condition) {
    const Mat3 r = random_rotation(g);
    const double log_cond = uniform(g, 0.0, std::log10(max_condition));
    Vec3 lam;
    lam(0) = 1.0;
    lam(1) = std::pow(10.0, -uniform(g, 0.0, log_cond));
    lam(2) = std::pow(10.0, -log_cond);
    lam *= uniform(g, 0.1, 10.0);
    const Mat3 s = r * lam.asDiagonal() * r.transpose();
    return 0.5 * (s + s.transpose());
}

// Deformation gradient with det(F) > min_det (rotation * stretch * rotation).
inline Mat3 random_deformation(std::mt19937_64& g, double min_det) {
    for (;;) {
        const Mat3 u = random_rotation(g);
        const Mat3 v = random_rotation(g);
        const Vec3 s(uniform(g, 0.6, 1.6), uniform(g, 0.6, 1.6), uniform(g, 0.6, 1.6));
        const Mat3 f = u * s.asDiagonal() * v.transpose();
        if (f.determinant() > min_det) return f;
    }
}

inline GaussianKernel random_kernel(std::mt19937_64& g) {
    GaussianKernel k;
    k.position = Vec3(uniform(g, -1, 1), uniform(g, -1, 1), uniform(g, -1, 1));
    k.rotation = random_quaternion(g);
    k.scales = Vec3(std::exp(uniform(g, -3, 0.5)), std::exp(uniform(g, -3, 0.5)),
                    std::exp(uniform(g, -3, 0.5)));
    k.opacity = uniform(g, 0.02, 0.98);
    k.color = Vec3(uniform(g, 0, 1), uniform(g, 0, 1), uniform(g, 0, 1));
    return k;
}

inline GaussianCloud random_cloud(std::mt19937_64& g, std::size_t count) {
    GaussianCloud cloud;
    cloud.kernels.reserve(count);
    for (std::size_t i = 0; i < count; ++i) cloud.kernels.push_back(random_kernel(g));
    return cloud;
}

// Lattice of per_axis^3 particles centered in the domain, F = I, C = 0, v = 0.
inline ParticleSystem lattice_system(const gsmpm::GridConfig& grid, int per_axis,
                                     double half_extent = 0.15,
                                     const Vec3& center = Vec3::Constant(0.5),
                                     const gsmpm::MaterialParams& material = {}) {
    ParticleSystem sys;
    sys.material = material;
    const double step = 2.0 * half_extent / std::max(1, per_axis - 1);
    for (int i = 0; i < per_axis; ++i) {
        for (int j = 0; j < per_axis; ++j) {
            for (int k = 0; k < per_axis; ++k) {
                Vec3 p = center - Vec3::Constant(half_extent);
                p += step * Vec3(i, j, k);
                sys.x.push_back(p);
            }
        }
    }
    const std::size_t n = sys.x.size();
    sys.v.assign(n, Vec3::Zero());
    sys.F.assign(n, Mat3::Identity());
    sys.C.assign(n, Mat3::Zero());
    sys.volume0 = gsmpm::estimate_particle_volumes(sys.x, grid.spacing());
    sys.mass.resize(n);
    for (std::size_t p = 0; p < n; ++p) sys.mass[p] = material.density * sys.volume0[p];
    return sys;
}

// Random interior particle positions with random velocities.
inline ParticleSystem random_system(std::mt19937_64& g, const gsmpm::GridConfig& grid,
                                    std::size_t count, double vmax = 1.0,
                                    const gsmpm::MaterialParams& material = {}) {
    ParticleSystem sys;
    sys.material = material;
    for (std::size_t i = 0; i < count; ++i) {
        sys.x.push_back(Vec3(uniform(g, 0.2, 0.8), uniform(g, 0.2, 0.8), uniform(g, 0.2, 0.8)));
        sys.v.push_back(Vec3(uniform(g, -vmax, vmax), uniform(g, -vmax, vmax),
                             uniform(g, -vmax, vmax)));
    }
    sys.F.assign(count, Mat3::Identity());
    sys.C.assign(count, Mat3::Zero());
    sys.volume0 = gsmpm::estimate_particle_volumes(sys.x, grid.spacing());
    sys.mass.resize(count);
    for (std::size_t p = 0; p < count; ++p) sys.mass[p] = material.density * sys.volume0[p];
    return sys;
}

inline Vec3 center_of_mass(const ParticleSystem& sys) {
    Vec3 num = Vec3::Zero();
    double den = 0.0;
    for (std::size_t p = 0; p < sys.size(); ++p) {
        num += sys.mass[p] * sys.x[p];
        den += sys.mass[p];
    }
    return num / den;
}

inline Vec3 com_velocity(const ParticleSystem& sys) {
    Vec3 num = Vec3::Zero();
    double den = 0.0;
    for (std::size_t p = 0; p < sys.size(); ++p) {
        num += sys.mass[p] * sys.v[p];
        den += sys.mass[p];
    }
    return num / den;
}

inline double rel_err(double actual, double expected) {
    return std::abs(actual - expected) / std::max(std::abs(expected), 1e-300);
}

inline double rel_err(const Mat3& actual, const Mat3& expected) {
    return (actual - expected).norm() / std::max(expected.norm(), 1e-300);
}

inline double rel_err(const Vec3& actual, const Vec3& expected) {
    return (actual - expected).norm() / std::max(expected.norm(), 1e-300);
}

}  // namespace testutil
