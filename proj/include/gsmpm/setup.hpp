#pragma once

#include "gsmpm/types.hpp"

#include <vector>

namespace gsmpm {

struct MaterialParams {
    double density = 1000.0;          // mass / volume
    double youngs_modulus = 2.0e5;    // pressure units
    double poissons_ratio = 0.3;

    double mu() const { return youngs_modulus / (2.0 * (1.0 + poissons_ratio)); }
    double lambda() const {
        return youngs_modulus * poissons_ratio /
               ((1.0 + poissons_ratio) * (1.0 - 2.0 * poissons_ratio));
    }

    // density > 0, E > 0, nu in (-1, 0.4995); lambda blows up at the
    // incompressible limit so nu >= 0.4995 is rejected outright.
    void validate() const;
};

// Simulation state, index-aligned with the source GaussianCloud for the whole
// lifetime of the system (no reordering, insertion, or deletion).
struct ParticleSystem {
    std::vector<Vec3> x;   // positions, inside the unit-cube domain
    std::vector<Vec3> v;   // velocities
    std::vector<Mat3> F;   // deformation gradients, det > 0
    std::vector<Mat3> C;   // affine velocity gradients
    std::vector<double> mass;
    std::vector<double> volume0;
    MaterialParams material;
    WorldTransform transform;
    double time = 0.0;

    std::size_t size() const { return x.size(); }
};

// Uniform scale + translation placing the cloud's bounding box inside
// [margin, 1-margin]^3, centered, aspect preserved. A single-point cloud maps
// to the domain center with scale 1.
std::pair<std::vector<Vec3>, WorldTransform> normalize_to_domain(const GaussianCloud& cloud,
                                                                 double margin);

// V_p = dx^3 / n(cell(p)) with cell(p) = floor(x / dx) per axis.
std::vector<double> estimate_particle_volumes(const std::vector<Vec3>& positions,
                                              double grid_spacing);

// Composes normalize_to_domain and estimate_particle_volumes; m = rho * V,
// F = I, C = 0, v = 0, t = 0.
ParticleSystem init_particles(const GaussianCloud& cloud, const MaterialParams& material,
                              double grid_spacing, double margin);

}  // namespace gsmpm
