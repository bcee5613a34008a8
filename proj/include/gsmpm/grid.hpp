#pragma once

#include "gsmpm/types.hpp"

#include <cstddef>
#include <vector>

namespace gsmpm {

enum class BoundaryKind {
    Sticky,  // zero the whole velocity in the boundary layers
    Slip,    // zero only the face-normal component
};

struct GridConfig {
    int resolution = 64;      // nodes per axis
    int boundary_width = 2;   // node layers under boundary conditions
    BoundaryKind boundary_kind = BoundaryKind::Sticky;

    double spacing() const { return 1.0 / (resolution - 1); }

    // resolution >= 8, boundary_width >= 2 and < resolution / 2.
    void validate() const;
};

// Dense Eulerian scratch grid over [0,1]^3, node (i,j,k) at (i,j,k)*dx.
// Storage is 4 doubles per node: momentum_mass = [mv_x, mv_y, mv_z, m] and
// velocity = [v_x, v_y, v_z, 0], z-fastest, so the transfer kernels can work
// on whole nodes as 4-wide vectors.
class Grid {
public:
    explicit Grid(const GridConfig& config);

    void clear();  // zero momentum and mass (velocity untouched; grid_update rewrites it)

    int dim() const { return config_.resolution; }
    double spacing() const { return config_.spacing(); }
    std::size_t node_count() const { return nodes_; }
    const GridConfig& config() const { return config_; }

    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * config_.resolution + j) * config_.resolution + k;
    }

    double* momentum_mass() { return momentum_mass_.data(); }
    const double* momentum_mass() const { return momentum_mass_.data(); }
    double* velocity() { return velocity_.data(); }
    const double* velocity() const { return velocity_.data(); }

    double node_mass(int i, int j, int k) const { return momentum_mass_[index(i, j, k) * 4 + 3]; }
    Vec3 node_momentum(int i, int j, int k) const {
        const double* p = &momentum_mass_[index(i, j, k) * 4];
        return {p[0], p[1], p[2]};
    }
    Vec3 node_velocity(int i, int j, int k) const {
        const double* p = &velocity_[index(i, j, k) * 4];
        return {p[0], p[1], p[2]};
    }
    void set_node_velocity(int i, int j, int k, const Vec3& v) {
        double* p = &velocity_[index(i, j, k) * 4];
        p[0] = v.x();
        p[1] = v.y();
        p[2] = v.z();
        p[3] = 0.0;
    }

    double total_mass() const;
    Vec3 total_momentum() const;          // sum of stored node momenta
    Vec3 total_velocity_momentum() const; // sum of m_i * v_i after grid_update

private:
    GridConfig config_;
    std::size_t nodes_;
    std::vector<double> momentum_mass_;
    std::vector<double> velocity_;
};

}  // namespace gsmpm
