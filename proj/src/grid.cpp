#include "gsmpm/grid.hpp"

#include "gsmpm/errors.hpp"

#include <cstring>
#include <string>

namespace gsmpm {

void GridConfig::validate() const {
    if (resolution < 8) {
        throw ValidationError("grid.resolution must be >= 8, got " + std::to_string(resolution));
    }
    if (boundary_width < 2 || boundary_width >= resolution / 2) {
        throw ValidationError("grid.boundary_width must be >= 2 and < resolution/2, got " +
                              std::to_string(boundary_width));
    }
}

Grid::Grid(const GridConfig& config) : config_(config) {
    config_.validate();
    nodes_ = static_cast<std::size_t>(config_.resolution) * config_.resolution * config_.resolution;
    momentum_mass_.assign(nodes_ * 4, 0.0);
    velocity_.assign(nodes_ * 4, 0.0);
}

void Grid::clear() {
    std::memset(momentum_mass_.data(), 0, momentum_mass_.size() * sizeof(double));
}

double Grid::total_mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i < nodes_; ++i) m += momentum_mass_[i * 4 + 3];
    return m;
}

Vec3 Grid::total_momentum() const {
    Vec3 p = Vec3::Zero();
    for (std::size_t i = 0; i < nodes_; ++i) {
        p.x() += momentum_mass_[i * 4 + 0];
        p.y() += momentum_mass_[i * 4 + 1];
        p.z() += momentum_mass_[i * 4 + 2];
    }
    return p;
}

Vec3 Grid::total_velocity_momentum() const {
    Vec3 p = Vec3::Zero();
    for (std::size_t i = 0; i < nodes_; ++i) {
        const double m = momentum_mass_[i * 4 + 3];
        p.x() += m * velocity_[i * 4 + 0];
        p.y() += m * velocity_[i * 4 + 1];
        p.z() += m * velocity_[i * 4 + 2];
    }
    return p;
}

}  // namespace gsmpm
