#include "gsmpm/forces.hpp"

#include "gsmpm/errors.hpp"

#include <cmath>

namespace gsmpm {

void ForceDirective::validate() const {
    if (!(t_start < t_end)) {
        throw ValidationError("force window must satisfy t_start < t_end");
    }
    if (!vector.allFinite() || !std::isfinite(t_start) || !std::isfinite(t_end)) {
        throw ValidationError("force directive has non-finite values");
    }
    if (region) {
        if (!((region->max - region->min).minCoeff() > 0.0)) {
            throw ValidationError("force region box must have positive extent");
        }
    }
}

void ForceSchedule::validate() const {
    for (const ForceDirective& d : directives) d.validate();
}

std::vector<const ForceDirective*> evaluate_schedule(const ForceSchedule& schedule, double t) {
    std::vector<const ForceDirective*> active;
    for (const ForceDirective& d : schedule.directives) {
        if (d.active_at(t)) active.push_back(&d);
    }
    return active;
}

std::vector<std::uint32_t> select_region(const ParticleSystem& system,
                                         const std::optional<BoxRegion>& region) {
    std::vector<std::uint32_t> indices;
    const std::size_t count = system.size();
    if (!region) {
        indices.resize(count);
        for (std::size_t i = 0; i < count; ++i) indices[i] = static_cast<std::uint32_t>(i);
        return indices;
    }
    for (std::size_t i = 0; i < count; ++i) {
        const Vec3& p = system.x[i];
        if ((p.array() >= region->min.array()).all() && (p.array() <= region->max.array()).all()) {
            indices.push_back(static_cast<std::uint32_t>(i));
        }
    }
    return indices;
}

void apply_newtonian_force(ParticleSystem& system, std::span<const std::uint32_t> subset,
                           const Vec3& force, double dt) {
    for (std::uint32_t i : subset) {
        system.v[i] += (force / system.mass[i]) * dt;
    }
}

void apply_velocity_directive(ParticleSystem& system, std::span<const std::uint32_t> subset,
                              const Vec3& v_set) {
    for (std::uint32_t i : subset) system.v[i] = v_set;
}

void apply_schedule(ParticleSystem& system, const ForceSchedule& schedule, double t, double dt) {
    const std::vector<const ForceDirective*> active = evaluate_schedule(schedule, t);
    if (active.empty()) return;
    for (const ForceDirective* d : active) {
        if (d->kind != ForceKind::NewtonianForce) continue;
        apply_newtonian_force(system, select_region(system, d->region), d->vector, dt);
    }
    for (const ForceDirective* d : active) {
        if (d->kind != ForceKind::SetVelocity) continue;
        apply_velocity_directive(system, select_region(system, d->region), d->vector);
    }
}

}  // namespace gsmpm
