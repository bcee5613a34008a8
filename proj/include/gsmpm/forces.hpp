#pragma once

#include "gsmpm/setup.hpp"
#include "gsmpm/types.hpp"

#include <optional>
#include <span>
#include <vector>

namespace gsmpm {

enum class ForceKind {
    SetVelocity,     // overwrite particle velocities, reasserted every substep
    NewtonianForce,  // v += (f / m) * dt per selected particle
};

struct BoxRegion {
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Ones();
};

struct ForceDirective {
    ForceKind kind = ForceKind::NewtonianForce;
    Vec3 vector = Vec3::Zero();            // velocity for SetVelocity, force for NewtonianForce
    double t_start = 0.0;
    double t_end = 0.0;                    // half-open window [t_start, t_end)
    std::optional<BoxRegion> region;       // nullopt selects every particle

    bool active_at(double t) const { return t >= t_start && t < t_end; }
    void validate() const;  // t_start < t_end; box has positive extent
};

struct ForceSchedule {
    std::vector<ForceDirective> directives;

    void validate() const;
};

// Directives whose window contains t, in declaration order.
std::vector<const ForceDirective*> evaluate_schedule(const ForceSchedule& schedule, double t);

// Indices of particles inside the region (every index for nullopt).
std::vector<std::uint32_t> select_region(const ParticleSystem& system,
                                         const std::optional<BoxRegion>& region);

void apply_newtonian_force(ParticleSystem& system, std::span<const std::uint32_t> subset,
                           const Vec3& force, double dt);

void apply_velocity_directive(ParticleSystem& system, std::span<const std::uint32_t> subset,
                              const Vec3& v_set);

// One substep's worth of force control: active Newtonian forces first (in
// declaration order, composing additively), then velocity directives (last
// declared wins), so set_velocity always beats forces on overlap.
void apply_schedule(ParticleSystem& system, const ForceSchedule& schedule, double t, double dt);

}  // namespace gsmpm
