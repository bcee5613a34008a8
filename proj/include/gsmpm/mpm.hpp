#pragma once

#include "gsmpm/forces.hpp"
#include "gsmpm/grid.hpp"
#include "gsmpm/kernels.hpp"
#include "gsmpm/setup.hpp"
#include "gsmpm/types.hpp"

#include <cstdint>
#include <vector>

namespace gsmpm {

struct StepParams {
    double dt = 2.0e-4;
    Vec3 gravity = Vec3::Zero();
};

struct BsplineStencil {
    int base[3];
    double w[3][3];   // [axis][offset] quadratic B-spline weights
    double dw[3][3];  // d w / d x_p, physical units (1/dx folded in)
};

// Quadratic B-spline stencil around xp. Throws SimulationError::DomainEscape
// (tagged with particle_index) when xp is outside the stencil-valid interior.
BsplineStencil bspline_stencil(const Vec3& xp, const GridConfig& grid,
                               std::int64_t particle_index = -1);

// Fixed-corotated first Piola-Kirchhoff stress
//   P(F) = 2 mu (F - R) + lambda (J - 1) J F^-T
// with R from the polar decomposition of F and J = det(F).
// Throws SimulationError::InvertedElement when det(F) <= 0.
Mat3 compute_stress(const Mat3& F, double mu, double lambda);

// Scratch buffers reused across substeps; a default-constructed instance is
// grown on first use.
struct SimScratch {
    std::vector<kernels::P2GScratch> p2g;
    std::vector<std::uint32_t> order;
    std::vector<std::uint32_t> histogram;
    std::vector<std::uint32_t> cursor;
    std::vector<Vec3> x_next, v_next, v_saved;
    std::vector<Mat3> F_next, C_next;
};

struct StepOptions {
    kernels::Backend backend = kernels::Backend::Auto;
    // true: serial scatter in cell-sorted order. false: slab-parallel scatter
    // (even/odd slabs along x), which sums contributions in the same order and
    // is therefore also reproducible; kept separate as the reference path.
    bool deterministic = true;
    std::int64_t step_index = -1;  // for diagnostics only
};

void p2g(const ParticleSystem& system, Grid& grid, const StepParams& params,
         SimScratch& scratch, const StepOptions& options = {});

void grid_update(Grid& grid, const StepParams& params, const StepOptions& options = {});

// Gathers v and C, advects positions (semi-implicit Euler), validates every
// particle, then commits v, x, C. F is untouched (see update_deformation).
void g2p(ParticleSystem& system, const Grid& grid, const StepParams& params,
         SimScratch& scratch, const StepOptions& options = {});

// F' = (I + dt C) F. Throws SimulationError::InvertedElement if det(F') <= 0.
Mat3 update_deformation(const Mat3& F, const Mat3& C, double dt,
                        std::int64_t particle_index = -1, std::int64_t step_index = -1);

// CFL bound at the current state: dt <= 0.5 * dx / max(|v_p|, eps).
void check_cfl(const ParticleSystem& system, const GridConfig& grid, double dt,
               std::int64_t step_index = -1);

// One full substep: forces -> clear -> p2g -> grid_update -> g2p ->
// deformation update -> t += dt. Transactional: on error the pre-step state
// is restored before the exception propagates.
void step(ParticleSystem& system, Grid& grid, const StepParams& params,
          const ForceSchedule& schedule, SimScratch& scratch, const StepOptions& options = {});

// Frame driver: frame_dt seconds simulated as ceil(frame_dt / dt_max) equal
// substeps, re-checking CFL each substep. Returns the number of substeps run.
struct Simulation {
    ParticleSystem system;
    Grid grid;
    Vec3 gravity = Vec3::Zero();
    ForceSchedule schedule;
    double dt_max = 2.0e-4;
    StepOptions options;
    std::int64_t substeps_done = 0;

    Simulation(ParticleSystem sys, const GridConfig& grid_config)
        : system(std::move(sys)), grid(grid_config) {}

    int advance_frame(double frame_dt);

private:
    SimScratch scratch_;
};

}  // namespace gsmpm
