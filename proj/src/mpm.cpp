#include "gsmpm/mpm.hpp"

#include "gsmpm/errors.hpp"
#include "gsmpm/math3d.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gsmpm {

namespace {

constexpr double kCflVelocityFloor = 1e-12;
constexpr int kSlabWidth = 4;  // base_x cells per scatter slab (fast mode)

// Cofactor matrix of F, i.e. det(F) * F^-T.
Mat3 cofactor(const Mat3& f) {
    Mat3 c;
    c.col(0) = f.col(1).cross(f.col(2));
    c.col(1) = f.col(2).cross(f.col(0));
    c.col(2) = f.col(0).cross(f.col(1));
    return c;
}

// Collects the exception thrown for the lowest particle index so parallel
// validation reports deterministically.
class FirstError {
public:
    void record(std::int64_t index, std::exception_ptr e) {
        std::lock_guard<std::mutex> lock(mutex_);
        std::int64_t cur = index_.load(std::memory_order_relaxed);
        if (cur < 0 || index < cur) {
            index_.store(index, std::memory_order_relaxed);
            error_ = std::move(e);
        }
    }
    bool has_error() const { return index_.load(std::memory_order_relaxed) >= 0; }
    [[noreturn]] void rethrow() const { std::rethrow_exception(error_); }

private:
    std::mutex mutex_;
    std::atomic<std::int64_t> index_{-1};
    std::exception_ptr error_;
};

}  // namespace

BsplineStencil bspline_stencil(const Vec3& xp, const GridConfig& grid,
                               std::int64_t particle_index) {
    const int n = grid.resolution;
    const double dx = grid.spacing();
    const double inv_dx = 1.0 / dx;

    BsplineStencil s;
    for (int a = 0; a < 3; ++a) {
        const double base_f = std::floor(xp(a) * inv_dx - 0.5);
        const int base = static_cast<int>(base_f);
        if (base < 0 || base > n - 3) {
            throw SimulationError(
                SimulationError::Kind::DomainEscape,
                "particle " + std::to_string(particle_index) + " left the domain interior at (" +
                    std::to_string(xp.x()) + ", " + std::to_string(xp.y()) + ", " +
                    std::to_string(xp.z()) + ")",
                particle_index);
        }
        const double fx = xp(a) * inv_dx - base_f;
        s.base[a] = base;
        s.w[a][0] = 0.5 * (1.5 - fx) * (1.5 - fx);
        s.w[a][1] = 0.75 - (fx - 1.0) * (fx - 1.0);
        s.w[a][2] = 0.5 * (fx - 0.5) * (fx - 0.5);
        s.dw[a][0] = (fx - 1.5) * inv_dx;
        s.dw[a][1] = 2.0 * (1.0 - fx) * inv_dx;
        s.dw[a][2] = (fx - 0.5) * inv_dx;
    }
    return s;
}

Mat3 compute_stress(const Mat3& f, double mu, double lambda) {
    const double j = f.determinant();
    if (!(j > 0.0)) {
        throw SimulationError(SimulationError::Kind::InvertedElement,
                              "inverted element: det(F) = " + std::to_string(j));
    }
    Mat3 r, s;
    polar_decompose(f, r, s);
    return 2.0 * mu * (f - r) + lambda * (j - 1.0) * cofactor(f);
}

void check_cfl(const ParticleSystem& system, const GridConfig& grid, double dt,
               std::int64_t step_index) {
    double vmax_sq = 0.0;
#ifdef _OPENMP
#pragma omp parallel for reduction(max : vmax_sq) schedule(static)
#endif
    for (std::int64_t p = 0; p < static_cast<std::int64_t>(system.size()); ++p) {
        vmax_sq = std::max(vmax_sq, system.v[p].squaredNorm());
    }
    const double vmax = std::max(std::sqrt(vmax_sq), kCflVelocityFloor);
    const double bound = 0.5 * grid.spacing() / vmax;
    if (dt > bound) {
        throw SimulationError(SimulationError::Kind::CflViolation,
                              "CFL violation: dt = " + std::to_string(dt) +
                                  " exceeds 0.5*dx/|v|max = " + std::to_string(bound) +
                                  " (|v|max = " + std::to_string(vmax) + ")",
                              -1, step_index);
    }
}

namespace {

void p2g_precompute(const ParticleSystem& system, const GridConfig& grid_cfg,
                    const StepParams& params, SimScratch& scratch, std::int64_t step_index) {
    const std::size_t count = system.size();
    scratch.p2g.resize(count);
    const double dx = grid_cfg.spacing();
    const double inv_dx = 1.0 / dx;
    const double stress_coeff = params.dt * 4.0 * inv_dx * inv_dx;
    const double mu = system.material.mu();
    const double lambda = system.material.lambda();

    FirstError first_error;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t p = 0; p < static_cast<std::int64_t>(count); ++p) {
        if (first_error.has_error()) continue;
        try {
            const BsplineStencil st = bspline_stencil(system.x[p], grid_cfg, p);
            const Mat3 stress = compute_stress(system.F[p], mu, lambda);
            const Mat3 affine = system.mass[p] * system.C[p] -
                                (stress_coeff * system.volume0[p]) *
                                    (stress * system.F[p].transpose());

            kernels::P2GScratch& out = scratch.p2g[p];
            double* dpos[3] = {out.dpx, out.dpy, out.dpz};
            for (int a = 0; a < 3; ++a) {
                out.base[a] = st.base[a];
                const double fx = system.x[p](a) * inv_dx - st.base[a];
                for (int k = 0; k < 3; ++k) dpos[a][k] = (k - fx) * dx;
            }
            for (int k = 0; k < 3; ++k) {
                out.wx[k] = st.w[0][k];
                out.wy[k] = st.w[1][k];
                out.wz[k] = st.w[2][k];
            }
            for (int c = 0; c < 3; ++c) {
                out.mvm[c] = system.mass[p] * system.v[p](c);
                for (int rw = 0; rw < 3; ++rw) out.acol[c][rw] = affine(rw, c);
                out.acol[c][3] = 0.0;
            }
            out.mvm[3] = system.mass[p];
        } catch (...) {
            first_error.record(p, std::current_exception());
        }
    }
    if (first_error.has_error()) {
        try {
            first_error.rethrow();
        } catch (const SimulationError& e) {
            throw SimulationError(e.kind, e.what(), e.particle,
                                  e.step >= 0 ? e.step : step_index);
        }
    }
}

// Stable counting sort of particle indices by linearized base cell
// (x-major). The prefix table doubles as the slab boundary lookup.
void sort_by_cell(const ParticleSystem& system, int n, SimScratch& scratch) {
    const std::size_t count = system.size();
    const std::size_t cells = static_cast<std::size_t>(n) * n * n;
    scratch.order.resize(count);
    scratch.histogram.assign(cells + 1, 0);

    auto key = [&](std::size_t p) {
        const kernels::P2GScratch& s = scratch.p2g[p];
        return (static_cast<std::size_t>(s.base[0]) * n + s.base[1]) * n + s.base[2];
    };
    for (std::size_t p = 0; p < count; ++p) ++scratch.histogram[key(p) + 1];
    for (std::size_t c = 1; c <= cells; ++c) scratch.histogram[c] += scratch.histogram[c - 1];
    scratch.cursor.assign(scratch.histogram.begin(), scratch.histogram.end() - 1);
    for (std::size_t p = 0; p < count; ++p) scratch.order[scratch.cursor[key(p)]++] = p;
}

void p2g_scatter_dispatch(const ParticleSystem& system, Grid& grid, SimScratch& scratch,
                          const StepOptions& options) {
    const int n = grid.dim();
    const kernels::KernelTable& kt = kernels::table(options.backend);
    const std::size_t count = system.size();

    if (options.deterministic) {
        kt.p2g_scatter(scratch.p2g.data(), scratch.order.data(), count, n, grid.momentum_mass());
        return;
    }

    // Fast mode: scatter slabs of base_x cells in two phases (even, odd).
    // Slabs write disjoint node ranges within a phase, and the even-before-
    // odd order matches the serial cell-sorted order, so both modes produce
    // identical sums.
    const std::size_t plane = static_cast<std::size_t>(n) * n;
    const int nslabs = (n + kSlabWidth - 1) / kSlabWidth;
    auto slab_range = [&](int s, std::size_t& begin, std::size_t& end) {
        const std::size_t cell_lo = std::min<std::size_t>(static_cast<std::size_t>(s) * kSlabWidth * plane,
                                                          plane * n);
        const std::size_t cell_hi =
            std::min<std::size_t>((static_cast<std::size_t>(s) + 1) * kSlabWidth * plane, plane * n);
        begin = scratch.histogram[cell_lo];
        end = scratch.histogram[cell_hi];
    };
    for (int phase = 0; phase < 2; ++phase) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
        for (int s = phase; s < nslabs; s += 2) {
            std::size_t begin = 0, end = 0;
            slab_range(s, begin, end);
            if (end > begin) {
                kt.p2g_scatter(scratch.p2g.data(), scratch.order.data() + begin, end - begin, n,
                               grid.momentum_mass());
            }
        }
    }
}

}  // namespace

void p2g(const ParticleSystem& system, Grid& grid, const StepParams& params, SimScratch& scratch,
         const StepOptions& options) {
    p2g_precompute(system, grid.config(), params, scratch, options.step_index);
    sort_by_cell(system, grid.dim(), scratch);
    p2g_scatter_dispatch(system, grid, scratch, options);
}

void grid_update(Grid& grid, const StepParams& params, const StepOptions& options) {
    const kernels::KernelTable& kt = kernels::table(options.backend);
    const std::size_t nodes = grid.node_count();
    const double g_dt[3] = {params.gravity.x() * params.dt, params.gravity.y() * params.dt,
                            params.gravity.z() * params.dt};

#ifdef _OPENMP
#pragma omp parallel
    {
        const int nt = omp_get_num_threads();
        const int tid = omp_get_thread_num();
        const std::size_t chunk = (nodes + nt - 1) / nt;
        const std::size_t begin = std::min(nodes, chunk * tid);
        const std::size_t end = std::min(nodes, begin + chunk);
        if (end > begin) {
            kt.grid_velocity(grid.momentum_mass() + begin * 4, end - begin, g_dt,
                             grid.velocity() + begin * 4);
        }
    }
#else
    kt.grid_velocity(grid.momentum_mass(), nodes, g_dt, grid.velocity());
#endif

    // Boundary conditions on the node layers of each face. Sticky zeroes the
    // whole velocity, slip only the face-normal component.
    const int n = grid.dim();
    const int bw = grid.config().boundary_width;
    const bool sticky = grid.config().boundary_kind == BoundaryKind::Sticky;
    double* vel = grid.velocity();
    auto apply = [&](int i, int j, int k, int axis) {
        double* v = vel + grid.index(i, j, k) * 4;
        if (sticky) {
            v[0] = v[1] = v[2] = 0.0;
        } else {
            v[axis] = 0.0;
        }
    };
    for (int layer = 0; layer < bw; ++layer) {
        const int lo = layer;
        const int hi = n - 1 - layer;
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                apply(lo, a, b, 0);
                apply(hi, a, b, 0);
                apply(a, lo, b, 1);
                apply(a, hi, b, 1);
                apply(a, b, lo, 2);
                apply(a, b, hi, 2);
            }
        }
    }
}

namespace {

// Gather + advect + deformation update into the staging arrays; validates
// everything and throws without committing.
void g2p_stage(ParticleSystem& system, const Grid& grid, const StepParams& params,
               SimScratch& scratch, const StepOptions& options, bool with_deformation) {
    const std::size_t count = system.size();
    const int n = grid.dim();
    const double dx = grid.spacing();
    scratch.v_next.resize(count);
    scratch.x_next.resize(count);
    scratch.C_next.resize(count);
    if (with_deformation) scratch.F_next.resize(count);

    const kernels::KernelTable& kt = kernels::table(options.backend);
    const double* positions = count ? system.x[0].data() : nullptr;
    double* out_v = count ? scratch.v_next[0].data() : nullptr;
    double* out_c = count ? scratch.C_next[0].data() : nullptr;

#ifdef _OPENMP
#pragma omp parallel
    {
        const int nt = omp_get_num_threads();
        const int tid = omp_get_thread_num();
        const std::size_t chunk = (count + nt - 1) / nt;
        const std::size_t begin = std::min(count, chunk * tid);
        const std::size_t end = std::min(count, begin + chunk);
        if (end > begin) kt.g2p_gather(positions, begin, end, grid.velocity(), n, dx, out_v, out_c);
    }
#else
    kt.g2p_gather(positions, 0, count, grid.velocity(), n, dx, out_v, out_c);
#endif

    const double interior_lo = 0.5 * dx;
    const double interior_hi = (n - 1.5) * dx;
    FirstError first_error;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t p = 0; p < static_cast<std::int64_t>(count); ++p) {
        if (first_error.has_error()) continue;
        try {
            const Vec3 x_new = system.x[p] + params.dt * scratch.v_next[p];
            for (int a = 0; a < 3; ++a) {
                if (!(x_new(a) >= interior_lo && x_new(a) < interior_hi)) {
                    throw SimulationError(SimulationError::Kind::DomainEscape,
                                          "particle " + std::to_string(p) +
                                              " advected outside the domain interior to (" +
                                              std::to_string(x_new.x()) + ", " +
                                              std::to_string(x_new.y()) + ", " +
                                              std::to_string(x_new.z()) + ")",
                                          p, options.step_index);
                }
            }
            scratch.x_next[p] = x_new;
            if (with_deformation) {
                scratch.F_next[p] = update_deformation(system.F[p], scratch.C_next[p], params.dt,
                                                       p, options.step_index);
            }
        } catch (...) {
            first_error.record(p, std::current_exception());
        }
    }
    if (first_error.has_error()) first_error.rethrow();
}

void g2p_commit(ParticleSystem& system, SimScratch& scratch, bool with_deformation) {
    system.v.swap(scratch.v_next);
    system.x.swap(scratch.x_next);
    system.C.swap(scratch.C_next);
    if (with_deformation) system.F.swap(scratch.F_next);
}

}  // namespace

void g2p(ParticleSystem& system, const Grid& grid, const StepParams& params, SimScratch& scratch,
         const StepOptions& options) {
    g2p_stage(system, grid, params, scratch, options, false);
    g2p_commit(system, scratch, false);
}

Mat3 update_deformation(const Mat3& F, const Mat3& C, double dt, std::int64_t particle_index,
                        std::int64_t step_index) {
    const Mat3 f_new = (Mat3::Identity() + dt * C) * F;
    const double det = f_new.determinant();
    if (!(det > 0.0)) {
        throw SimulationError(SimulationError::Kind::InvertedElement,
                              "particle " + std::to_string(particle_index) +
                                  " inverted: det(F) = " + std::to_string(det),
                              particle_index, step_index);
    }
    return f_new;
}

void step(ParticleSystem& system, Grid& grid, const StepParams& params,
          const ForceSchedule& schedule, SimScratch& scratch, const StepOptions& options) {
    // Forces are the only mutation before the staged commit; keep a copy so
    // a failed step restores the exact pre-step state.
    scratch.v_saved = system.v;
    try {
        apply_schedule(system, schedule, system.time, params.dt);
        check_cfl(system, grid.config(), params.dt, options.step_index);
        grid.clear();
        p2g(system, grid, params, scratch, options);
        grid_update(grid, params, options);
        g2p_stage(system, grid, params, scratch, options, true);
    } catch (...) {
        system.v.swap(scratch.v_saved);
        throw;
    }
    g2p_commit(system, scratch, true);
    system.time += params.dt;
}

int Simulation::advance_frame(double frame_dt) {
    if (!(frame_dt > 0.0)) throw ValidationError("frame_dt must be > 0");
    if (!(dt_max > 0.0)) throw ValidationError("dt_max must be > 0");
    const int substeps =
        std::max(1, static_cast<int>(std::ceil(frame_dt / dt_max * (1.0 - 1e-12))));
    const double dt = frame_dt / substeps;
    for (int i = 0; i < substeps; ++i) {
        StepOptions opts = options;
        opts.step_index = substeps_done;
        step(system, grid, StepParams{dt, gravity}, schedule, scratch_, opts);
        ++substeps_done;
    }
    return substeps;
}

}  // namespace gsmpm
