#pragma once

#include <cstddef>
#include <cstdint>

namespace gsmpm::kernels {

// Per-particle transfer inputs, precomputed once per substep so the scatter
// loop is pure streaming arithmetic. Weights/offsets are per axis over the
// 3x3x3 quadratic B-spline stencil; `affine` holds the fused MLS-MPM matrix
// m*C - dt*(4/dx^2)*V0*P*F^T as three 4-wide columns (lane 3 zero).
struct alignas(32) P2GScratch {
    double wx[3];
    double wy[3];
    double wz[3];
    double dpx[3];  // (offset - fx) * dx per axis offset, physical units
    double dpy[3];
    double dpz[3];
    double mvm[4];  // m*v_x, m*v_y, m*v_z, m
    double acol[3][4];
    std::int32_t base[3];
    std::int32_t pad = 0;
};

// Scatter `count` particles, visited through `order`, into the node array
// (4 doubles per node, [mv_x, mv_y, mv_z, m]). Accumulation order is the
// order array, so a caller-fixed order makes results reproducible.
using P2gScatterFn = void (*)(const P2GScratch* particles, const std::uint32_t* order,
                              std::size_t count, int n, double* node4);

// node4 -> vel4: v = mv/m + g*dt where m > 0, zero otherwise. Lane 3 is 0.
using GridVelocityFn = void (*)(const double* node4, std::size_t node_count,
                                const double g_dt[3], double* vel4);

// APIC gather for particles [begin, end): velocity v_p = sum w*v_i and
// C_p = (4/dx^2) * sum w * v_i * (x_i - x_p)^T. Positions are 3 doubles per
// particle; out_v is 3 per particle, out_C 9 per particle (column-major).
using G2pGatherFn = void (*)(const double* positions, std::size_t begin, std::size_t end,
                             const double* vel4, int n, double dx, double* out_v,
                             double* out_c);

struct KernelTable {
    P2gScatterFn p2g_scatter;
    GridVelocityFn grid_velocity;
    G2pGatherFn g2p_gather;
    const char* name;
};

enum class Backend {
    Auto,    // AVX2 when the CPU supports it, scalar otherwise
    Scalar,
    Avx2,
};

const KernelTable& scalar_table();
bool avx2_available();               // compiled in and supported by this CPU
const KernelTable& table(Backend backend);  // throws ValidationError for unavailable backends

// Backend override from GSPLATMPM_BACKEND (auto|scalar|avx2), Auto otherwise.
Backend env_backend();

}  // namespace gsmpm::kernels
