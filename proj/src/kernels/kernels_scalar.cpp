#include "gsmpm/kernels.hpp"

// Reference kernels: plain scalar loops, no FMA contraction, kept readable so
// the vector variants have an unambiguous ground truth.

namespace gsmpm::kernels {

void p2g_scatter_scalar(const P2GScratch* particles, const std::uint32_t* order,
                        std::size_t count, int n, double* node4) {
    const std::size_t sj = static_cast<std::size_t>(n) * 4;   // +1 in y
    const std::size_t si = static_cast<std::size_t>(n) * sj;  // +1 in x

    for (std::size_t o = 0; o < count; ++o) {
        const P2GScratch& s = particles[order[o]];
        double* base = node4 + static_cast<std::size_t>(s.base[0]) * si +
                       static_cast<std::size_t>(s.base[1]) * sj +
                       static_cast<std::size_t>(s.base[2]) * 4;
        for (int i = 0; i < 3; ++i) {
            const double dpx = s.dpx[i];
            // t_i = mv_m + dpos_x * A.col(0)
            double tix = s.mvm[0] + dpx * s.acol[0][0];
            double tiy = s.mvm[1] + dpx * s.acol[0][1];
            double tiz = s.mvm[2] + dpx * s.acol[0][2];
            for (int j = 0; j < 3; ++j) {
                const double wij = s.wx[i] * s.wy[j];
                const double dpy = s.dpy[j];
                const double tjx = tix + dpy * s.acol[1][0];
                const double tjy = tiy + dpy * s.acol[1][1];
                const double tjz = tiz + dpy * s.acol[1][2];
                double* row = base + static_cast<std::size_t>(i) * si +
                              static_cast<std::size_t>(j) * sj;
                for (int k = 0; k < 3; ++k) {
                    const double w = wij * s.wz[k];
                    const double dpz = s.dpz[k];
                    row[0] += w * (tjx + dpz * s.acol[2][0]);
                    row[1] += w * (tjy + dpz * s.acol[2][1]);
                    row[2] += w * (tjz + dpz * s.acol[2][2]);
                    row[3] += w * s.mvm[3];
                    row += 4;
                }
            }
        }
    }
}

void grid_velocity_scalar(const double* node4, std::size_t node_count, const double g_dt[3],
                          double* vel4) {
    for (std::size_t i = 0; i < node_count; ++i) {
        const double m = node4[i * 4 + 3];
        if (m > 0.0) {
            vel4[i * 4 + 0] = node4[i * 4 + 0] / m + g_dt[0];
            vel4[i * 4 + 1] = node4[i * 4 + 1] / m + g_dt[1];
            vel4[i * 4 + 2] = node4[i * 4 + 2] / m + g_dt[2];
        } else {
            vel4[i * 4 + 0] = 0.0;
            vel4[i * 4 + 1] = 0.0;
            vel4[i * 4 + 2] = 0.0;
        }
        vel4[i * 4 + 3] = 0.0;
    }
}

void g2p_gather_scalar(const double* positions, std::size_t begin, std::size_t end,
                       const double* vel4, int n, double dx, double* out_v, double* out_c) {
    const double inv_dx = 1.0 / dx;
    const double inv_m = 4.0 * inv_dx * inv_dx;  // APIC inertia factor 4/dx^2
    const std::size_t sj = static_cast<std::size_t>(n) * 4;
    const std::size_t si = static_cast<std::size_t>(n) * sj;

    for (std::size_t p = begin; p < end; ++p) {
        const double* xp = positions + p * 3;
        double w[3][3], dpos[3][3];
        std::size_t base_off = 0;
        for (int a = 0; a < 3; ++a) {
            const double q = xp[a] * inv_dx - 0.5;
            const int base = static_cast<int>(q) - (q < static_cast<int>(q) ? 1 : 0);
            const double fx = xp[a] * inv_dx - base;
            w[a][0] = 0.5 * (1.5 - fx) * (1.5 - fx);
            w[a][1] = 0.75 - (fx - 1.0) * (fx - 1.0);
            w[a][2] = 0.5 * (fx - 0.5) * (fx - 0.5);
            dpos[a][0] = (0.0 - fx) * dx;
            dpos[a][1] = (1.0 - fx) * dx;
            dpos[a][2] = (2.0 - fx) * dx;
            base_off += static_cast<std::size_t>(base) * (a == 0 ? si : a == 1 ? sj : 4);
        }

        double vx = 0, vy = 0, vz = 0;
        double c[3][3] = {};  // c[col][component]
        const double* basep = vel4 + base_off;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const double wij = w[0][i] * w[1][j];
                const double* row = basep + static_cast<std::size_t>(i) * si +
                                    static_cast<std::size_t>(j) * sj;
                for (int k = 0; k < 3; ++k) {
                    const double wk = wij * w[2][k];
                    const double gvx = wk * row[0];
                    const double gvy = wk * row[1];
                    const double gvz = wk * row[2];
                    vx += gvx;
                    vy += gvy;
                    vz += gvz;
                    c[0][0] += gvx * dpos[0][i];
                    c[0][1] += gvy * dpos[0][i];
                    c[0][2] += gvz * dpos[0][i];
                    c[1][0] += gvx * dpos[1][j];
                    c[1][1] += gvy * dpos[1][j];
                    c[1][2] += gvz * dpos[1][j];
                    c[2][0] += gvx * dpos[2][k];
                    c[2][1] += gvy * dpos[2][k];
                    c[2][2] += gvz * dpos[2][k];
                    row += 4;
                }
            }
        }
        out_v[p * 3 + 0] = vx;
        out_v[p * 3 + 1] = vy;
        out_v[p * 3 + 2] = vz;
        for (int col = 0; col < 3; ++col) {
            for (int comp = 0; comp < 3; ++comp) {
                out_c[p * 9 + col * 3 + comp] = inv_m * c[col][comp];
            }
        }
    }
}

const KernelTable& scalar_table() {
    static const KernelTable t{&p2g_scatter_scalar, &grid_velocity_scalar, &g2p_gather_scalar,
                               "scalar"};
    return t;
}

}  // namespace gsmpm::kernels
