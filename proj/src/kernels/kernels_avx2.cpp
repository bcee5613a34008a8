// AVX2/FMA variants of the transfer kernels. One grid node is one 4-wide
// double vector ([mv_x, mv_y, mv_z, m] or [v_x, v_y, v_z, 0]), so the scatter
// and gather inner loops become a handful of fused multiply-adds per node.
// This translation unit is compiled with -mavx2 -mfma and only reached after
// a runtime CPU check.

#include "gsmpm/kernels.hpp"

#if defined(GSMPM_HAVE_AVX2)

#include <immintrin.h>

namespace gsmpm::kernels {

void p2g_scatter_avx2(const P2GScratch* particles, const std::uint32_t* order, std::size_t count,
                      int n, double* node4) {
    const std::size_t sj = static_cast<std::size_t>(n) * 4;
    const std::size_t si = static_cast<std::size_t>(n) * sj;

    for (std::size_t o = 0; o < count; ++o) {
        const P2GScratch& s = particles[order[o]];
        const __m256d mvm = _mm256_loadu_pd(s.mvm);
        const __m256d a0 = _mm256_loadu_pd(s.acol[0]);
        const __m256d a1 = _mm256_loadu_pd(s.acol[1]);
        const __m256d a2 = _mm256_loadu_pd(s.acol[2]);
        double* base = node4 + static_cast<std::size_t>(s.base[0]) * si +
                       static_cast<std::size_t>(s.base[1]) * sj +
                       static_cast<std::size_t>(s.base[2]) * 4;
        for (int i = 0; i < 3; ++i) {
            const __m256d ti = _mm256_fmadd_pd(_mm256_set1_pd(s.dpx[i]), a0, mvm);
            for (int j = 0; j < 3; ++j) {
                const double wij = s.wx[i] * s.wy[j];
                const __m256d tj = _mm256_fmadd_pd(_mm256_set1_pd(s.dpy[j]), a1, ti);
                double* row = base + static_cast<std::size_t>(i) * si +
                              static_cast<std::size_t>(j) * sj;
                for (int k = 0; k < 3; ++k) {
                    const __m256d w = _mm256_set1_pd(wij * s.wz[k]);
                    const __m256d val = _mm256_fmadd_pd(_mm256_set1_pd(s.dpz[k]), a2, tj);
                    const __m256d acc =
                        _mm256_fmadd_pd(w, val, _mm256_loadu_pd(row));
                    _mm256_storeu_pd(row, acc);
                    row += 4;
                }
            }
        }
    }
}

void grid_velocity_avx2(const double* node4, std::size_t node_count, const double g_dt[3],
                        double* vel4) {
    const __m256d gdt = _mm256_set_pd(0.0, g_dt[2], g_dt[1], g_dt[0]);
    const __m256d lane_mask =
        _mm256_castsi256_pd(_mm256_set_epi64x(0, -1, -1, -1));  // zero lane 3
    const __m256d zero = _mm256_setzero_pd();
    for (std::size_t i = 0; i < node_count; ++i) {
        const __m256d node = _mm256_loadu_pd(node4 + i * 4);
        const double m = node4[i * 4 + 3];
        __m256d v = zero;
        if (m > 0.0) {
            v = _mm256_div_pd(node, _mm256_set1_pd(m));
            v = _mm256_add_pd(v, gdt);
            v = _mm256_and_pd(v, lane_mask);
        }
        _mm256_storeu_pd(vel4 + i * 4, v);
    }
}

void g2p_gather_avx2(const double* positions, std::size_t begin, std::size_t end,
                     const double* vel4, int n, double dx, double* out_v, double* out_c) {
    const double inv_dx = 1.0 / dx;
    const double inv_m = 4.0 * inv_dx * inv_dx;
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

        __m256d v = _mm256_setzero_pd();
        __m256d c0 = _mm256_setzero_pd();
        __m256d c1 = _mm256_setzero_pd();
        __m256d c2 = _mm256_setzero_pd();
        const double* basep = vel4 + base_off;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const double wij = w[0][i] * w[1][j];
                const __m256d dpx = _mm256_set1_pd(dpos[0][i]);
                const __m256d dpy = _mm256_set1_pd(dpos[1][j]);
                const double* row = basep + static_cast<std::size_t>(i) * si +
                                    static_cast<std::size_t>(j) * sj;
                for (int k = 0; k < 3; ++k) {
                    const __m256d wv =
                        _mm256_mul_pd(_mm256_set1_pd(wij * w[2][k]), _mm256_loadu_pd(row));
                    v = _mm256_add_pd(v, wv);
                    c0 = _mm256_fmadd_pd(wv, dpx, c0);
                    c1 = _mm256_fmadd_pd(wv, dpy, c1);
                    c2 = _mm256_fmadd_pd(wv, _mm256_set1_pd(dpos[2][k]), c2);
                    row += 4;
                }
            }
        }

        alignas(32) double tmp[4];
        _mm256_store_pd(tmp, v);
        out_v[p * 3 + 0] = tmp[0];
        out_v[p * 3 + 1] = tmp[1];
        out_v[p * 3 + 2] = tmp[2];
        const __m256d scale = _mm256_set1_pd(inv_m);
        _mm256_store_pd(tmp, _mm256_mul_pd(c0, scale));
        out_c[p * 9 + 0] = tmp[0];
        out_c[p * 9 + 1] = tmp[1];
        out_c[p * 9 + 2] = tmp[2];
        _mm256_store_pd(tmp, _mm256_mul_pd(c1, scale));
        out_c[p * 9 + 3] = tmp[0];
        out_c[p * 9 + 4] = tmp[1];
        out_c[p * 9 + 5] = tmp[2];
        _mm256_store_pd(tmp, _mm256_mul_pd(c2, scale));
        out_c[p * 9 + 6] = tmp[0];
        out_c[p * 9 + 7] = tmp[1];
        out_c[p * 9 + 8] = tmp[2];
    }
}

const KernelTable* avx2_table_impl() {
    static const KernelTable t{&p2g_scatter_avx2, &grid_velocity_avx2, &g2p_gather_avx2, "avx2"};
    return &t;
}

}  // namespace gsmpm::kernels

#else  // !GSMPM_HAVE_AVX2

namespace gsmpm::kernels {

const KernelTable* avx2_table_impl() { return nullptr; }

}  // namespace gsmpm::kernels

#endif
