// AVX2 variants of the batch kernels, four lanes per register. Each vector
// body performs the same IEEE operation tree as the scalar reference
// (kernels_common.hpp); the tail falls back to the shared per-lane helpers.
// Built with -mavx2 -ffp-contract=off.

#include "kernels_common.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <limits>

namespace oscimarket::kernels {

namespace {

inline __m256d potential_deriv_pd(__m256d x, const OscStepParams& p) {
    if (p.form == PotentialForm::quadratic) {
        return _mm256_mul_pd(_mm256_set1_pd(p.k), x);
    }
    const __m256d t1 = _mm256_sub_pd(x, _mm256_set1_pd(p.v1));
    const __m256d t2 = _mm256_sub_pd(x, _mm256_set1_pd(p.v2));
    const __m256d prod = _mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(p.dw_scale), t1), t2);
    return _mm256_mul_pd(prod, _mm256_add_pd(t1, t2));
}

} // namespace

void osc_step_avx2(double* x, double* y, const double* xi1, const double* xi2,
                   std::size_t n, const OscStepParams& p) {
    const __m256d dt = _mm256_set1_pd(p.dt);
    const __m256d half_dt = _mm256_set1_pd(p.half_dt);
    const __m256d damp = _mm256_set1_pd(p.damp_factor);
    const __m256d noise = _mm256_set1_pd(p.sigma_sqrt_dt);

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d xv = _mm256_loadu_pd(x + i);
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_sub_pd(yv, _mm256_mul_pd(half_dt, potential_deriv_pd(xv, p)));
        xv = _mm256_add_pd(xv, _mm256_mul_pd(dt, yv));
        yv = _mm256_sub_pd(yv, _mm256_mul_pd(half_dt, potential_deriv_pd(xv, p)));
        xv = _mm256_mul_pd(xv, damp);
        yv = _mm256_mul_pd(yv, damp);
        xv = _mm256_add_pd(xv, _mm256_mul_pd(noise, _mm256_loadu_pd(xi1 + i)));
        yv = _mm256_add_pd(yv, _mm256_mul_pd(noise, _mm256_loadu_pd(xi2 + i)));
        _mm256_storeu_pd(x + i, xv);
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) {
        detail::osc_step_lane(x[i], y[i], xi1[i], xi2[i], p);
    }
}

std::size_t radial_step_avx2(double* r, const double* xi, std::uint8_t* reject,
                             std::size_t n, const RadialStepParams& p) {
    const __m256d noise = _mm256_set1_pd(p.noise_sqrt_dt);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t rejected = 0;

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d rv = _mm256_loadu_pd(r + i);
        __m256d cand;
        if (p.euler) {
            const __m256d drift =
                _mm256_sub_pd(_mm256_div_pd(_mm256_set1_pd(p.half_growth_rate), rv),
                              _mm256_mul_pd(_mm256_set1_pd(p.c), rv));
            cand = _mm256_add_pd(rv, _mm256_mul_pd(drift, _mm256_set1_pd(p.dt)));
        } else {
            const __m256d grown =
                _mm256_sqrt_pd(_mm256_add_pd(_mm256_mul_pd(rv, rv), _mm256_set1_pd(p.growth)));
            cand = _mm256_mul_pd(grown, _mm256_set1_pd(p.damp_factor));
        }
        cand = _mm256_add_pd(cand, _mm256_mul_pd(noise, _mm256_loadu_pd(xi + i)));
        // accept lanes with 0 < cand < inf; NaN fails both compares
        const __m256d pos = _mm256_cmp_pd(cand, zero, _CMP_GT_OQ);
        const __m256d fin =
            _mm256_cmp_pd(cand, _mm256_set1_pd(std::numeric_limits<double>::infinity()), _CMP_LT_OQ);
        const __m256d ok = _mm256_and_pd(pos, fin);
        const __m256d out = _mm256_blendv_pd(rv, cand, ok);
        _mm256_storeu_pd(r + i, out);
        const int mask = _mm256_movemask_pd(ok);
        for (int lane = 0; lane < 4; ++lane) {
            const bool accepted = (mask >> lane) & 1;
            reject[i + lane] = accepted ? 0 : 1;
            rejected += accepted ? 0 : 1;
        }
    }
    for (; i < n; ++i) {
        const bool ok = detail::radial_step_lane(r[i], xi[i], p);
        reject[i] = ok ? 0 : 1;
        rejected += ok ? 0 : 1;
    }
    return rejected;
}

} // namespace oscimarket::kernels

#endif // x86_64
