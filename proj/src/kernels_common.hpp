#pragma once

#include <cmath>

#include "oscimarket/kernels.hpp"

// Per-lane reference operations shared by the scalar kernels and the AVX2
// remainder loops. The AVX2 vector bodies mirror these expression trees
// operation for operation; keep them in sync.

namespace oscimarket::kernels::detail {

inline double potential_deriv(double x, const OscStepParams& p) {
    if (p.form == PotentialForm::quadratic) return p.k * x;
    const double t1 = x - p.v1;
    const double t2 = x - p.v2;
    return ((p.dw_scale * t1) * t2) * (t1 + t2);
}

inline void osc_step_lane(double& x, double& y, double xi1, double xi2,
                          const OscStepParams& p) {
    y -= p.half_dt * potential_deriv(x, p);
    x += p.dt * y;
    y -= p.half_dt * potential_deriv(x, p);
    x *= p.damp_factor;
    y *= p.damp_factor;
    x += p.sigma_sqrt_dt * xi1;
    y += p.sigma_sqrt_dt * xi2;
}

inline double radial_candidate_lane(double r, double xi, const RadialStepParams& p) {
    if (p.euler) {
        return r + (p.half_growth_rate / r - p.c * r) * p.dt + p.noise_sqrt_dt * xi;
    }
    return std::sqrt(r * r + p.growth) * p.damp_factor + p.noise_sqrt_dt * xi;
}

inline bool radial_step_lane(double& r, double xi, const RadialStepParams& p) {
    const double candidate = radial_candidate_lane(r, xi, p);
    if (candidate > 0.0 && std::isfinite(candidate)) {
        r = candidate;
        return true;
    }
    return false;
}

} // namespace oscimarket::kernels::detail
