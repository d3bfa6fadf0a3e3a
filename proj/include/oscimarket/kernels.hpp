#pragma once

#include <cstddef>
#include <cstdint>

namespace oscimarket::kernels {

// Batch steppers for ensemble simulation: one lane per path, SoA layout.
// The scalar kernels are the reference semantics; the AVX2 kernels perform
// the same IEEE operation tree per lane (both TUs build with
// -ffp-contract=off), so results are bit-identical and equivalence-tested.

enum class PotentialForm : int {
    quadratic = 0,   // U'(x) = k x
    double_well = 1, // U'(x) = dw_scale * (x-v1)*(x-v2)*((x-v1)+(x-v2))
};

// One damped-oscillator phase-space step for every lane:
//   half-kick  y -= dt/2 U'(x)
//   drift      x += dt y
//   half-kick  y -= dt/2 U'(x)
//   damping    x *= damp_factor, y *= damp_factor   (damp_factor = e^{-c dt})
//   noise      x += sigma_sqrt_dt xi1, y += sigma_sqrt_dt xi2
struct OscStepParams {
    double dt = 0.0;
    double half_dt = 0.0;
    double damp_factor = 1.0;
    double sigma_sqrt_dt = 0.0;
    PotentialForm form = PotentialForm::quadratic;
    double k = 1.0;        // quadratic stiffness
    double dw_scale = 0.0; // 2*depth/((v2-v1)/2)^4
    double v1 = 0.0;
    double v2 = 0.0;
};

void osc_step_scalar(double* x, double* y, const double* xi1, const double* xi2,
                     std::size_t n, const OscStepParams& p);

// One radial-SDE step candidate for every lane. Two schemes:
//   splitting: r' = sqrt(r^2 + pow_coeff*sigma_eff^2*dt) * damp_factor + dB
//   euler:     r' = r + (0.5*pow_coeff*sigma_eff^2/r - c*r)*dt + dB
// with dB = noise_sqrt_dt * xi. pow_coeff is 1 (cartesian-consistent) or
// 2 (paper-literal). Lanes whose candidate is <= 0 or non-finite keep their
// old value and get reject[i] = 1; the caller refines those (see
// radial_refine_step). Returns the number of rejected lanes.
struct RadialStepParams {
    double dt = 0.0;
    double c = 0.0;            // linear damping coefficient
    double damp_factor = 1.0;  // e^{-c dt} (splitting scheme)
    double growth = 0.0;       // pow_coeff * sigma_eff^2 * dt (splitting scheme)
    double half_growth_rate = 0.0; // 0.5 * pow_coeff * sigma_eff^2 (euler drift numerator)
    double noise_sqrt_dt = 0.0;
    bool euler = false;
};

std::size_t radial_step_scalar(double* r, const double* xi, std::uint8_t* reject,
                               std::size_t n, const RadialStepParams& p);

#if defined(__x86_64__) || defined(_M_X64)
#define OSCIMARKET_HAVE_AVX2_BUILD 1
void osc_step_avx2(double* x, double* y, const double* xi1, const double* xi2,
                   std::size_t n, const OscStepParams& p);
std::size_t radial_step_avx2(double* r, const double* xi, std::uint8_t* reject,
                             std::size_t n, const RadialStepParams& p);
#endif

enum class Isa { scalar, avx2 };

// Active instruction set: cpuid probe, overridable with
// OSCIMARKET_SIMD=scalar|avx2|auto (resolved once per process).
Isa active_isa();
const char* isa_name(Isa isa);
bool avx2_supported();

using OscStepFn = void (*)(double*, double*, const double*, const double*, std::size_t,
                           const OscStepParams&);
using RadialStepFn = std::size_t (*)(double*, const double*, std::uint8_t*, std::size_t,
                                     const RadialStepParams&);

OscStepFn osc_step();
RadialStepFn radial_step();

} // namespace oscimarket::kernels
