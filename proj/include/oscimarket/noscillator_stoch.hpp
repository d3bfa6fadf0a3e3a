#pragma once

#include <cstdint>
#include <vector>

#include "oscimarket/noscillator.hpp"
#include "oscimarket/oscillator.hpp"

namespace oscimarket::noscillator_stoch {

using integrate::IntegratorConfig;
using noscillator::NormalModeDecomposition;
using oscillator::RadialConvention;
using sds::Vec;

// Per-mode parameters of the stochastic market model: the mode amplitude
// r_j follows the positive radial diffusion, the phase perturbation S_j a
// martingale with volatility phase_sigma / r_j.
struct ModeParams {
    double c = 1.0;           // radial damping coefficient (f(r) = c r)
    double sigma = 1.0;       // radial noise amplitude (cartesian-consistent)
    double r0 = 1.0;          // initial radius, > 0
    double phase_sigma = 1.0; // scale of the phase-noise volatility
};

// x_i(t) = sum_j C_ij r_j(t) sin(lambda_j t + theta_j + S_j(t)).
struct StochasticMarketModel {
    NormalModeDecomposition decomp;
    Vec theta;                    // n-1 initial phases
    std::vector<ModeParams> modes; // n-1 entries
    RadialConvention convention = RadialConvention::cartesian_consistent;

    void validate() const;
    int n_components() const { return decomp.C.rows(); }
    int n_modes() const { return int(decomp.lambdas.size()); }

    // Same mode parameters for every mode; theta drawn uniformly on [0, 2pi)
    // from the master seed.
    static StochasticMarketModel uniform(NormalModeDecomposition decomp, ModeParams params,
                                         RadialConvention convention, std::uint64_t theta_seed);
};

// Plain Euler-Maruyama step of the radial SDE under the chosen convention
// (paper_literal: drift 1/r - c r, unit noise; cartesian_consistent: drift
// sigma^2/(2r) - c r, noise sigma); dB is the realized increment including
// its sqrt(dt) scale. A candidate at r <= 0 is refined into 2^k sub-steps
// (k <= 10) sharing the increment; StepRejectionExhausted if all fail.
double step_radial(const ModeParams& params, RadialConvention convention, double r, double dt,
                   double dB);

// Phase increment (phase_sigma / r) dW.
double step_phase(const ModeParams& params, double r, double dW);

struct MarketTrajectory {
    std::vector<double> times;
    std::vector<Vec> x; // frame-major, n components
    std::vector<Vec> r; // n-1 mode radii per frame
    std::vector<Vec> s; // n-1 phase perturbations per frame
};

// Advances all modes in lock-step (radial splitting scheme by default,
// Euler-Maruyama under cfg.method = euler_maruyama), assembles the component
// mispricings each recorded frame. Mode j of path p draws from the stream
// (seed, p * 2^20 + j); slot 0 is the radial increment, slot 1 the phase one.
MarketTrajectory simulate_market(const StochasticMarketModel& model, const IntegratorConfig& cfg,
                                 std::uint64_t master_seed, std::uint64_t path_index = 0);

} // namespace oscimarket::noscillator_stoch
