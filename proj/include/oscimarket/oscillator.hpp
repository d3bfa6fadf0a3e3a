#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "oscimarket/integrate.hpp"
#include "oscimarket/rng.hpp"

namespace oscimarket::oscillator {

using integrate::IntegratorConfig;
using integrate::Trajectory;
using sds::Vec;

// Confining potential U(x). Three shapes:
//   quadratic    U = k x^2 / 2
//   double_well  U = depth ((x-v1)(x-v2))^2 / ((v2-v1)/2)^4, minima at v1, v2
//   walled       U = k x^2 / 2 + height exp(-(x-pos)^2 / (2 width^2))
struct PotentialSpec {
    enum class Kind { quadratic, double_well, walled };

    static PotentialSpec quadratic(double k);
    static PotentialSpec double_well(double v1, double v2, double depth);
    static PotentialSpec walled(double k, double wall_position, double wall_height,
                                double wall_width);

    double value(double x) const;
    double deriv(double x) const;

    Kind kind = Kind::quadratic;
    double k = 1.0;
    double v1 = 0.0, v2 = 0.0, depth = 0.0;
    double wall_position = 0.0, wall_height = 0.0, wall_width = 1.0;
};

// Radial damping-speed profile f(r): the damping vector field is
// -(f(r)/r) (x dx + y dy), so dr/dt = -f(r) from damping alone.
// Default is linear, f(r) = c r, which makes the Cartesian damping -c (x,y).
struct DampingProfile {
    static DampingProfile linear(double c);
    static DampingProfile tabulated(std::vector<double> r_grid, std::vector<double> f_values);

    double operator()(double r) const;
    bool is_linear() const { return table_r.empty(); }

    double c = 0.0;
    std::vector<double> table_r, table_f;
};

// Single-asset model: x = mispricing, y = momentum, market energy
// h = U(x) + y^2/2. Drift (y - (f(r)/r) x, -U'(x) - (f(r)/r) y) with
// isotropic additive noise sigma on both coordinates.
struct DampedOscillatorModel {
    PotentialSpec potential = PotentialSpec::quadratic(1.0);
    double damping_c = 0.0;
    double sigma = 0.0;
    std::optional<DampingProfile> custom_damping; // overrides linear c r

    DampingProfile damping() const;
    void validate() const;
};

enum class RadialConvention {
    cartesian_consistent, // dr = (sigma^2/(2r) - f(r)) dt + sigma dB
    paper_literal,        // dr = (1/r - f(r)) dt + dB  (unit noise)
};

// Phase-space trajectory of (x, y). Splitting per step: kick-drift-kick for
// the Hamiltonian part, exact radial contraction for the damping, additive
// noise on both coordinates. cfg.method is ignored (the scheme is fixed);
// quadratic / double-well potentials with linear damping run through the
// dispatched batch kernels.
Trajectory simulate_cartesian(const DampedOscillatorModel& model, double x0, double y0,
                              const IntegratorConfig& cfg, const NoiseStream& noise);

// 1D radial trajectory (quadratic potential only). Default scheme is the
// Lie splitting (exact 1/r-part flow, exact damping, additive noise), which
// is exact for sigma = 0 and has no drift-overshoot bias near r = 0;
// cfg.method = euler_maruyama selects the plain Euler-Maruyama step instead.
// A step landing at r <= 0 is refined into 2^k sub-steps (k <= 10) sharing
// the increment; StepRejectionExhausted if all refinements fail.
Trajectory simulate_polar_radial(const DampedOscillatorModel& model, double r0,
                                 const IntegratorConfig& cfg, const NoiseStream& noise,
                                 RadialConvention convention);

// Stationary density of the radial process, p(r) ~ r^pow exp(-(2/s^2) F(r)),
// F' = f, normalized by quadrature (relative error < 1e-8).
struct RadialDensity {
    std::function<double(double)> pdf;
    std::function<double(double)> cdf;
    double mode = 0.0;
    double mean = 0.0;
    double r_max = 0.0; // effective support bound used for quadrature
};

RadialDensity stationary_radial_density(const DampedOscillatorModel& model,
                                        RadialConvention convention);

struct EnergyPoint {
    double t;
    double potential;
    double kinetic;
    double total;
};

// Per-sample U(x), y^2/2 and their sum for a phase-space trajectory.
std::vector<EnergyPoint> energy_series(const Trajectory& traj, const DampedOscillatorModel& model);

// Ensemble sampling of the stationary radius (post burn-in, strided), for
// histogram / KS comparisons. Paths advance in lock-step through the batch
// kernels; the sample layout is fixed by path index, so results do not
// depend on the thread count.
struct EnsembleOptions {
    long paths = 256;
    long steps = 100000;
    long burn_in = 2000;
    long stride = 40;
    double dt = 1e-3;
    std::uint64_t seed = 0;
    double x0 = 0.7, y0 = 0.0; // cartesian start
    double r0 = 0.7;           // radial start
    int threads = 1;
};

std::vector<double> sample_stationary_radius_cartesian(const DampedOscillatorModel& model,
                                                       const EnsembleOptions& opts);
std::vector<double> sample_stationary_radius_polar(const DampedOscillatorModel& model,
                                                   RadialConvention convention,
                                                   const EnsembleOptions& opts);

// Shared positivity-preserving radial step: candidate via the chosen scheme;
// on r' <= 0 the step reruns as 2^k sub-steps consuming dB/2^k each.
double radial_step_refined(const DampedOscillatorModel& model, RadialConvention convention,
                           bool euler, double r, double dt, double dB);

} // namespace oscimarket::oscillator
