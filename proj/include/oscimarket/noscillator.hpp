#pragma once

#include <span>
#include <string>
#include <vector>

#include "oscimarket/integrate.hpp"
#include "oscimarket/linalg.hpp"

namespace oscimarket::noscillator {

using integrate::IntegratorConfig;
using integrate::Trajectory;
using sds::Vec;

// n-asset market: energy E = 1/2 sum a_i x_i^2 + 1/2 sum b_i xdot_i^2 under
// the holonomic constraint sum x_i = 0. v are relative fair values
// (sum v_i = 1); x_i = R_i - v_i are the mispricings.
struct MarketSpec {
    int n = 0;
    Vec a;
    Vec b;
    Vec v;
    std::vector<std::string> labels;

    // a,b given; v defaults to uniform 1/n, labels to A1..An.
    static MarketSpec from_coefficients(Vec a, Vec b);

    void validate() const;
    // Proper frequencies gamma_i = sqrt(a_i / b_i).
    Vec gammas() const;
};

struct ConstrainedState {
    Vec x;
    Vec xdot;

    // Throws ConstraintViolation unless sum x and sum xdot vanish within
    // 1e-9 * max(1, sum|.|).
    void validate() const;
};

// x = C z maps n-1 modal coordinates onto the constraint plane;
// pseudo_inverse recovers z (and zdot) from constrained states.
struct NormalModeDecomposition {
    linalg::Matrix C;              // n x (n-1), columns sum to zero
    Vec lambdas;                   // ascending mode frequencies
    linalg::Matrix pseudo_inverse; // (n-1) x n, pseudo_inverse * C = I
};

// Constraint-force multiplier: (sum a_i x_i / b_i) / (sum 1 / b_i).
double lagrange_multiplier(const MarketSpec& spec, std::span<const double> x);

// Accelerations xdotdot_i = multiplier / b_i - a_i x_i / b_i; sums to zero.
// Throws ConstraintViolation if |sum x_i| > 1e-6.
Vec equation_rhs(const MarketSpec& spec, const ConstrainedState& state);

// Reduction to n-1 uncoupled oscillators: scale y = sqrt(a) x, reflect the
// constraint direction onto the last axis (Householder), take the top-left
// minor of O diag(1/gamma^2) O^T and diagonalize it with cyclic Jacobi
// rotations. lambdas are 1/sqrt(eigenvalue), ascending; eigencolumns are
// mapped back through the reflection and scaling to assemble C. Columns are
// signed so each column's largest-magnitude entry is positive; repeated
// eigenspaces get a deterministic Gram-Schmidt basis.
NormalModeDecomposition normal_modes(const MarketSpec& spec);

struct InterlacingCheck {
    bool ok = false;
    double max_violation = 0.0;
};

// gamma_1 <= lambda_1 <= gamma_2 <= ... <= lambda_{n-1} <= gamma_n within
// 1e-9 * max(gamma_n, 1).
InterlacingCheck verify_interlacing(std::span<const double> gammas,
                                    std::span<const double> lambdas);

struct Coefficients {
    Vec a;
    Vec b;
};

// Inverse frequency problem for strictly interlacing (gamma, lambda): with
// mu_i = 1/gamma_i^2, nu_j = 1/lambda_j^2, the squared last-row entries of
// the reflector are w_i^2 = prod_j (mu_i - nu_j) / prod_{k != i} (mu_i -
// mu_k), all positive under strict interlacing; then a_i = 1/w_i^2 (scale
// fixed by |w| = 1) and b_i = a_i / gamma_i^2. The forward problem is re-run
// internally; NonReproducible above 1e-6 relative.
Coefficients inverse_from_frequencies(std::span<const double> gammas,
                                      std::span<const double> lambdas);

// Exact solution x(t) = C (z0 cos(lambda t) + (zdot0/lambda) sin(lambda t)).
class ClosedFormSolution {
public:
    ClosedFormSolution(const NormalModeDecomposition& decomp, const ConstrainedState& initial);

    Vec state_at(double t) const;
    Vec velocity_at(double t) const;
    ConstrainedState at(double t) const;

    const Vec& modal_amplitudes() const { return z0_; }
    const Vec& modal_velocities() const { return zdot0_; }

private:
    linalg::Matrix c_;
    Vec lambdas_, z0_, zdot0_;
};

ClosedFormSolution closed_form_solution(const NormalModeDecomposition& decomp,
                                        const ConstrainedState& initial);

struct ComponentEnergies {
    Vec per_component; // E_i = 1/2 a_i x_i^2 + 1/2 b_i xdot_i^2
    double total = 0.0;
};

ComponentEnergies component_energies(const MarketSpec& spec, const ConstrainedState& state);

struct SectorGrouping {
    std::vector<std::vector<int>> groups; // partition of 0..n-1, each sorted
    Vec group_gamma;                      // shared proper frequency per group
    Vec a_hat;                            // harmonic-mean potential coefficient
    Vec b_hat;                            // a_hat / gamma^2
};

// Groups components whose proper frequencies agree within the relative
// tolerance; singletons otherwise.
SectorGrouping detect_sectors(const MarketSpec& spec, double gamma_tolerance = 1e-9);

struct SectorReduction {
    MarketSpec reduced;
    std::vector<int> index_map;   // old component -> new component
    int merged_index = 0;         // position of the merged sector component
};

// Replaces the group by one component with a_hat = 1/sum(1/a_i) and
// b_hat = a_hat / gamma^2 (preserves the sector's proper frequency and the
// synchronous-motion energy). Throws FrequencyMismatch if the group members
// disagree on gamma.
SectorReduction reduce_sector(const MarketSpec& spec, std::span<const int> group);

struct EnergySplit {
    double external = 0.0; // 1/2 a_hat xhat^2 + 1/2 b_hat xhatdot^2
    double internal = 0.0; // sector total minus external; >= 0 (Cauchy-Schwarz)
    double sector_total = 0.0;
};

EnergySplit sector_energy_split(const MarketSpec& spec, std::span<const int> group,
                                const ConstrainedState& state);

// Symplectic trajectory of the constrained system (integrate_second_order
// with the constraint-force accelerations). States are (x | xdot).
Trajectory simulate(const MarketSpec& spec, const ConstrainedState& initial,
                    const IntegratorConfig& cfg);

} // namespace oscimarket::noscillator
