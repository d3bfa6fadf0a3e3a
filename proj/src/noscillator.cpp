#include "oscimarket/noscillator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "oscimarket/errors.hpp"

namespace oscimarket::noscillator {

MarketSpec MarketSpec::from_coefficients(Vec a, Vec b) {
    MarketSpec spec;
    spec.n = int(a.size());
    spec.a = std::move(a);
    spec.b = std::move(b);
    spec.v.assign(spec.n, 1.0 / double(spec.n));
    spec.labels.reserve(spec.n);
    for (int i = 0; i < spec.n; ++i) spec.labels.push_back("A" + std::to_string(i + 1));
    spec.validate();
    return spec;
}

void MarketSpec::validate() const {
    if (n < 2) throw ConfigError("MarketSpec: n must be >= 2");
    if (int(a.size()) != n || int(b.size()) != n || int(v.size()) != n || int(labels.size()) != n) {
        throw LengthMismatch("MarketSpec: a, b, v, labels must all have length n");
    }
    for (int i = 0; i < n; ++i) {
        if (!(a[i] > 0.0)) throw ConfigError("MarketSpec: a[" + std::to_string(i) + "] must be > 0");
        if (!(b[i] > 0.0)) throw ConfigError("MarketSpec: b[" + std::to_string(i) + "] must be > 0");
    }
    const double sum_v = std::accumulate(v.begin(), v.end(), 0.0);
    if (std::abs(sum_v - 1.0) > 1e-12) {
        throw ConfigError("MarketSpec: fair values must sum to 1 (got " + std::to_string(sum_v) +
                          ")");
    }
}

Vec MarketSpec::gammas() const {
    Vec g(n);
    for (int i = 0; i < n; ++i) g[i] = std::sqrt(a[i] / b[i]);
    return g;
}

void ConstrainedState::validate() const {
    if (x.size() != xdot.size()) throw LengthMismatch("ConstrainedState: x/xdot size mismatch");
    double sx = 0.0, sx_abs = 0.0, sv = 0.0, sv_abs = 0.0;
    for (double e : x) {
        sx += e;
        sx_abs += std::abs(e);
    }
    for (double e : xdot) {
        sv += e;
        sv_abs += std::abs(e);
    }
    if (std::abs(sx) > 1e-9 * std::max(1.0, sx_abs)) {
        throw ConstraintViolation("ConstrainedState: sum x = " + std::to_string(sx));
    }
    if (std::abs(sv) > 1e-9 * std::max(1.0, sv_abs)) {
        throw ConstraintViolation("ConstrainedState: sum xdot = " + std::to_string(sv));
    }
}

double lagrange_multiplier(const MarketSpec& spec, std::span<const double> x) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < spec.n; ++i) {
        num += spec.a[i] * x[i] / spec.b[i];
        den += 1.0 / spec.b[i];
    }
    return num / den;
}

Vec equation_rhs(const MarketSpec& spec, const ConstrainedState& state) {
    if (int(state.x.size()) != spec.n) throw LengthMismatch("equation_rhs: state size mismatch");
    const double sum_x = std::accumulate(state.x.begin(), state.x.end(), 0.0);
    if (std::abs(sum_x) > 1e-6) {
        throw ConstraintViolation("equation_rhs: sum x = " + std::to_string(sum_x));
    }
    const double multiplier = lagrange_multiplier(spec, state.x);
    Vec accel(spec.n);
    for (int i = 0; i < spec.n; ++i) {
        accel[i] = multiplier / spec.b[i] - spec.a[i] * state.x[i] / spec.b[i];
    }
    return accel;
}

namespace {

// Deterministic basis for (near-)repeated eigenvalues: project coordinate
// vectors onto the eigenspace and Gram-Schmidt them in coordinate order.
void regularize_degenerate_eigenspaces(linalg::Matrix& q, const Vec& lambdas) {
    const int m = int(lambdas.size());
    int start = 0;
    while (start < m) {
        int end = start + 1;
        while (end < m &&
               std::abs(lambdas[end] - lambdas[start]) <= 1e-9 * std::max(1.0, lambdas[start])) {
            ++end;
        }
        const int dim = end - start;
        if (dim > 1) {
            const int n = q.rows();
            // projector columns: P e_j = sum_g q_g (q_g . e_j)
            std::vector<Vec> basis;
            for (int coord = 0; coord < n && int(basis.size()) < dim; ++coord) {
                Vec cand(n, 0.0);
                for (int g = start; g < end; ++g) {
                    const double dot = q(coord, g);
                    for (int i = 0; i < n; ++i) cand[i] += dot * q(i, g);
                }
                for (const auto& prev : basis) {
                    double dot = 0.0;
                    for (int i = 0; i < n; ++i) dot += cand[i] * prev[i];
                    for (int i = 0; i < n; ++i) cand[i] -= dot * prev[i];
                }
                double norm = 0.0;
                for (double e : cand) norm += e * e;
                norm = std::sqrt(norm);
                if (norm > 1e-8) {
                    for (double& e : cand) e /= norm;
                    basis.push_back(std::move(cand));
                }
            }
            for (int g = start; g < end; ++g) {
                for (int i = 0; i < n; ++i) q(i, g) = basis[g - start][i];
            }
        }
        start = end;
    }
}

} // namespace

NormalModeDecomposition normal_modes(const MarketSpec& spec) {
    spec.validate();
    const int n = spec.n;

    Vec alpha(n), sqrt_a(n);
    for (int i = 0; i < n; ++i) {
        sqrt_a[i] = std::sqrt(spec.a[i]);
        alpha[i] = 1.0 / sqrt_a[i];
    }
    const linalg::Matrix o = linalg::householder_to_last_axis(alpha);

    // A = top-left (n-1)x(n-1) minor of O diag(b_i/a_i) O^T
    linalg::Matrix gamma_inv(n, n);
    for (int i = 0; i < n; ++i) gamma_inv(i, i) = spec.b[i] / spec.a[i];
    const linalg::Matrix full = o * gamma_inv * o.transposed();
    linalg::Matrix minor(n - 1, n - 1);
    for (int i = 0; i < n - 1; ++i)
        for (int j = 0; j < n - 1; ++j) minor(i, j) = full(i, j);

    auto eig = linalg::jacobi_eigen(minor);

    // eigenvalues are 1/lambda^2, ascending -> lambdas descending; re-sort.
    const int m = n - 1;
    Vec lambdas(m);
    linalg::Matrix q(m, m);
    for (int j = 0; j < m; ++j) {
        const int src = m - 1 - j;
        if (!(eig.eigenvalues[src] > 0.0)) {
            throw NumericalFailure("normal_modes: nonpositive minor eigenvalue");
        }
        lambdas[j] = 1.0 / std::sqrt(eig.eigenvalues[src]);
        for (int i = 0; i < m; ++i) q(i, j) = eig.eigenvectors(i, src);
    }
    regularize_degenerate_eigenspaces(q, lambdas);

    // C = diag(1/sqrt(a)) O_top^T Q ; pinv = Q^T O_top diag(sqrt(a))
    NormalModeDecomposition decomp;
    decomp.lambdas = lambdas;
    decomp.C = linalg::Matrix(n, m);
    decomp.pseudo_inverse = linalg::Matrix(m, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            double s = 0.0;
            for (int k = 0; k < m; ++k) s += o(k, i) * q(k, j);
            decomp.C(i, j) = s / sqrt_a[i];
        }
    }
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int k = 0; k < m; ++k) s += q(k, j) * o(k, i);
            decomp.pseudo_inverse(j, i) = s * sqrt_a[i];
        }
    }

    // sign convention: largest-magnitude entry of each column of C positive
    for (int j = 0; j < m; ++j) {
        int arg = 0;
        double best = 0.0;
        for (int i = 0; i < n; ++i) {
            if (std::abs(decomp.C(i, j)) > best) {
                best = std::abs(decomp.C(i, j));
                arg = i;
            }
        }
        if (decomp.C(arg, j) < 0.0) {
            for (int i = 0; i < n; ++i) decomp.C(i, j) = -decomp.C(i, j);
            for (int i = 0; i < n; ++i) decomp.pseudo_inverse(j, i) = -decomp.pseudo_inverse(j, i);
        }
    }
    return decomp;
}

InterlacingCheck verify_interlacing(std::span<const double> gammas,
                                    std::span<const double> lambdas) {
    if (gammas.size() != lambdas.size() + 1) {
        throw LengthMismatch("verify_interlacing: need n gammas and n-1 lambdas");
    }
    const double tol = 1e-9 * std::max(gammas.back(), 1.0);
    InterlacingCheck check;
    check.ok = true;
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
        const double low = gammas[j] - lambdas[j];   // gamma_j <= lambda_j
        const double high = lambdas[j] - gammas[j + 1]; // lambda_j <= gamma_{j+1}
        check.max_violation = std::max({check.max_violation, low, high});
    }
    check.max_violation = std::max(check.max_violation, 0.0);
    check.ok = check.max_violation <= tol;
    return check;
}

Coefficients inverse_from_frequencies(std::span<const double> gammas,
                                      std::span<const double> lambdas) {
    const int n = int(gammas.size());
    if (int(lambdas.size()) != n - 1) {
        throw LengthMismatch("inverse_from_frequencies: need n gammas and n-1 lambdas");
    }
    for (int i = 0; i + 1 < n; ++i) {
        if (!(gammas[i] < lambdas[i] && lambdas[i] < gammas[i + 1])) {
            throw InterlacingViolation("inverse_from_frequencies: strict interlacing required at " +
                                       std::to_string(i));
        }
    }

    Vec mu(n), nu(n - 1);
    for (int i = 0; i < n; ++i) mu[i] = 1.0 / (gammas[i] * gammas[i]);
    for (int j = 0; j < n - 1; ++j) nu[j] = 1.0 / (lambdas[j] * lambdas[j]);

    Vec w2(n);
    double w2_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        double num = 1.0, den = 1.0;
        for (int j = 0; j < n - 1; ++j) num *= mu[i] - nu[j];
        for (int k = 0; k < n; ++k) {
            if (k != i) den *= mu[i] - mu[k];
        }
        w2[i] = num / den;
        if (!(w2[i] > 0.0)) {
            throw NumericalFailure("inverse_from_frequencies: nonpositive weight");
        }
        w2_sum += w2[i];
    }

    Coefficients coeff;
    coeff.a.resize(n);
    coeff.b.resize(n);
    for (int i = 0; i < n; ++i) {
        coeff.a[i] = w2_sum / w2[i]; // |w| = 1 normalization
        coeff.b[i] = coeff.a[i] / (gammas[i] * gammas[i]);
    }

    // round trip against the forward problem
    const auto decomp = normal_modes(MarketSpec::from_coefficients(coeff.a, coeff.b));
    double worst = 0.0;
    for (int j = 0; j < n - 1; ++j) {
        worst = std::max(worst, std::abs(decomp.lambdas[j] - lambdas[j]) / lambdas[j]);
    }
    if (worst > 1e-6) {
        throw NonReproducible("inverse_from_frequencies: round trip off by " +
                              std::to_string(worst));
    }
    return coeff;
}

ClosedFormSolution::ClosedFormSolution(const NormalModeDecomposition& decomp,
                                       const ConstrainedState& initial)
    : c_(decomp.C), lambdas_(decomp.lambdas) {
    initial.validate();
    if (int(initial.x.size()) != decomp.C.rows()) {
        throw LengthMismatch("closed_form_solution: state dimension mismatch");
    }
    z0_ = linalg::mat_vec(decomp.pseudo_inverse, initial.x);
    zdot0_ = linalg::mat_vec(decomp.pseudo_inverse, initial.xdot);
}

Vec ClosedFormSolution::state_at(double t) const {
    const int m = int(lambdas_.size());
    Vec z(m);
    for (int j = 0; j < m; ++j) {
        z[j] = z0_[j] * std::cos(lambdas_[j] * t) +
               zdot0_[j] / lambdas_[j] * std::sin(lambdas_[j] * t);
    }
    return linalg::mat_vec(c_, z);
}

Vec ClosedFormSolution::velocity_at(double t) const {
    const int m = int(lambdas_.size());
    Vec zdot(m);
    for (int j = 0; j < m; ++j) {
        zdot[j] = -z0_[j] * lambdas_[j] * std::sin(lambdas_[j] * t) +
                  zdot0_[j] * std::cos(lambdas_[j] * t);
    }
    return linalg::mat_vec(c_, zdot);
}

ConstrainedState ClosedFormSolution::at(double t) const {
    return ConstrainedState{state_at(t), velocity_at(t)};
}

ClosedFormSolution closed_form_solution(const NormalModeDecomposition& decomp,
                                        const ConstrainedState& initial) {
    return ClosedFormSolution(decomp, initial);
}

ComponentEnergies component_energies(const MarketSpec& spec, const ConstrainedState& state) {
    if (int(state.x.size()) != spec.n) {
        throw LengthMismatch("component_energies: state size mismatch");
    }
    ComponentEnergies energies;
    energies.per_component.resize(spec.n);
    for (int i = 0; i < spec.n; ++i) {
        energies.per_component[i] =
            0.5 * spec.a[i] * state.x[i] * state.x[i] + 0.5 * spec.b[i] * state.xdot[i] * state.xdot[i];
        energies.total += energies.per_component[i];
    }
    return energies;
}

SectorGrouping detect_sectors(const MarketSpec& spec, double gamma_tolerance) {
    spec.validate();
    const Vec g = spec.gammas();
    std::vector<int> order(spec.n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return g[i] < g[j]; });

    SectorGrouping grouping;
    std::size_t start = 0;
    while (start < order.size()) {
        std::size_t end = start + 1;
        const double base = g[order[start]];
        while (end < order.size() && std::abs(g[order[end]] - base) <= gamma_tolerance * base) {
            ++end;
        }
        std::vector<int> group(order.begin() + start, order.begin() + end);
        std::sort(group.begin(), group.end());
        double inv_a = 0.0;
        for (int i : group) inv_a += 1.0 / spec.a[i];
        const double a_hat = 1.0 / inv_a;
        grouping.groups.push_back(std::move(group));
        grouping.group_gamma.push_back(base);
        grouping.a_hat.push_back(a_hat);
        grouping.b_hat.push_back(a_hat / (base * base));
        start = end;
    }
    return grouping;
}

SectorReduction reduce_sector(const MarketSpec& spec, std::span<const int> group) {
    spec.validate();
    if (group.empty()) throw ConfigError("reduce_sector: empty group");
    const Vec g = spec.gammas();
    const double gamma = g[group.front()];
    for (int i : group) {
        if (std::abs(g[i] - gamma) > 1e-9 * std::max(gamma, 1.0)) {
            throw FrequencyMismatch("reduce_sector: component " + std::to_string(i) +
                                    " has gamma " + std::to_string(g[i]) + " != " +
                                    std::to_string(gamma));
        }
    }

    std::vector<bool> in_group(spec.n, false);
    for (int i : group) in_group[i] = true;
    const int merged_at = *std::min_element(group.begin(), group.end());

    SectorReduction reduction;
    reduction.index_map.assign(spec.n, -1);
    MarketSpec& out = reduction.reduced;
    out.n = spec.n - int(group.size()) + 1;

    double inv_a = 0.0, v_sum = 0.0;
    std::string merged_label;
    for (int i : group) {
        inv_a += 1.0 / spec.a[i];
        v_sum += spec.v[i];
        if (!merged_label.empty()) merged_label += "+";
        merged_label += spec.labels[i];
    }
    const double a_hat = 1.0 / inv_a;

    int next = 0;
    for (int i = 0; i < spec.n; ++i) {
        if (in_group[i]) {
            if (i == merged_at) {
                reduction.merged_index = next;
                out.a.push_back(a_hat);
                out.b.push_back(a_hat / (gamma * gamma));
                out.v.push_back(v_sum);
                out.labels.push_back(merged_label);
                ++next;
            }
            reduction.index_map[i] = reduction.merged_index;
        } else {
            out.a.push_back(spec.a[i]);
            out.b.push_back(spec.b[i]);
            out.v.push_back(spec.v[i]);
            out.labels.push_back(spec.labels[i]);
            reduction.index_map[i] = next;
            ++next;
        }
    }
    // groups of one keep their index map but must round-trip exactly
    if (int(group.size()) == 1) {
        const int i = group.front();
        out.a[reduction.index_map[i]] = spec.a[i];
        out.b[reduction.index_map[i]] = spec.b[i];
    }
    out.validate();
    return reduction;
}

EnergySplit sector_energy_split(const MarketSpec& spec, std::span<const int> group,
                                const ConstrainedState& state) {
    if (group.empty()) throw ConfigError("sector_energy_split: empty group");
    const Vec g = spec.gammas();
    const double gamma = g[group.front()];

    double inv_a = 0.0, xhat = 0.0, xhat_dot = 0.0, sector = 0.0;
    for (int i : group) {
        inv_a += 1.0 / spec.a[i];
        xhat += state.x[i];
        xhat_dot += state.xdot[i];
        sector += 0.5 * spec.a[i] * state.x[i] * state.x[i] +
                  0.5 * spec.b[i] * state.xdot[i] * state.xdot[i];
    }
    const double a_hat = 1.0 / inv_a;
    const double b_hat = a_hat / (gamma * gamma);

    EnergySplit split;
    split.sector_total = sector;
    split.external = 0.5 * a_hat * xhat * xhat + 0.5 * b_hat * xhat_dot * xhat_dot;
    split.internal = sector - split.external;
    if (split.internal < -1e-12) {
        throw NumericalFailure("sector_energy_split: negative internal energy " +
                               std::to_string(split.internal));
    }
    return split;
}

Trajectory simulate(const MarketSpec& spec, const ConstrainedState& initial,
                    const IntegratorConfig& cfg) {
    spec.validate();
    initial.validate();
    integrate::ForceFn force = [&spec](std::span<const double> x, std::span<const double>,
                                       std::span<double> out) {
        double num = 0.0, den = 0.0;
        for (int i = 0; i < spec.n; ++i) {
            num += spec.a[i] * x[i] / spec.b[i];
            den += 1.0 / spec.b[i];
        }
        const double multiplier = num / den;
        for (int i = 0; i < spec.n; ++i) {
            out[i] = multiplier / spec.b[i] - spec.a[i] * x[i] / spec.b[i];
        }
    };
    const NoiseStream unused(0, 0, spec.n);
    return integrate::integrate_second_order(force, integrate::DampingMap::none(), 0.0, initial.x,
                                             initial.xdot, cfg, unused);
}

} // namespace oscimarket::noscillator
