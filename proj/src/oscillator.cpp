#include "oscimarket/oscillator.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "oscimarket/errors.hpp"
#include "oscimarket/kernels.hpp"

namespace oscimarket::oscillator {

PotentialSpec PotentialSpec::quadratic(double k) {
    if (!(k > 0.0)) throw ConfigError("quadratic potential: k must be positive");
    PotentialSpec p;
    p.kind = Kind::quadratic;
    p.k = k;
    return p;
}

PotentialSpec PotentialSpec::double_well(double v1, double v2, double depth) {
    if (v1 == v2) throw ConfigError("double_well potential: v1 and v2 must differ");
    if (!(depth > 0.0)) throw ConfigError("double_well potential: depth must be positive");
    PotentialSpec p;
    p.kind = Kind::double_well;
    p.v1 = std::min(v1, v2);
    p.v2 = std::max(v1, v2);
    p.depth = depth;
    return p;
}

PotentialSpec PotentialSpec::walled(double k, double wall_position, double wall_height,
                                    double wall_width) {
    if (!(k > 0.0)) throw ConfigError("walled potential: k must be positive");
    if (!(wall_height > 0.0)) throw ConfigError("walled potential: wall_height must be positive");
    if (!(wall_width > 0.0)) throw ConfigError("walled potential: wall_width must be positive");
    PotentialSpec p;
    p.kind = Kind::walled;
    p.k = k;
    p.wall_position = wall_position;
    p.wall_height = wall_height;
    p.wall_width = wall_width;
    return p;
}

double PotentialSpec::value(double x) const {
    switch (kind) {
    case Kind::quadratic:
        return 0.5 * k * x * x;
    case Kind::double_well: {
        const double w = 0.5 * (v2 - v1);
        const double q = (x - v1) * (x - v2);
        return depth * q * q / (w * w * w * w);
    }
    case Kind::walled: {
        const double d = x - wall_position;
        return 0.5 * k * x * x + wall_height * std::exp(-d * d / (2.0 * wall_width * wall_width));
    }
    }
    return 0.0;
}

double PotentialSpec::deriv(double x) const {
    switch (kind) {
    case Kind::quadratic:
        return k * x;
    case Kind::double_well: {
        const double w = 0.5 * (v2 - v1);
        const double scale = 2.0 * depth / (w * w * w * w);
        const double t1 = x - v1;
        const double t2 = x - v2;
        return ((scale * t1) * t2) * (t1 + t2);
    }
    case Kind::walled: {
        const double d = x - wall_position;
        const double w2 = wall_width * wall_width;
        return k * x - wall_height * d / w2 * std::exp(-d * d / (2.0 * w2));
    }
    }
    return 0.0;
}

DampingProfile DampingProfile::linear(double c) {
    DampingProfile f;
    f.c = c;
    return f;
}

DampingProfile DampingProfile::tabulated(std::vector<double> r_grid, std::vector<double> f_values) {
    if (r_grid.size() != f_values.size() || r_grid.size() < 2) {
        throw ConfigError("tabulated damping: need matching grids of length >= 2");
    }
    for (std::size_t i = 1; i < r_grid.size(); ++i) {
        if (!(r_grid[i] > r_grid[i - 1])) {
            throw ConfigError("tabulated damping: r grid must be strictly increasing");
        }
    }
    DampingProfile f;
    f.table_r = std::move(r_grid);
    f.table_f = std::move(f_values);
    return f;
}

double DampingProfile::operator()(double r) const {
    if (is_linear()) return c * r;
    if (r <= table_r.front()) {
        // extrapolate linearly through the origin below the grid
        return table_f.front() * (r / table_r.front());
    }
    if (r >= table_r.back()) return table_f.back();
    const auto it = std::upper_bound(table_r.begin(), table_r.end(), r);
    const std::size_t hi = std::size_t(it - table_r.begin());
    const std::size_t lo = hi - 1;
    const double w = (r - table_r[lo]) / (table_r[hi] - table_r[lo]);
    return table_f[lo] + w * (table_f[hi] - table_f[lo]);
}

DampingProfile DampedOscillatorModel::damping() const {
    return custom_damping ? *custom_damping : DampingProfile::linear(damping_c);
}

void DampedOscillatorModel::validate() const {
    if (damping_c < 0.0) throw ConfigError("DampedOscillatorModel: damping must be >= 0");
    if (sigma < 0.0) throw ConfigError("DampedOscillatorModel: sigma must be >= 0");
}

namespace {

kernels::OscStepParams make_osc_params(const DampedOscillatorModel& m, double dt) {
    kernels::OscStepParams p;
    p.dt = dt;
    p.half_dt = 0.5 * dt;
    p.damp_factor = std::exp(-m.damping_c * dt);
    p.sigma_sqrt_dt = m.sigma * std::sqrt(dt);
    if (m.potential.kind == PotentialSpec::Kind::quadratic) {
        p.form = kernels::PotentialForm::quadratic;
        p.k = m.potential.k;
    } else {
        p.form = kernels::PotentialForm::double_well;
        const double w = 0.5 * (m.potential.v2 - m.potential.v1);
        p.dw_scale = 2.0 * m.potential.depth / (w * w * w * w);
        p.v1 = m.potential.v1;
        p.v2 = m.potential.v2;
    }
    return p;
}

bool kernel_supported(const DampedOscillatorModel& m) {
    return !m.custom_damping && m.potential.kind != PotentialSpec::Kind::walled;
}

// Radial contraction of the phase point over one step: solves dr/dt = -f(r)
// and rescales (x, y). Exact for the linear profile; RK4 otherwise.
void apply_radial_damping(double& x, double& y, const DampingProfile& f, double dt) {
    const double r = std::sqrt(x * x + y * y);
    if (r == 0.0) return;
    double factor;
    if (f.is_linear()) {
        factor = std::exp(-f.c * dt);
    } else {
        auto rate = [&f](double rr) { return -f(rr); };
        const double k1 = rate(r);
        const double k2 = rate(r + 0.5 * dt * k1);
        const double k3 = rate(r + 0.5 * dt * k2);
        const double k4 = rate(r + dt * k3);
        const double r_new = r + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        factor = std::max(r_new, 0.0) / r;
    }
    x *= factor;
    y *= factor;
}

struct RadialScheme {
    bool euler = false;
    double pow_coeff = 1.0;  // 1 cartesian-consistent, 2 paper-literal
    double sigma_eff = 1.0;  // noise amplitude for the convention
};

RadialScheme make_radial_scheme(const DampedOscillatorModel& m, RadialConvention conv,
                                bool euler) {
    RadialScheme s;
    s.euler = euler;
    if (conv == RadialConvention::cartesian_consistent) {
        s.pow_coeff = 1.0;
        s.sigma_eff = m.sigma;
    } else {
        s.pow_coeff = 2.0;
        s.sigma_eff = 1.0;
    }
    return s;
}

// One radial candidate step; mirrors kernels::detail::radial_candidate_lane
// for the linear profile so kernel-rejected lanes refine consistently.
double radial_candidate(const RadialScheme& s, const DampingProfile& f, double r, double dt,
                        double dB) {
    if (s.euler) {
        const double half_growth_rate = 0.5 * s.pow_coeff * s.sigma_eff * s.sigma_eff;
        return r + (half_growth_rate / r - f(r)) * dt + dB;
    }
    const double growth = s.pow_coeff * s.sigma_eff * s.sigma_eff * dt;
    double grown = std::sqrt(r * r + growth);
    if (f.is_linear()) {
        grown *= std::exp(-f.c * dt);
    } else {
        double dummy = 0.0;
        apply_radial_damping(grown, dummy, f, dt);
    }
    return grown + dB;
}

double refine_radial(const RadialScheme& s, const DampingProfile& f, double r, double dt,
                     double dB) {
    double candidate = radial_candidate(s, f, r, dt, dB);
    if (candidate > 0.0 && std::isfinite(candidate)) return candidate;
    for (int level = 1; level <= 10; ++level) {
        const long nsub = 1L << level;
        const double sub_dt = dt / double(nsub);
        const double sub_dB = dB / double(nsub);
        double rr = r;
        bool ok = true;
        for (long j = 0; j < nsub; ++j) {
            rr = radial_candidate(s, f, rr, sub_dt, sub_dB);
            if (!(rr > 0.0) || !std::isfinite(rr)) {
                ok = false;
                break;
            }
        }
        if (ok) return rr;
    }
    throw StepRejectionExhausted("radial step rejected after 10 dt-halvings (r = " +
                                 std::to_string(r) + ")");
}

} // namespace

double radial_step_refined(const DampedOscillatorModel& model, RadialConvention convention,
                           bool euler, double r, double dt, double dB) {
    const RadialScheme s = make_radial_scheme(model, convention, euler);
    const DampingProfile f = model.damping();
    return refine_radial(s, f, r, dt, dB);
}

Trajectory simulate_cartesian(const DampedOscillatorModel& model, double x0, double y0,
                              const IntegratorConfig& cfg, const NoiseStream& noise) {
    model.validate();
    cfg.validate();

    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back({x0, y0});

    double x = x0, y = y0;
    const bool fast = kernel_supported(model);
    const auto params = make_osc_params(model, cfg.dt);
    const auto step_fn = kernels::osc_step();
    const DampingProfile f = model.damping();
    const double sigma_sqrt_dt = model.sigma * std::sqrt(cfg.dt);

    for (long step = 0; step < cfg.steps; ++step) {
        const double xi1 = noise.gaussian(std::uint64_t(step), 0);
        const double xi2 = noise.gaussian(std::uint64_t(step), 1);
        if (fast) {
            step_fn(&x, &y, &xi1, &xi2, 1, params);
        } else {
            y -= 0.5 * cfg.dt * model.potential.deriv(x);
            x += cfg.dt * y;
            y -= 0.5 * cfg.dt * model.potential.deriv(x);
            apply_radial_damping(x, y, f, cfg.dt);
            x += sigma_sqrt_dt * xi1;
            y += sigma_sqrt_dt * xi2;
        }
        if (!std::isfinite(x) || !std::isfinite(y)) {
            throw NumericalFailure("simulate_cartesian: non-finite state at step " +
                                   std::to_string(step));
        }
        if ((step + 1) % cfg.record_stride == 0 || step + 1 == cfg.steps) {
            traj.times.push_back(double(step + 1) * cfg.dt);
            traj.states.push_back({x, y});
        }
    }
    return traj;
}

Trajectory simulate_polar_radial(const DampedOscillatorModel& model, double r0,
                                 const IntegratorConfig& cfg, const NoiseStream& noise,
                                 RadialConvention convention) {
    model.validate();
    cfg.validate();
    if (!(r0 > 0.0)) throw ConfigError("simulate_polar_radial: r0 must be positive");
    if (model.potential.kind != PotentialSpec::Kind::quadratic) {
        throw UnsupportedPotential("simulate_polar_radial: quadratic potential only");
    }

    const bool euler = cfg.method == integrate::Method::euler_maruyama;
    const RadialScheme s = make_radial_scheme(model, convention, euler);
    const DampingProfile f = model.damping();
    const double noise_sqrt_dt = s.sigma_eff * std::sqrt(cfg.dt);

    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back({r0});

    double r = r0;
    for (long step = 0; step < cfg.steps; ++step) {
        const double dB = noise_sqrt_dt * noise.gaussian(std::uint64_t(step), 0);
        r = refine_radial(s, f, r, cfg.dt, dB);
        if ((step + 1) % cfg.record_stride == 0 || step + 1 == cfg.steps) {
            traj.times.push_back(double(step + 1) * cfg.dt);
            traj.states.push_back({r});
        }
    }
    return traj;
}

std::vector<EnergyPoint> energy_series(const Trajectory& traj, const DampedOscillatorModel& model) {
    std::vector<EnergyPoint> out;
    out.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& state = traj.states[i];
        if (state.size() != 2) throw LengthMismatch("energy_series: expected 2D phase states");
        const double u = model.potential.value(state[0]);
        const double kin = 0.5 * state[1] * state[1];
        out.push_back({traj.times[i], u, kin, u + kin});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stationary radial density

namespace {

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                            double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

} // namespace

RadialDensity stationary_radial_density(const DampedOscillatorModel& model,
                                        RadialConvention convention) {
    if (model.potential.kind != PotentialSpec::Kind::quadratic) {
        throw UnsupportedPotential("stationary_radial_density: quadratic potential only");
    }
    const RadialScheme s = make_radial_scheme(model, convention, false);
    const DampingProfile f = model.damping();
    const bool has_damping = f.is_linear() ? f.c > 0.0 : true;
    if (!has_damping || !(s.sigma_eff > 0.0)) {
        throw ConfigError("stationary_radial_density: needs damping > 0 and noise > 0");
    }

    const double pow_coeff = s.pow_coeff;
    const double two_over_s2 = 2.0 / (s.sigma_eff * s.sigma_eff);

    // F(r) = int_0^r f; exponent of the unnormalized density is
    // pow * ln r - (2/s^2) F(r).
    std::function<double(double)> big_f;
    if (f.is_linear()) {
        const double c = f.c;
        big_f = [c](double r) { return 0.5 * c * r * r; };
    } else {
        big_f = [f](double r) {
            return adaptive_simpson([&f](double t) { return f(t); }, 0.0, r, 1e-12);
        };
    }
    auto unnorm = [pow_coeff, two_over_s2, big_f](double r) {
        if (r <= 0.0) return 0.0;
        return std::exp(pow_coeff * std::log(r) - two_over_s2 * big_f(r));
    };

    // Mode: f(r*) r^... -> for linear damping, pow/r = (2/s^2) c r.
    double mode;
    if (f.is_linear()) {
        mode = std::sqrt(pow_coeff / (two_over_s2 * f.c));
    } else {
        // golden-section maximize
        double lo = 1e-8, hi = 1.0;
        while (unnorm(2.0 * hi) > unnorm(hi)) hi *= 2.0;
        hi *= 2.0;
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
        for (int it = 0; it < 200; ++it) {
            if (unnorm(x1) < unnorm(x2)) {
                lo = x1;
                x1 = x2;
                x2 = lo + phi * (hi - lo);
            } else {
                hi = x2;
                x2 = x1;
                x1 = hi - phi * (hi - lo);
            }
        }
        mode = 0.5 * (lo + hi);
    }

    const double peak = unnorm(mode);
    double r_max = std::max(2.0 * mode, 1.0);
    while (unnorm(r_max) > peak * 1e-26) r_max *= 1.5;

    const double z = adaptive_simpson(unnorm, 0.0, r_max, 1e-12 * peak * r_max);
    const double mean =
        adaptive_simpson([&](double r) { return r * unnorm(r); }, 0.0, r_max,
                         1e-12 * peak * r_max) /
        z;

    // Cumulative table for the cdf (per-cell Simpson, then linear interp).
    const int cells = 4096;
    const double h = r_max / cells;
    auto cum = std::make_shared<std::vector<double>>(cells + 1, 0.0);
    for (int i = 0; i < cells; ++i) {
        const double a = i * h, b = (i + 1) * h;
        const double seg = (b - a) / 6.0 * (unnorm(a) + 4.0 * unnorm(0.5 * (a + b)) + unnorm(b));
        (*cum)[i + 1] = (*cum)[i] + seg;
    }
    const double cum_total = cum->back();

    RadialDensity density;
    density.mode = mode;
    density.mean = mean;
    density.r_max = r_max;
    density.pdf = [unnorm, z](double r) { return unnorm(r) / z; };
    density.cdf = [cum, cum_total, h, cells](double r) {
        if (r <= 0.0) return 0.0;
        if (r >= cells * h) return 1.0;
        const double u = r / h;
        const int i = std::min(int(u), cells - 1);
        const double w = u - i;
        return ((*cum)[i] + w * ((*cum)[i + 1] - (*cum)[i])) / cum_total;
    };
    return density;
}

// ---------------------------------------------------------------------------
// Ensemble samplers

namespace {

constexpr long kBlockLanes = 128;

long sample_count(const EnsembleOptions& o) {
    return o.steps > o.burn_in ? (o.steps - o.burn_in) / o.stride : 0;
}

} // namespace

std::vector<double> sample_stationary_radius_cartesian(const DampedOscillatorModel& model,
                                                       const EnsembleOptions& opts) {
    model.validate();
    if (!kernel_supported(model)) {
        throw UnsupportedPotential("ensemble sampler: kernel-supported potentials only");
    }
    const long per_path = sample_count(opts);
    std::vector<double> samples(std::size_t(opts.paths) * per_path);
    const auto params = make_osc_params(model, opts.dt);
    const auto step_fn = kernels::osc_step();

    const long n_blocks = (opts.paths + kBlockLanes - 1) / kBlockLanes;
    integrate::parallel_for_paths(n_blocks, opts.threads, [&](long block) {
        const long base = block * kBlockLanes;
        const long lanes = std::min(kBlockLanes, opts.paths - base);
        std::vector<double> x(lanes, opts.x0), y(lanes, opts.y0);
        std::vector<double> xi1(lanes), xi2(lanes);
        std::vector<NoiseStream> streams;
        streams.reserve(lanes);
        for (long l = 0; l < lanes; ++l) streams.emplace_back(opts.seed, base + l, 2);

        long recorded = 0;
        for (long step = 0; step < opts.steps; ++step) {
            for (long l = 0; l < lanes; ++l) {
                xi1[l] = streams[l].gaussian(std::uint64_t(step), 0);
                xi2[l] = streams[l].gaussian(std::uint64_t(step), 1);
            }
            step_fn(x.data(), y.data(), xi1.data(), xi2.data(), std::size_t(lanes), params);
            const long s = step + 1;
            if (s > opts.burn_in && (s - opts.burn_in) % opts.stride == 0 && recorded < per_path) {
                for (long l = 0; l < lanes; ++l) {
                    samples[std::size_t(base + l) * per_path + recorded] =
                        std::sqrt(x[l] * x[l] + y[l] * y[l]);
                }
                ++recorded;
            }
        }
    });
    return samples;
}

std::vector<double> sample_stationary_radius_polar(const DampedOscillatorModel& model,
                                                   RadialConvention convention,
                                                   const EnsembleOptions& opts) {
    model.validate();
    const DampingProfile f = model.damping();
    if (!f.is_linear()) {
        throw ConfigError("ensemble sampler: linear damping only");
    }
    const RadialScheme scheme = make_radial_scheme(model, convention, false);
    kernels::RadialStepParams params;
    params.dt = opts.dt;
    params.c = f.c;
    params.damp_factor = std::exp(-f.c * opts.dt);
    params.growth = scheme.pow_coeff * scheme.sigma_eff * scheme.sigma_eff * opts.dt;
    params.half_growth_rate = 0.5 * scheme.pow_coeff * scheme.sigma_eff * scheme.sigma_eff;
    params.noise_sqrt_dt = scheme.sigma_eff * std::sqrt(opts.dt);
    params.euler = false;
    const auto step_fn = kernels::radial_step();

    const long per_path = sample_count(opts);
    std::vector<double> samples(std::size_t(opts.paths) * per_path);

    const long n_blocks = (opts.paths + kBlockLanes - 1) / kBlockLanes;
    integrate::parallel_for_paths(n_blocks, opts.threads, [&](long block) {
        const long base = block * kBlockLanes;
        const long lanes = std::min(kBlockLanes, opts.paths - base);
        std::vector<double> r(lanes, opts.r0), xi(lanes);
        std::vector<std::uint8_t> reject(lanes);
        std::vector<NoiseStream> streams;
        streams.reserve(lanes);
        for (long l = 0; l < lanes; ++l) streams.emplace_back(opts.seed, base + l, 1);

        long recorded = 0;
        for (long step = 0; step < opts.steps; ++step) {
            for (long l = 0; l < lanes; ++l) xi[l] = streams[l].gaussian(std::uint64_t(step), 0);
            const std::size_t rejected =
                step_fn(r.data(), xi.data(), reject.data(), std::size_t(lanes), params);
            if (rejected > 0) {
                for (long l = 0; l < lanes; ++l) {
                    if (reject[l]) {
                        r[l] = refine_radial(scheme, f, r[l], opts.dt,
                                             params.noise_sqrt_dt * xi[l]);
                    }
                }
            }
            const long s = step + 1;
            if (s > opts.burn_in && (s - opts.burn_in) % opts.stride == 0 && recorded < per_path) {
                for (long l = 0; l < lanes; ++l) {
                    samples[std::size_t(base + l) * per_path + recorded] = r[l];
                }
                ++recorded;
            }
        }
    });
    return samples;
}

} // namespace oscimarket::oscillator
