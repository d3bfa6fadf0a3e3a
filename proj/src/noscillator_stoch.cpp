#include "oscimarket/noscillator_stoch.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "oscimarket/errors.hpp"

namespace oscimarket::noscillator_stoch {

void StochasticMarketModel::validate() const {
    const int m = n_modes();
    if (m < 1) throw ConfigError("StochasticMarketModel: needs at least one mode");
    if (int(theta.size()) != m) throw LengthMismatch("StochasticMarketModel: theta size mismatch");
    if (int(modes.size()) != m) throw LengthMismatch("StochasticMarketModel: modes size mismatch");
    for (const auto& mode : modes) {
        if (!(mode.r0 > 0.0)) throw ConfigError("StochasticMarketModel: r0 must be positive");
        if (mode.c < 0.0) throw ConfigError("StochasticMarketModel: c must be >= 0");
        if (mode.sigma < 0.0) throw ConfigError("StochasticMarketModel: sigma must be >= 0");
        if (mode.phase_sigma < 0.0) {
            throw ConfigError("StochasticMarketModel: phase_sigma must be >= 0");
        }
    }
    // constraint comes from the decomposition: columns of C sum to zero
    for (int j = 0; j < m; ++j) {
        double col = 0.0;
        for (int i = 0; i < decomp.C.rows(); ++i) col += decomp.C(i, j);
        if (std::abs(col) > 1e-10) {
            throw ConstraintViolation("StochasticMarketModel: column " + std::to_string(j) +
                                      " of C sums to " + std::to_string(col));
        }
    }
}

StochasticMarketModel StochasticMarketModel::uniform(NormalModeDecomposition decomp,
                                                     ModeParams params,
                                                     RadialConvention convention,
                                                     std::uint64_t theta_seed) {
    StochasticMarketModel model;
    const int m = int(decomp.lambdas.size());
    model.decomp = std::move(decomp);
    model.modes.assign(m, params);
    model.convention = convention;
    const NoiseStream stream(theta_seed, 0x7468657461ull, m);
    model.theta.resize(m);
    for (int j = 0; j < m; ++j) {
        model.theta[j] = 2.0 * std::numbers::pi * stream.uniform(0, std::uint32_t(j));
    }
    return model;
}

namespace {

oscillator::DampedOscillatorModel mode_oscillator(const ModeParams& params) {
    oscillator::DampedOscillatorModel m;
    m.damping_c = params.c;
    m.sigma = params.sigma;
    return m;
}

} // namespace

double step_radial(const ModeParams& params, RadialConvention convention, double r, double dt,
                   double dB) {
    if (!(r > 0.0)) throw ConfigError("step_radial: r must be positive");
    return oscillator::radial_step_refined(mode_oscillator(params), convention, /*euler=*/true, r,
                                           dt, dB);
}

double step_phase(const ModeParams& params, double r, double dW) {
    if (!(r > 0.0)) throw ConfigError("step_phase: r must be positive");
    return params.phase_sigma / r * dW;
}

MarketTrajectory simulate_market(const StochasticMarketModel& model, const IntegratorConfig& cfg,
                                 std::uint64_t master_seed, std::uint64_t path_index) {
    model.validate();
    cfg.validate();
    const int n = model.n_components();
    const int m = model.n_modes();
    const bool euler = cfg.method == integrate::Method::euler_maruyama;
    const double sqrt_dt = std::sqrt(cfg.dt);

    std::vector<NoiseStream> streams;
    streams.reserve(m);
    for (int j = 0; j < m; ++j) {
        streams.emplace_back(master_seed, (path_index << 20) + std::uint64_t(j), 2);
    }

    Vec r(m), s(m, 0.0);
    for (int j = 0; j < m; ++j) r[j] = model.modes[j].r0;

    MarketTrajectory traj;
    auto record = [&](double t) {
        Vec x(n, 0.0);
        for (int j = 0; j < m; ++j) {
            const double z = r[j] * std::sin(model.decomp.lambdas[j] * t + model.theta[j] + s[j]);
            for (int i = 0; i < n; ++i) x[i] += model.decomp.C(i, j) * z;
        }
        traj.times.push_back(t);
        traj.x.push_back(std::move(x));
        traj.r.push_back(r);
        traj.s.push_back(s);
    };
    record(0.0);

    for (long step = 0; step < cfg.steps; ++step) {
        for (int j = 0; j < m; ++j) {
            const auto& params = model.modes[j];
            const double noise_scale =
                model.convention == RadialConvention::cartesian_consistent ? params.sigma : 1.0;
            const double dB =
                noise_scale * sqrt_dt * streams[j].gaussian(std::uint64_t(step), 0);
            r[j] = oscillator::radial_step_refined(mode_oscillator(params), model.convention,
                                                   euler, r[j], cfg.dt, dB);
            if (params.phase_sigma != 0.0) {
                const double dW = sqrt_dt * streams[j].gaussian(std::uint64_t(step), 1);
                s[j] += step_phase(params, r[j], dW);
            }
        }
        if ((step + 1) % cfg.record_stride == 0 || step + 1 == cfg.steps) {
            record(double(step + 1) * cfg.dt);
        }
    }
    return traj;
}

} // namespace oscimarket::noscillator_stoch
