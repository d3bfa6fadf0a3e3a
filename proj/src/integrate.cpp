#include "oscimarket/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>

#include "oscimarket/errors.hpp"

namespace oscimarket::integrate {

namespace {

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

[[noreturn]] void fail_at_step(long step) {
    throw NumericalFailure("non-finite state at step " + std::to_string(step));
}

} // namespace

void IntegratorConfig::validate() const {
    if (!(dt > 0.0)) throw ConfigError("IntegratorConfig: dt must be positive");
    if (steps < 1) throw ConfigError("IntegratorConfig: steps must be >= 1");
    if (record_stride < 1) throw ConfigError("IntegratorConfig: record_stride must be >= 1");
}

Trajectory integrate_sde(const sds::VectorFieldSet& fields, const Vec& x0,
                         const IntegratorConfig& cfg, const NoiseStream& noise) {
    cfg.validate();
    const int d = fields.dimension;
    const int k = fields.noise_dimension();
    if (int(x0.size()) != d) throw LengthMismatch("integrate_sde: x0 dimension mismatch");
    if (cfg.method == Method::hamiltonian_splitting) {
        throw ConfigError("integrate_sde: hamiltonian_splitting is for second-order systems");
    }
    if (cfg.method == Method::euler_maruyama && k > 0 && !fields.additive) {
        throw ConfigError(
            "integrate_sde: stratonovich_heun required for state-dependent diffusion fields");
    }

    Trajectory traj;
    traj.times.reserve(std::size_t(cfg.steps / cfg.record_stride) + 2);
    traj.states.reserve(std::size_t(cfg.steps / cfg.record_stride) + 2);
    traj.times.push_back(0.0);
    traj.states.push_back(x0);

    Vec x = x0, drift(d), column(d), predictor(d), drift2(d), column2(d);
    Vec increments(std::max(k, 1));
    const double sqrt_dt = std::sqrt(cfg.dt);

    for (long step = 0; step < cfg.steps; ++step) {
        if (k > 0) {
            noise.fill_gaussian(std::uint64_t(step), std::span(increments.data(), std::size_t(k)));
        }
        if (cfg.method == Method::euler_maruyama) {
            fields.drift(x, drift);
            for (int i = 0; i < d; ++i) x[i] += cfg.dt * drift[i];
            for (int j = 0; j < k; ++j) {
                fields.diffusion_fields[j](x, column);
                const double db = sqrt_dt * increments[j];
                for (int i = 0; i < d; ++i) x[i] += column[i] * db;
            }
        } else {
            // Heun predictor-corrector (Stratonovich).
            fields.drift(x, drift);
            predictor = x;
            for (int i = 0; i < d; ++i) predictor[i] += cfg.dt * drift[i];
            for (int j = 0; j < k; ++j) {
                fields.diffusion_fields[j](x, column);
                const double db = sqrt_dt * increments[j];
                for (int i = 0; i < d; ++i) predictor[i] += column[i] * db;
            }
            fields.drift(predictor, drift2);
            Vec next = x;
            for (int i = 0; i < d; ++i) next[i] += 0.5 * cfg.dt * (drift[i] + drift2[i]);
            for (int j = 0; j < k; ++j) {
                fields.diffusion_fields[j](x, column);
                fields.diffusion_fields[j](predictor, column2);
                const double db = 0.5 * sqrt_dt * increments[j];
                for (int i = 0; i < d; ++i) next[i] += (column[i] + column2[i]) * db;
            }
            x = std::move(next);
        }
        if (!all_finite(x)) fail_at_step(step);
        if ((step + 1) % cfg.record_stride == 0 || step + 1 == cfg.steps) {
            traj.times.push_back(double(step + 1) * cfg.dt);
            traj.states.push_back(x);
        }
    }
    return traj;
}

DampingMap DampingMap::none() {
    return DampingMap{[](std::span<double>, std::span<double>, double) {}};
}

DampingMap DampingMap::momentum(double c) {
    return DampingMap{[c](std::span<double>, std::span<double> p, double dt) {
        const double factor = std::exp(-c * dt);
        for (double& v : p) v *= factor;
    }};
}

Trajectory integrate_second_order(const ForceFn& force, const DampingMap& damping,
                                  double noise_amplitude, const Vec& x0, const Vec& p0,
                                  const IntegratorConfig& cfg, const NoiseStream& noise) {
    cfg.validate();
    if (x0.size() != p0.size()) throw LengthMismatch("integrate_second_order: x0/p0 size mismatch");
    const int n = int(x0.size());

    Trajectory traj;
    Vec x = x0, p = p0, accel(n), increments(n);
    const double sqrt_dt = std::sqrt(cfg.dt);

    auto record = [&](double t) {
        Vec state(2 * std::size_t(n));
        std::copy(x.begin(), x.end(), state.begin());
        std::copy(p.begin(), p.end(), state.begin() + n);
        traj.times.push_back(t);
        traj.states.push_back(std::move(state));
    };
    record(0.0);

    for (long step = 0; step < cfg.steps; ++step) {
        // kick-drift-kick, then the exact damping map, then noise
        force(x, p, accel);
        for (int i = 0; i < n; ++i) p[i] += 0.5 * cfg.dt * accel[i];
        for (int i = 0; i < n; ++i) x[i] += cfg.dt * p[i];
        force(x, p, accel);
        for (int i = 0; i < n; ++i) p[i] += 0.5 * cfg.dt * accel[i];
        if (damping.apply) damping.apply(x, p, cfg.dt);
        if (noise_amplitude != 0.0) {
            noise.fill_gaussian(std::uint64_t(step), increments);
            for (int i = 0; i < n; ++i) p[i] += noise_amplitude * sqrt_dt * increments[i];
        }
        if (!all_finite(x) || !all_finite(p)) fail_at_step(step);
        if ((step + 1) % cfg.record_stride == 0 || step + 1 == cfg.steps) {
            record(double(step + 1) * cfg.dt);
        }
    }
    return traj;
}

int resolve_thread_count(int requested) {
    int threads = requested > 0 ? requested : 1;
    if (const char* env = std::getenv("OSCIMARKET_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) threads = std::min(threads, cap);
    }
    const int hw = int(std::thread::hardware_concurrency());
    if (hw > 0) threads = std::min(threads, hw);
    return std::max(threads, 1);
}

void parallel_for_paths(long n_paths, int threads, const std::function<void(long)>& fn) {
    threads = std::min<long>(std::max(threads, 1), std::max<long>(n_paths, 1));
    if (threads <= 1) {
        for (long p = 0; p < n_paths; ++p) fn(p);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (long p = t; p < n_paths; p += threads) fn(p);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace oscimarket::integrate
