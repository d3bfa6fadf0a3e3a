#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "oscimarket/fields.hpp"
#include "oscimarket/rng.hpp"

namespace oscimarket::integrate {

using sds::Vec;

enum class Method {
    euler_maruyama,
    stratonovich_heun,
    hamiltonian_splitting,
};

// Fixed time step only: reproducibility and clean convergence analysis beat
// adaptive stepping for this workload.
struct IntegratorConfig {
    double dt = 1e-3;
    long steps = 1000;
    Method method = Method::stratonovich_heun;
    long record_stride = 1; // record every k-th step (initial state always kept)

    void validate() const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    // Optional per-sample energy records (potential, kinetic, total); filled
    // by callers that track energies, empty otherwise.
    std::vector<std::array<double, 3>> energies;

    std::size_t size() const { return times.size(); }
    const Vec& back_state() const { return states.back(); }
};

// Integrates dx = X_0 dt + sum_i X_i o dB_i. Heun (predictor-corrector)
// targets the Stratonovich solution and is required for state-dependent
// diffusion fields; Euler-Maruyama is accepted for additive noise, where the
// two interpretations coincide.
Trajectory integrate_sde(const sds::VectorFieldSet& fields, const Vec& x0,
                         const IntegratorConfig& cfg, const NoiseStream& noise);

// Acceleration callback for second-order systems: out = F(x, p).
using ForceFn = std::function<void(std::span<const double> x, std::span<const double> p,
                                   std::span<double> out)>;

// Exact per-step damping map applied after the symplectic substeps.
struct DampingMap {
    std::function<void(std::span<double> x, std::span<double> p, double dt)> apply;

    static DampingMap none();
    // p <- p * exp(-c dt)
    static DampingMap momentum(double c);
};

// Strang-type splitting per step: half-kick, drift, half-kick, exact damping
// map, then additive noise on the momenta. States are stored as (x | p)
// concatenated, dimension 2n.
Trajectory integrate_second_order(const ForceFn& force, const DampingMap& damping,
                                  double noise_amplitude, const Vec& x0, const Vec& p0,
                                  const IntegratorConfig& cfg, const NoiseStream& noise);

// Runs fn(path_index) for path_index in [0, n_paths) over `threads` workers.
// Paths are statically partitioned, so results that are written to
// per-path slots are independent of scheduling.
void parallel_for_paths(long n_paths, int threads, const std::function<void(long)>& fn);

// Worker count: OSCIMARKET_THREADS caps the requested value; 0 = leave as is.
int resolve_thread_count(int requested);

} // namespace oscimarket::integrate
