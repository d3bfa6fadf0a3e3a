#pragma once

#include <functional>
#include <string>
#include <vector>

#include "oscimarket/fields.hpp"

namespace oscimarket::reducecheck {

using sds::ScalarField;
using sds::SmoothMap;
using sds::Vec;
using sds::VectorFieldSet;

// Produces `count` points p with |Phi(p) - q| < 1e-10 for a base point q.
using FiberSampler = std::function<std::vector<Vec>(std::span<const double> q, int count)>;

struct ProjectionSetup {
    SmoothMap phi;
    FiberSampler fiber_sampler;
    std::vector<ScalarField> test_functions;
    std::vector<Vec> base_points;
};

enum class Verdict { projectable, not_projectable, inconclusive };

struct ProjectabilityReport {
    Verdict verdict = Verdict::inconclusive;
    double max_fiber_variation = 0.0;
    struct WorstCase {
        int test_function = -1;
        Vec base_point;
        Vec fiber_low, fiber_high;
    } worst;
    std::string note;
};

const char* verdict_name(Verdict v);

// Samples the generator condition: for every test function f and base point
// q, evaluates A_X(Phi^* f) at `fiber_samples` fiber points; the per-cell
// variation (max - min) is normalized by 1 + max |A_X(Phi^* f)| over the
// cell. projectable if the worst cell is below pass_threshold,
// not_projectable above fail_threshold, inconclusive in between. A
// projectable verdict is evidence over the sampled functions/fibers, not a
// proof; the report's note says so.
ProjectabilityReport check_projectable_sds(const VectorFieldSet& fields,
                                           const ProjectionSetup& setup, int fiber_samples = 8,
                                           double pass_threshold = 1e-6,
                                           double fail_threshold = 1e-3);

// Deterministic variant: compares the pushforwards DPhi . X0 across each
// fiber (Jacobian by central differences); test functions are not used.
ProjectabilityReport check_projectable_deterministic(const sds::MapFn& drift, int dimension,
                                                     const ProjectionSetup& setup,
                                                     int fiber_samples = 8,
                                                     double pass_threshold = 1e-6,
                                                     double fail_threshold = 1e-3);

// Default probe set: coordinate polynomials u, u^2, u^3 (summed over
// coordinates) plus sum sin u_i, all with analytic gradients.
std::vector<ScalarField> default_test_functions(int range_dim);

// Built-in maps and samplers for the common quotients.
SmoothMap coordinate_projection(int dimension, int coordinate);
SmoothMap radius_map_2d();

// Fills the forgotten coordinates from a golden-ratio sequence in [lo, hi];
// prefixes are nested, so enlarging the sample count only adds points.
FiberSampler coordinate_fiber_sampler(int dimension, int coordinate, double lo = -2.0,
                                      double hi = 2.0);
// Points (r cos t, r sin t) with golden-ratio angles.
FiberSampler radius_fiber_sampler();

std::vector<Vec> linspace_points(double lo, double hi, int count);

} // namespace oscimarket::reducecheck
