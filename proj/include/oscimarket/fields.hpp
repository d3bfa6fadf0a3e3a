#pragma once

#include <functional>
#include <span>
#include <vector>

namespace oscimarket::sds {

using Vec = std::vector<double>;

// Writes the d-dimensional (or m-dimensional) image of x into out.
using MapFn = std::function<void(std::span<const double> x, std::span<double> out)>;

// Second-order central differences on unit-scaled coordinates; h balances
// truncation against roundoff for |x| up to ~10^2.
struct FdScheme {
    double h = 1e-4;
};

// Scalar test function with an optional analytic gradient. When the gradient
// is present it must agree with central differences (checked in tests).
struct ScalarField {
    std::function<double(std::span<const double>)> value;
    MapFn gradient; // may be empty

    double operator()(std::span<const double> x) const { return value(x); }
    bool has_gradient() const { return bool(gradient); }
};

// Drift plus diffusion vector fields of a Stratonovich SDS on R^d.
// `additive` marks state-independent diffusion fields (constant columns),
// which unlocks plain Euler-Maruyama integration.
struct VectorFieldSet {
    int dimension = 0;
    MapFn drift;
    std::vector<MapFn> diffusion_fields;
    bool additive = false;

    int noise_dimension() const { return int(diffusion_fields.size()); }
};

// Convenience constructor: drift plus constant diffusion columns.
VectorFieldSet additive_noise_fields(int dimension, MapFn drift, std::vector<Vec> noise_columns);

// Smooth map R^d -> R^m with an optional analytic Jacobian (row-major m x d).
struct SmoothMap {
    int domain_dim = 0;
    int range_dim = 0;
    MapFn value;
    MapFn jacobian; // may be empty

    void operator()(std::span<const double> x, std::span<double> out) const { value(x, out); }
};

// (X . grad f)(p). Uses the analytic gradient when present, otherwise a
// central difference along the direction X(p).
double directional_derivative(const MapFn& field, const ScalarField& f,
                              std::span<const double> p, const FdScheme& scheme = {});

// (A_X f)(p) = (X_0 . grad f)(p) + 1/2 sum_i (X_i . grad (X_i . grad f))(p),
// the generator of the Stratonovich SDS. Nested derivatives are composed from
// directional_derivative.
double apply_diffusion_operator(const VectorFieldSet& fields, const ScalarField& f,
                                std::span<const double> p, const FdScheme& scheme = {});

// Pullback Phi^* f = f o Phi. Composes analytic gradients when both the map's
// Jacobian and the field's gradient are available.
ScalarField pullback(const ScalarField& f, const SmoothMap& phi);

} // namespace oscimarket::sds
