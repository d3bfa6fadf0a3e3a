#include "oscimarket/fields.hpp"

#include <cmath>
#include <string>

#include "oscimarket/errors.hpp"

namespace oscimarket::sds {

namespace {

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

void require_finite(std::span<const double> v, const char* what) {
    if (!all_finite(v)) throw NumericalFailure(std::string("non-finite ") + what);
}

} // namespace

VectorFieldSet additive_noise_fields(int dimension, MapFn drift, std::vector<Vec> noise_columns) {
    VectorFieldSet v;
    v.dimension = dimension;
    v.drift = std::move(drift);
    for (auto& col : noise_columns) {
        v.diffusion_fields.push_back(
            [c = std::move(col)](std::span<const double>, std::span<double> out) {
                for (std::size_t i = 0; i < out.size(); ++i) out[i] = c[i];
            });
    }
    v.additive = true;
    return v;
}

double directional_derivative(const MapFn& field, const ScalarField& f,
                              std::span<const double> p, const FdScheme& scheme) {
    require_finite(p, "evaluation point");
    const int d = int(p.size());
    Vec direction(d);
    field(p, direction);
    require_finite(direction, "field value");

    if (f.has_gradient()) {
        Vec grad(d);
        f.gradient(p, grad);
        require_finite(grad, "gradient value");
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += direction[i] * grad[i];
        return s;
    }

    double norm = 0.0;
    for (double v : direction) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;

    Vec plus(p.begin(), p.end()), minus(p.begin(), p.end());
    for (int i = 0; i < d; ++i) {
        const double step = scheme.h * direction[i] / norm;
        plus[i] += step;
        minus[i] -= step;
    }
    const double fp = f(plus);
    const double fm = f(minus);
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
        throw NumericalFailure("non-finite function value in directional derivative");
    }
    return (fp - fm) / (2.0 * scheme.h) * norm;
}

double apply_diffusion_operator(const VectorFieldSet& fields, const ScalarField& f,
                                std::span<const double> p, const FdScheme& scheme) {
    double result = directional_derivative(fields.drift, f, p, scheme);
    for (const auto& x_i : fields.diffusion_fields) {
        // g_i(q) = (X_i . grad f)(q); differentiate it once more along X_i.
        ScalarField g;
        g.value = [&x_i, &f, &scheme](std::span<const double> q) {
            return directional_derivative(x_i, f, q, scheme);
        };
        result += 0.5 * directional_derivative(x_i, g, p, scheme);
    }
    if (!std::isfinite(result)) throw NumericalFailure("non-finite diffusion operator value");
    return result;
}

ScalarField pullback(const ScalarField& f, const SmoothMap& phi) {
    const int d = phi.domain_dim;
    const int m = phi.range_dim;

    ScalarField out;
    out.value = [f, phi, m](std::span<const double> p) {
        Vec q(m);
        phi.value(p, q);
        return f(q);
    };
    if (f.has_gradient() && phi.jacobian) {
        out.gradient = [f, phi, d, m](std::span<const double> p, std::span<double> grad) {
            Vec q(m), gf(m), jac(std::size_t(m) * d);
            phi.value(p, q);
            f.gradient(q, gf);
            phi.jacobian(p, jac);
            for (int j = 0; j < d; ++j) {
                double s = 0.0;
                for (int i = 0; i < m; ++i) s += gf[i] * jac[std::size_t(i) * d + j];
                grad[j] = s;
            }
        };
    }
    return out;
}

} // namespace oscimarket::sds
