#include "oscimarket/reducecheck.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "oscimarket/errors.hpp"

namespace oscimarket::reducecheck {

const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::projectable:
        return "projectable";
    case Verdict::not_projectable:
        return "not_projectable";
    case Verdict::inconclusive:
        return "inconclusive";
    }
    return "?";
}

namespace {

constexpr const char* kSampledNote =
    "sampled check over the given test functions, base points, and fiber points; "
    "a projectable verdict is evidence, not proof, and assumes Phi is a submersion";

void validate_fiber_point(const SmoothMap& phi, std::span<const double> q, const Vec& p) {
    Vec image(phi.range_dim);
    phi.value(p, image);
    double err = 0.0;
    for (int i = 0; i < phi.range_dim; ++i) err = std::max(err, std::abs(image[i] - q[i]));
    if (err > 1e-10) {
        throw FiberSamplerFailure("fiber point misses the base point by " + std::to_string(err));
    }
}

Verdict classify(double variation, double pass_threshold, double fail_threshold) {
    if (variation > fail_threshold) return Verdict::not_projectable;
    if (variation < pass_threshold) return Verdict::projectable;
    return Verdict::inconclusive;
}

} // namespace

ProjectabilityReport check_projectable_sds(const VectorFieldSet& fields,
                                           const ProjectionSetup& setup, int fiber_samples,
                                           double pass_threshold, double fail_threshold) {
    if (fiber_samples < 2) throw ConfigError("check_projectable_sds: need >= 2 fiber samples");
    if (!(pass_threshold < fail_threshold)) {
        throw ConfigError("check_projectable_sds: pass_threshold must be < fail_threshold");
    }
    if (setup.test_functions.empty() || setup.base_points.empty()) {
        throw ConfigError("check_projectable_sds: need test functions and base points");
    }

    ProjectabilityReport report;
    report.note = kSampledNote;
    bool any_fail = false;

    for (int fi = 0; fi < int(setup.test_functions.size()); ++fi) {
        const ScalarField pulled = sds::pullback(setup.test_functions[fi], setup.phi);
        for (const auto& q : setup.base_points) {
            const auto fiber = setup.fiber_sampler(q, fiber_samples);
            if (int(fiber.size()) < fiber_samples) {
                throw FiberSamplerFailure("fiber sampler returned too few points");
            }
            double lo = 0.0, hi = 0.0, max_abs = 0.0;
            Vec p_lo, p_hi;
            for (int s = 0; s < fiber_samples; ++s) {
                validate_fiber_point(setup.phi, q, fiber[s]);
                const double value = sds::apply_diffusion_operator(fields, pulled, fiber[s]);
                if (s == 0 || value < lo) {
                    lo = s == 0 ? value : std::min(lo, value);
                    p_lo = fiber[s];
                }
                if (s == 0 || value > hi) {
                    hi = s == 0 ? value : std::max(hi, value);
                    p_hi = fiber[s];
                }
                max_abs = std::max(max_abs, std::abs(value));
            }
            const double variation = (hi - lo) / (1.0 + max_abs);
            if (variation > report.max_fiber_variation) {
                report.max_fiber_variation = variation;
                report.worst = {fi, Vec(q.begin(), q.end()), p_lo, p_hi};
            }
            if (variation > fail_threshold) any_fail = true;
        }
    }
    report.verdict = any_fail ? Verdict::not_projectable
                              : classify(report.max_fiber_variation, pass_threshold, fail_threshold);
    return report;
}

ProjectabilityReport check_projectable_deterministic(const sds::MapFn& drift, int dimension,
                                                     const ProjectionSetup& setup,
                                                     int fiber_samples, double pass_threshold,
                                                     double fail_threshold) {
    if (fiber_samples < 2) {
        throw ConfigError("check_projectable_deterministic: need >= 2 fiber samples");
    }
    if (!(pass_threshold < fail_threshold)) {
        throw ConfigError("check_projectable_deterministic: pass_threshold < fail_threshold");
    }
    if (setup.base_points.empty()) {
        throw ConfigError("check_projectable_deterministic: need base points");
    }

    const int m = setup.phi.range_dim;
    const double h = 1e-4;

    auto pushforward = [&](const Vec& p) {
        Vec direction(dimension);
        drift(p, direction);
        Vec out(m, 0.0);
        // DPhi . X0 by central differences of Phi along each coordinate
        Vec plus(p), minus(p), img_p(m), img_m(m);
        for (int j = 0; j < dimension; ++j) {
            plus[j] += h;
            minus[j] -= h;
            setup.phi.value(plus, img_p);
            setup.phi.value(minus, img_m);
            for (int i = 0; i < m; ++i) out[i] += (img_p[i] - img_m[i]) / (2.0 * h) * direction[j];
            plus[j] = p[j];
            minus[j] = p[j];
        }
        return out;
    };

    ProjectabilityReport report;
    report.note = kSampledNote;
    bool any_fail = false;

    for (const auto& q : setup.base_points) {
        const auto fiber = setup.fiber_sampler(q, fiber_samples);
        if (int(fiber.size()) < fiber_samples) {
            throw FiberSamplerFailure("fiber sampler returned too few points");
        }
        std::vector<Vec> pushed;
        double max_abs = 0.0;
        for (int s = 0; s < fiber_samples; ++s) {
            validate_fiber_point(setup.phi, q, fiber[s]);
            pushed.push_back(pushforward(fiber[s]));
            for (double v : pushed.back()) max_abs = std::max(max_abs, std::abs(v));
        }
        double spread = 0.0;
        int lo_idx = 0, hi_idx = 0;
        for (int s1 = 0; s1 < fiber_samples; ++s1) {
            for (int s2 = s1 + 1; s2 < fiber_samples; ++s2) {
                double d = 0.0;
                for (int i = 0; i < m; ++i) d = std::max(d, std::abs(pushed[s1][i] - pushed[s2][i]));
                if (d > spread) {
                    spread = d;
                    lo_idx = s1;
                    hi_idx = s2;
                }
            }
        }
        const double variation = spread / (1.0 + max_abs);
        if (variation > report.max_fiber_variation) {
            report.max_fiber_variation = variation;
            report.worst = {-1, Vec(q.begin(), q.end()), fiber[lo_idx], fiber[hi_idx]};
        }
        if (variation > fail_threshold) any_fail = true;
    }
    report.verdict = any_fail ? Verdict::not_projectable
                              : classify(report.max_fiber_variation, pass_threshold, fail_threshold);
    return report;
}

std::vector<ScalarField> default_test_functions(int range_dim) {
    std::vector<ScalarField> fns;
    auto poly = [range_dim](int degree) {
        ScalarField f;
        f.value = [degree](std::span<const double> u) {
            double s = 0.0;
            for (double v : u) s += std::pow(v, degree);
            return s;
        };
        f.gradient = [degree](std::span<const double> u, std::span<double> g) {
            for (std::size_t i = 0; i < u.size(); ++i) {
                g[i] = double(degree) * std::pow(u[i], degree - 1);
            }
        };
        return f;
    };
    fns.push_back(poly(1));
    fns.push_back(poly(2));
    fns.push_back(poly(3));
    ScalarField bounded;
    bounded.value = [](std::span<const double> u) {
        double s = 0.0;
        for (double v : u) s += std::sin(v);
        return s;
    };
    bounded.gradient = [](std::span<const double> u, std::span<double> g) {
        for (std::size_t i = 0; i < u.size(); ++i) g[i] = std::cos(u[i]);
    };
    fns.push_back(bounded);
    (void)range_dim;
    return fns;
}

SmoothMap coordinate_projection(int dimension, int coordinate) {
    SmoothMap phi;
    phi.domain_dim = dimension;
    phi.range_dim = 1;
    phi.value = [coordinate](std::span<const double> p, std::span<double> out) {
        out[0] = p[coordinate];
    };
    phi.jacobian = [dimension, coordinate](std::span<const double>, std::span<double> jac) {
        for (int j = 0; j < dimension; ++j) jac[j] = j == coordinate ? 1.0 : 0.0;
    };
    return phi;
}

SmoothMap radius_map_2d() {
    SmoothMap phi;
    phi.domain_dim = 2;
    phi.range_dim = 1;
    phi.value = [](std::span<const double> p, std::span<double> out) {
        out[0] = std::sqrt(p[0] * p[0] + p[1] * p[1]);
    };
    phi.jacobian = [](std::span<const double> p, std::span<double> jac) {
        const double r = std::sqrt(p[0] * p[0] + p[1] * p[1]);
        jac[0] = p[0] / r;
        jac[1] = p[1] / r;
    };
    return phi;
}

namespace {

// golden-ratio low-discrepancy sequence on [0,1); prefixes are nested
double golden_point(int index) {
    const double phi = 0.6180339887498949;
    const double v = (index + 1) * phi;
    return v - std::floor(v);
}

} // namespace

FiberSampler coordinate_fiber_sampler(int dimension, int coordinate, double lo, double hi) {
    return [dimension, coordinate, lo, hi](std::span<const double> q, int count) {
        std::vector<Vec> points;
        points.reserve(count);
        int draw = 0;
        for (int s = 0; s < count; ++s) {
            Vec p(dimension);
            p[coordinate] = q[0];
            for (int j = 0; j < dimension; ++j) {
                if (j == coordinate) continue;
                p[j] = lo + golden_point(draw++) * (hi - lo);
            }
            points.push_back(std::move(p));
        }
        return points;
    };
}

FiberSampler radius_fiber_sampler() {
    return [](std::span<const double> q, int count) {
        std::vector<Vec> points;
        points.reserve(count);
        const double r = q[0];
        for (int s = 0; s < count; ++s) {
            const double angle = 2.0 * std::numbers::pi * golden_point(s);
            points.push_back({r * std::cos(angle), r * std::sin(angle)});
        }
        return points;
    };
}

std::vector<Vec> linspace_points(double lo, double hi, int count) {
    std::vector<Vec> points;
    points.reserve(count);
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.5 : double(i) / double(count - 1);
        points.push_back({lo + t * (hi - lo)});
    }
    return points;
}

} // namespace oscimarket::reducecheck
