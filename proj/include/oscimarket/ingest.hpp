#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace oscimarket::ingest {

// Price history with timestamps in days since the first row.
struct PriceSeries {
    std::vector<double> t_days;
    std::vector<double> price;
    std::vector<double> fair_value; // empty unless the CSV had the column

    bool has_fair_value() const { return !fair_value.empty(); }
    std::size_t size() const { return price.size(); }
};

// Parses `date,price[,fair_value]` rows (ISO-8601 dates, '.' decimal point).
// Errors carry the offending row number.
PriceSeries load_csv(const std::string& path);

enum class MispricingMode { log_ratio, difference };

// x = ln(P/V) or x = P - V against the series' fair-value column, or a
// constant fair value when supplied.
std::vector<double> mispricing(const PriceSeries& series, MispricingMode mode,
                               std::optional<double> constant_fair_value = std::nullopt);

// Centered rolling mean of the price as a slow fair-value proxy; windows are
// truncated at the edges.
std::vector<double> rolling_fair_value(const PriceSeries& series, int window = 521);

struct Resampled {
    std::vector<double> x;
    double dt = 0.0; // median spacing of the source timestamps
};

// Linear interpolation onto a uniform grid at the median spacing (AR fitting
// needs uniform steps).
Resampled resample_uniform(std::span<const double> t, std::span<const double> x);

struct OscillatorFit {
    bool oscillatory = false;
    double period_estimate = 0.0;  // valid when oscillatory
    double damping_estimate = 0.0; // valid when oscillatory
    double residual_variance = 0.0;
    double phi1 = 0.0;
    double phi2 = 0.0;
};

// Least-squares AR(2) fit x_t = phi1 x_{t-1} + phi2 x_{t-2} + e. Oscillatory
// when the roots are complex (phi1^2 + 4 phi2 < 0) and -phi2 clears twice
// its standard error; then period = 2 pi dt / arccos(phi1 / (2 sqrt(-phi2)))
// and damping = -ln(-phi2) / (2 dt). Needs at least 50 points.
OscillatorFit fit_ar2(std::span<const double> x, double dt);

// Calendar helper: days since 1970-01-01 for an ISO date.
long days_from_civil(int year, int month, int day);

} // namespace oscimarket::ingest
