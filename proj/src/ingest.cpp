#include "oscimarket/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <numbers>
#include <sstream>

#include "oscimarket/errors.hpp"

namespace oscimarket::ingest {

long days_from_civil(int year, int month, int day) {
    // Howard Hinnant's civil-from-days inverse
    year -= month <= 2;
    const long era = (year >= 0 ? year : year - 399) / 400;
    const unsigned yoe = unsigned(year - era * 400);
    const unsigned doy = (153u * (month + (month > 2 ? -3 : 9)) + 2u) / 5u + day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + long(doe) - 719468;
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

long parse_iso_date(const std::string& token, std::size_t row) {
    int y = 0, m = 0, d = 0;
    if (token.size() != 10 || token[4] != '-' || token[7] != '-' ||
        std::sscanf(token.c_str(), "%4d-%2d-%2d", &y, &m, &d) != 3 || m < 1 || m > 12 || d < 1 ||
        d > 31) {
        throw ParseError("row " + std::to_string(row) + ": bad ISO-8601 date '" + token + "'");
    }
    return days_from_civil(y, m, d);
}

double parse_number(const std::string& token, std::size_t row) {
    const std::string t = trim(token);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
        throw ParseError("row " + std::to_string(row) + ": bad number '" + token + "'");
    }
    return value;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

} // namespace

PriceSeries load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("'" + path + "': empty file");
    const auto header = split_csv(trim(line));
    const bool with_fair = header.size() == 3;
    if (!(header.size() == 2 || with_fair) || trim(header[0]) != "date" ||
        trim(header[1]) != "price" || (with_fair && trim(header[2]) != "fair_value")) {
        throw ParseError("'" + path + "': expected header date,price[,fair_value]");
    }

    PriceSeries series;
    long day0 = 0;
    std::size_t row = 1;
    long prev_day = 0;
    while (std::getline(in, line)) {
        ++row;
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto fields = split_csv(t);
        if (fields.size() != header.size()) {
            throw ParseError("row " + std::to_string(row) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        const long day = parse_iso_date(trim(fields[0]), row);
        const double price = parse_number(fields[1], row);
        if (!(price > 0.0)) {
            throw NonPositivePrice("row " + std::to_string(row) + ": price " + trim(fields[1]));
        }
        if (series.size() == 0) {
            day0 = day;
        } else if (day <= prev_day) {
            throw NonMonotonicDates("row " + std::to_string(row) + ": date not increasing");
        }
        prev_day = day;
        series.t_days.push_back(double(day - day0));
        series.price.push_back(price);
        if (with_fair) {
            const double fv = parse_number(fields[2], row);
            if (!(fv > 0.0)) {
                throw NonPositivePrice("row " + std::to_string(row) + ": fair_value " +
                                       trim(fields[2]));
            }
            series.fair_value.push_back(fv);
        }
    }
    if (series.size() == 0) throw ParseError("'" + path + "': no data rows");
    return series;
}

std::vector<double> mispricing(const PriceSeries& series, MispricingMode mode,
                               std::optional<double> constant_fair_value) {
    if (!series.has_fair_value() && !constant_fair_value) {
        throw MissingFairValue("mispricing: no fair_value column and no constant supplied");
    }
    std::vector<double> x(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double v = constant_fair_value ? *constant_fair_value : series.fair_value[i];
        x[i] = mode == MispricingMode::log_ratio ? std::log(series.price[i] / v)
                                                 : series.price[i] - v;
    }
    return x;
}

std::vector<double> rolling_fair_value(const PriceSeries& series, int window) {
    if (window < 1) throw ConfigError("rolling_fair_value: window must be >= 1");
    const int n = int(series.size());
    const int half = window / 2;
    std::vector<double> prefix(n + 1, 0.0);
    for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + series.price[i];
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(n - 1, i + half);
        out[i] = (prefix[hi + 1] - prefix[lo]) / double(hi - lo + 1);
    }
    return out;
}

Resampled resample_uniform(std::span<const double> t, std::span<const double> x) {
    if (t.size() != x.size() || t.size() < 2) {
        throw LengthMismatch("resample_uniform: need matching series of length >= 2");
    }
    std::vector<double> gaps;
    gaps.reserve(t.size() - 1);
    for (std::size_t i = 1; i < t.size(); ++i) gaps.push_back(t[i] - t[i - 1]);
    std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
    const double dt = gaps[gaps.size() / 2];

    Resampled out;
    out.dt = dt;
    const double span_t = t.back() - t.front();
    const std::size_t count = std::size_t(std::floor(span_t / dt)) + 1;
    out.x.reserve(count);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < count; ++k) {
        const double tk = t.front() + double(k) * dt;
        while (seg + 2 < t.size() && t[seg + 1] < tk) ++seg;
        const double w = (tk - t[seg]) / (t[seg + 1] - t[seg]);
        out.x.push_back(x[seg] + std::clamp(w, 0.0, 1.0) * (x[seg + 1] - x[seg]));
    }
    return out;
}

OscillatorFit fit_ar2(std::span<const double> x, double dt) {
    if (x.size() < 50) throw SeriesTooShort("fit_ar2: need at least 50 points");
    if (!(dt > 0.0)) throw ConfigError("fit_ar2: dt must be positive");

    // normal equations for x_t = phi1 x_{t-1} + phi2 x_{t-2}
    double s11 = 0.0, s12 = 0.0, s22 = 0.0, r1 = 0.0, r2 = 0.0;
    const std::size_t m = x.size() - 2;
    for (std::size_t t = 2; t < x.size(); ++t) {
        const double x1 = x[t - 1], x2 = x[t - 2];
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        r1 += x1 * x[t];
        r2 += x2 * x[t];
    }
    const double det = s11 * s22 - s12 * s12;
    if (!(std::abs(det) > 1e-30 * std::max(1.0, s11 * s22))) {
        throw NumericalFailure("fit_ar2: singular normal equations");
    }
    OscillatorFit fit;
    fit.phi1 = (s22 * r1 - s12 * r2) / det;
    fit.phi2 = (s11 * r2 - s12 * r1) / det;

    double ssr = 0.0;
    for (std::size_t t = 2; t < x.size(); ++t) {
        const double e = x[t] - fit.phi1 * x[t - 1] - fit.phi2 * x[t - 2];
        ssr += e * e;
    }
    fit.residual_variance = m > 2 ? ssr / double(m - 2) : 0.0;

    // se(phi2) from the LS covariance; guards white noise being read as a
    // cycle when phi2 merely straddles zero
    const double se_phi2 = std::sqrt(std::max(fit.residual_variance * s11 / det, 0.0));
    const double disc = fit.phi1 * fit.phi1 + 4.0 * fit.phi2;
    if (disc < 0.0 && -fit.phi2 > 2.0 * se_phi2) {
        fit.oscillatory = true;
        const double modulus = std::sqrt(-fit.phi2);
        const double angle = std::acos(std::clamp(fit.phi1 / (2.0 * modulus), -1.0, 1.0));
        fit.period_estimate = 2.0 * std::numbers::pi * dt / angle;
        fit.damping_estimate = -std::log(-fit.phi2) / (2.0 * dt);
    }
    return fit;
}

} // namespace oscimarket::ingest
