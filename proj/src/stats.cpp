#include "oscimarket/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "oscimarket/errors.hpp"

namespace oscimarket::stats {

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples)
    : samples_(std::move(samples)) {
    if (samples_.empty()) throw ConfigError("EmpiricalDistribution: needs at least one sample");
    std::sort(samples_.begin(), samples_.end());
}

double ks_statistic(const EmpiricalDistribution& emp, const std::function<double(double)>& cdf) {
    const auto& x = emp.sorted();
    const double n = double(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max(d, double(i + 1) / n - f); // gap above
        d = std::max(d, f - double(i) / n);     // gap below
    }
    return d;
}

double ks_statistic(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
    const auto& xa = a.sorted();
    const auto& xb = b.sorted();
    const double na = double(xa.size()), nb = double(xb.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < xa.size() && j < xb.size()) {
        if (xa[i] <= xb[j]) {
            ++i;
        } else {
            ++j;
        }
        d = std::max(d, std::abs(double(i) / na - double(j) / nb));
    }
    return d;
}

// ---------------------------------------------------------------------------
// FFT: iterative radix-2, Bluestein wrapper for arbitrary lengths.

namespace {

void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = (inverse ? 2.0 : -2.0) * std::numbers::pi / double(len);
        const std::complex<double> wl(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = a[i + k];
                const auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        for (auto& z : a) z /= double(n);
    }
}

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::vector<std::complex<double>> bluestein(const std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    std::size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;

    // chirp w_k = exp(-i pi k^2 / n); k^2 taken mod 2n to keep angles accurate
    std::vector<std::complex<double>> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t k2 = (k * k) % (2 * n);
        const double angle = -std::numbers::pi * double(k2) / double(n);
        chirp[k] = {std::cos(angle), std::sin(angle)};
    }

    std::vector<std::complex<double>> a(m), b(m);
    for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
    b[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);

    fft_pow2(a, false);
    fft_pow2(b, false);
    for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
    fft_pow2(a, true);

    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * chirp[k];
    return out;
}

} // namespace

std::vector<std::complex<double>> dft(std::vector<std::complex<double>> input) {
    if (input.size() < 2) return input;
    if (is_pow2(input.size())) {
        fft_pow2(input, false);
        return input;
    }
    return bluestein(input);
}

Periodogram periodogram(std::span<const double> series, double dt) {
    const std::size_t n = series.size();
    if (n < 16) throw SeriesTooShort("periodogram: need at least 16 samples");
    if (!(dt > 0.0)) throw ConfigError("periodogram: dt must be positive");

    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / double(n);

    std::vector<std::complex<double>> buf(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double hann =
            0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * double(j) / double(n - 1)));
        buf[j] = hann * (series[j] - mean);
    }
    buf = dft(std::move(buf));

    const std::size_t half = n / 2;
    Periodogram p;
    p.bin_width = 2.0 * std::numbers::pi / (double(n) * dt);
    p.frequencies.resize(half + 1);
    p.power.resize(half + 1);
    const double scale = 1.0 / (double(n) * double(n));
    for (std::size_t k = 0; k <= half; ++k) {
        p.frequencies[k] = double(k) * p.bin_width;
        double pw = std::norm(buf[k]) * scale;
        if (k != 0 && !(n % 2 == 0 && k == half)) pw *= 2.0; // fold the negative side
        p.power[k] = pw;
    }
    return p;
}

std::vector<double> find_peaks(const Periodogram& p, int count, double min_separation) {
    if (count < 1) throw ConfigError("find_peaks: count must be >= 1");
    struct Candidate {
        double freq;
        double power;
    };
    std::vector<Candidate> candidates;
    for (std::size_t k = 1; k + 1 < p.power.size(); ++k) {
        if (p.power[k] > p.power[k - 1] && p.power[k] > p.power[k + 1]) {
            double freq = p.frequencies[k];
            // parabolic refinement on log power
            const double eps = 1e-300;
            const double l0 = std::log(p.power[k - 1] + eps);
            const double l1 = std::log(p.power[k] + eps);
            const double l2 = std::log(p.power[k + 1] + eps);
            const double denom = l0 - 2.0 * l1 + l2;
            if (denom < 0.0) {
                const double shift = 0.5 * (l0 - l2) / denom;
                if (std::abs(shift) <= 1.0) freq += shift * p.bin_width;
            }
            candidates.push_back({freq, p.power[k]});
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.power > b.power; });

    std::vector<double> picked;
    for (const auto& c : candidates) {
        if (int(picked.size()) == count) break;
        bool clear = true;
        for (double f : picked) {
            if (std::abs(f - c.freq) < min_separation) {
                clear = false;
                break;
            }
        }
        if (clear) picked.push_back(c.freq);
    }
    if (int(picked.size()) < count) {
        throw InsufficientPeaks("find_peaks: found " + std::to_string(picked.size()) +
                                " peaks, wanted " + std::to_string(count));
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

BatchMeans batch_means(std::span<const double> series, std::size_t window) {
    if (window < 2) throw ConfigError("batch_means: window must be >= 2");
    if (series.size() < 4 * window) {
        throw SeriesTooShort("batch_means: series must be at least 4 windows long");
    }
    const std::size_t k = series.size() / window;

    BatchMeans result;
    result.means.reserve(k);
    double pooled_var = 0.0;
    for (std::size_t w = 0; w < k; ++w) {
        const double* block = series.data() + w * window;
        double mean = 0.0;
        for (std::size_t i = 0; i < window; ++i) mean += block[i];
        mean /= double(window);
        double var = 0.0;
        for (std::size_t i = 0; i < window; ++i) {
            const double d = block[i] - mean;
            var += d * d;
        }
        var /= double(window - 1);
        result.means.push_back(mean);
        pooled_var += var;
    }
    pooled_var /= double(k);
    result.pooled_se = std::sqrt(2.0 * pooled_var / double(window));

    result.stationary = true;
    for (std::size_t i = 0; i < k && result.stationary; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            if (std::abs(result.means[i] - result.means[j]) > 3.0 * result.pooled_se) {
                result.stationary = false;
                break;
            }
        }
    }
    return result;
}

} // namespace oscimarket::stats
