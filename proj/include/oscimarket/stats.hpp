#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace oscimarket::stats {

// Sorted sample set for empirical-CDF comparisons.
class EmpiricalDistribution {
public:
    explicit EmpiricalDistribution(std::vector<double> samples);

    const std::vector<double>& sorted() const { return samples_; }
    std::size_t size() const { return samples_.size(); }

private:
    std::vector<double> samples_;
};

// One-sample Kolmogorov-Smirnov statistic: sup-norm distance between the
// empirical CDF and `cdf`, both one-sided gaps evaluated at the samples.
double ks_statistic(const EmpiricalDistribution& emp, const std::function<double(double)>& cdf);

// Two-sample KS statistic (merge walk over both sorted sets).
double ks_statistic(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

struct Periodogram {
    std::vector<double> frequencies; // angular (rad / time unit)
    std::vector<double> power;
    double bin_width = 0.0; // 2*pi / (N * dt)
};

// Hann-windowed, mean-removed one-sided periodogram. Power is normalized so
// that the total equals the windowed time-domain variance (Parseval).
// Works for any series length >= 16 (radix-2 FFT, Bluestein for other sizes).
Periodogram periodogram(std::span<const double> series, double dt);

// The `count` largest local maxima separated by at least min_separation
// (in angular frequency), returned sorted ascending. Peak locations are
// refined by parabolic interpolation of log power.
std::vector<double> find_peaks(const Periodogram& p, int count, double min_separation);

struct BatchMeans {
    std::vector<double> means;
    bool stationary = false;
    double pooled_se = 0.0; // SE of a window-mean difference
};

// Disjoint-window means. The stationarity flag is true when every pairwise
// mean difference is within 3x the pooled SE, where the pooled SE comes from
// the within-window variances; callers should subsample correlated series to
// near-independence first.
BatchMeans batch_means(std::span<const double> series, std::size_t window);

// Discrete Fourier transform of arbitrary length (used by periodogram;
// exposed for testing against the naive-DFT oracle).
std::vector<std::complex<double>> dft(std::vector<std::complex<double>> input);

} // namespace oscimarket::stats
