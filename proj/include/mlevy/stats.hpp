#pragma once

// Monte Carlo summaries and the distribution tests used by the experiments.

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mlevy/errors.hpp"
#include "mlevy/rng.hpp"

namespace mlevy {

// Count, mean and central moments M2, M3; merge() is Pébay's pairwise update.
class MomentAccumulator {
  public:
    void push(double x) noexcept {
        MomentAccumulator one;
        one.n_ = 1;
        one.mean_ = x;
        merge(one);
    }

    void merge(const MomentAccumulator& o) noexcept {
        if (o.n_ == 0) {
            return;
        }
        if (n_ == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n_);
        const double nb = static_cast<double>(o.n_);
        const double n = na + nb;
        const double delta = o.mean_ - mean_;
        const double d_n = delta / n;
        const double m2 = m2_ + o.m2_ + delta * d_n * na * nb;
        const double m3 = m3_ + o.m3_ + delta * d_n * d_n * na * nb * (na - nb) + 3.0 * d_n * (na * o.m2_ - nb * m2_);
        mean_ += d_n * nb;
        m2_ = m2;
        m3_ = m3;
        n_ += o.n_;
    }

    std::uint64_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept { return n_ > 1 ? std::max(0.0, m2_ / static_cast<double>(n_ - 1)) : 0.0; }
    double skewness() const noexcept {
        if (n_ < 2 || m2_ <= 0.0) {
            return 0.0;
        }
        const double n = static_cast<double>(n_);
        return std::sqrt(n) * m3_ / std::pow(m2_, 1.5);
    }

  private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    double m3_ = 0.0;
};

// Sample retained for the ECDF, reservoir-downsampled beyond the cap.
class EcdfReservoir {
  public:
    explicit EcdfReservoir(std::size_t cap = 1'000'000, std::uint64_t seed = 0x5eed) : cap_(cap), eng_(seed, 0, 0) {}

    void push(double x) {
        ++seen_;
        if (data_.size() < cap_) {
            data_.push_back(x);
            return;
        }
        const auto j = static_cast<std::uint64_t>(uniform_open01(eng_) * static_cast<double>(seen_));
        if (j < cap_) {
            data_[j] = x;
        }
    }

    std::uint64_t seen() const noexcept { return seen_; }
    const std::vector<double>& data() const noexcept { return data_; }

  private:
    std::size_t cap_;
    std::uint64_t seen_ = 0;
    CounterEngine eng_;
    std::vector<double> data_;
};

// Linear-interpolated quantile of a sorted sample (type 7).
inline double sorted_quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) {
        throw DomainError("quantile of an empty sample");
    }
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return sorted[lo] + w * (sorted[hi] - sorted[lo]);
}

struct SampleSummary {
    std::uint64_t count = 0;
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
    std::vector<std::pair<double, double>> quantiles;
    std::vector<double> ecdf;  // sorted
};

inline const std::vector<double>& default_quantile_levels() {
    static const std::vector<double> q{0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99};
    return q;
}

inline SampleSummary summarize(std::span<const double> sample,
                               const std::vector<double>& levels = default_quantile_levels(),
                               std::size_t ecdf_cap = 1'000'000) {
    if (sample.empty()) {
        throw DomainError("summary of an empty sample");
    }
    MomentAccumulator acc;
    EcdfReservoir res(ecdf_cap);
    for (double x : sample) {
        acc.push(x);
        res.push(x);
    }
    SampleSummary s;
    s.count = acc.count();
    s.mean = acc.mean();
    s.variance = acc.variance();
    s.skewness = acc.skewness();
    s.ecdf = res.data();
    std::sort(s.ecdf.begin(), s.ecdf.end());
    for (double q : levels) {
        s.quantiles.emplace_back(q, sorted_quantile(s.ecdf, q));
    }
    return s;
}

// Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|.
inline double ks_distance(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) {
        throw DomainError("KS distance needs two nonempty samples");
    }
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= v) {
            ++i;
        }
        while (j < y.size() && y[j] <= v) {
            ++j;
        }
        d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    return d;
}

// One-sample KS statistic against a continuous CDF.
template <class Cdf>
double ks_statistic(std::span<const double> sample, Cdf&& cdf) {
    if (sample.empty()) {
        throw DomainError("KS statistic of an empty sample");
    }
    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double F = cdf(x[k]);
        d = std::max({d, F - static_cast<double>(k) / n, static_cast<double>(k + 1) / n - F});
    }
    return d;
}

inline std::vector<std::complex<double>> empirical_cf(std::span<const double> sample, std::span<const double> u_grid) {
    if (sample.empty()) {
        throw DomainError("empirical CF of an empty sample");
    }
    std::vector<std::complex<double>> out;
    out.reserve(u_grid.size());
    for (double u : u_grid) {
        double re = 0.0;
        double im = 0.0;
        for (double x : sample) {
            re += std::cos(u * x);
            im += std::sin(u * x);
        }
        const double n = static_cast<double>(sample.size());
        out.emplace_back(re / n, im / n);
    }
    return out;
}

struct RateFit {
    std::vector<double> levels;
    std::vector<double> statistics;
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Least squares of log(statistic) on log(level).
inline RateFit rate_fit(std::span<const double> levels, std::span<const double> statistics) {
    if (levels.size() != statistics.size() || levels.size() < 2) {
        throw DomainError("rate_fit needs at least two (level, statistic) pairs");
    }
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (k > 0 && !(levels[k] > levels[k - 1])) {
            throw DomainError("rate_fit levels must be strictly increasing");
        }
        if (!(levels[k] > 0.0) || !(statistics[k] > 0.0)) {
            throw DomainError("rate_fit needs positive levels and statistics");
        }
    }
    const double n = static_cast<double>(levels.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const double x = std::log(levels[k]);
        const double y = std::log(statistics[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    const double vx = sxx - sx * sx / n;
    const double cxy = sxy - sx * sy / n;
    const double vy = syy - sy * sy / n;
    RateFit fit;
    fit.levels.assign(levels.begin(), levels.end());
    fit.statistics.assign(statistics.begin(), statistics.end());
    fit.slope = cxy / vx;
    fit.intercept = (sy - fit.slope * sx) / n;
    fit.r2 = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
    return fit;
}

// Chi-square goodness of fit of counts against Poisson(lambda) on the bins
// {0, 1, >=2}; a bin whose expected count is below 5 is folded into its
// left neighbour.
inline double poisson_count_test(std::span<const std::uint32_t> counts, double lambda) {
    if (counts.empty()) {
        throw DomainError("Poisson test needs at least one count");
    }
    if (!(lambda >= 0.0)) {
        throw DomainError("Poisson mean must be nonnegative");
    }
    const double n = static_cast<double>(counts.size());
    std::vector<double> observed(3, 0.0);
    for (auto k : counts) {
        observed[std::min<std::uint32_t>(k, 2)] += 1.0;
    }
    if (lambda == 0.0) {
        return observed[0] == n ? 1.0 : 0.0;
    }
    const double p0 = std::exp(-lambda);
    const double p1 = lambda * p0;
    std::vector<double> expected{n * p0, n * p1, n * std::max(0.0, 1.0 - p0 - p1)};
    while (expected.size() > 1 && expected.back() < 5.0) {
        expected[expected.size() - 2] += expected.back();
        observed[expected.size() - 2] += observed[expected.size() - 1];
        expected.pop_back();
        observed.pop_back();
    }
    if (expected.size() < 2) {
        // Everything in one bin: nothing left to test.
        return 1.0;
    }
    double chi2 = 0.0;
    for (std::size_t b = 0; b < expected.size(); ++b) {
        const double diff = observed[b] - expected[b];
        chi2 += diff * diff / expected[b];
    }
    const boost::math::chi_squared dist(static_cast<double>(expected.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, chi2));
}

}  // namespace mlevy
