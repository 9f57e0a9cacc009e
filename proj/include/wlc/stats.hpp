#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

#include "wlc/errors.hpp"

namespace wlc {

// Pairwise (tree) sum: deterministic reduction order independent of how the
// values were produced, and better conditioned than a running sum.
inline double pairwise_sum(const double* data, std::size_t n) {
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

inline double mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : pairwise_sum(v) / static_cast<double>(v.size());
}

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;        // of the sample
    double se = 0.0;        // of the mean
};

inline MeanSd mean_sd(const std::vector<double>& v) {
    MeanSd out;
    if (v.empty()) return out;
    out.mean = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    const double n = static_cast<double>(v.size());
    out.sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    out.se = out.sd / std::sqrt(n);
    return out;
}

inline double percentile(std::vector<double> v, double p) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = p * (static_cast<double>(v.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

// Runs fn(i) for i in [0, n) across `threads` contiguous chunks. Each index
// must own its outputs (per-index slots); with that discipline results do not
// depend on the thread count.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(t);
    const std::size_t chunk = (n + t - 1) / t;
    for (std::size_t w = 0; w < t; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Least-squares fit of log(value) on log(width); the empirical check of the
// width-scaling claims (the constants themselves are existential and never
// computed, only their slopes are verified).
inline RateFit rate_fit(const std::vector<int>& widths, const std::vector<double>& values) {
    if (widths.size() != values.size() || widths.size() < 4)
        throw InvalidData("rate_fit: need at least 4 (width, value) pairs");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < widths.size(); ++i) {
        if (widths[i] <= 0 || values[i] <= 0.0)
            throw InvalidData("rate_fit: widths and values must be positive");
        xs.push_back(std::log(static_cast<double>(widths[i])));
        ys.push_back(std::log(values[i]));
    }
    const double xbar = mean(xs), ybar = mean(ys);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
        syy += (ys[i] - ybar) * (ys[i] - ybar);
    }
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

}  // namespace wlc
