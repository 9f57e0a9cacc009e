#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "wlc/errors.hpp"
#include "wlc/gaussian.hpp"
#include "wlc/matrix.hpp"
#include "wlc/mixture.hpp"
#include "wlc/network.hpp"
#include "wlc/rng.hpp"
#include "wlc/stats.hpp"
#include "wlc/tv.hpp"

namespace wlc {

// Bounded continuous non-negative likelihood on R^d with a declared sup norm.
struct LikelihoodSpec {
    std::function<double(const std::vector<double>&)> evaluator;
    double sup_norm = 1.0;
    std::string description;
};

inline LikelihoodSpec make_constant_likelihood(double value) {
    if (value <= 0.0) throw ConfigError("constant likelihood must be positive");
    LikelihoodSpec l;
    l.evaluator = [value](const std::vector<double>&) { return value; };
    l.sup_norm = value;
    l.description = "constant";
    return l;
}

inline LikelihoodSpec make_gaussian_bump(std::vector<double> center, double width) {
    if (width <= 0.0) throw ConfigError("gaussian-bump width must be positive");
    LikelihoodSpec l;
    l.evaluator = [center = std::move(center), width](const std::vector<double>& x) {
        double q = 0.0;
        for (std::size_t i = 0; i < center.size(); ++i) {
            const double diff = x[i] - center[i];
            q += diff * diff;
        }
        return std::exp(-0.5 * q / (width * width));
    };
    l.sup_norm = 1.0;
    l.description = "gaussian-bump";
    return l;
}

// Logistic mollification of the indicator 1_{<x,u> > threshold}; the raw
// indicator is refused because the posterior theory needs continuity.
inline LikelihoodSpec make_smoothed_threshold(std::vector<double> direction, double threshold,
                                              double width) {
    if (width <= 0.0) throw ConfigError("smoothed-threshold width must be positive");
    LikelihoodSpec l;
    l.evaluator = [direction = std::move(direction), threshold, width](const std::vector<double>& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < direction.size(); ++i) s += direction[i] * x[i];
        return 1.0 / (1.0 + std::exp(-(s - threshold) / width));
    };
    l.sup_norm = 1.0;
    l.description = "smoothed-threshold";
    return l;
}

// The declared sup norm is a contract: sampled evaluations may not exceed it
// beyond rounding.
inline void validate_likelihood(const LikelihoodSpec& l, const SampleMatrix& samples) {
    if (l.sup_norm <= 0.0) throw ConfigError("likelihood sup_norm must be positive");
    std::vector<double> x(static_cast<std::size_t>(samples.cols));
    for (int i = 0; i < samples.rows; ++i) {
        for (int j = 0; j < samples.cols; ++j) x[static_cast<std::size_t>(j)] = samples.at(i, j);
        if (l.evaluator(x) > l.sup_norm * (1.0 + 1e-9))
            throw InvalidData("likelihood exceeds its declared sup norm");
    }
}

struct LikelihoodMeans {
    double e_lz = 0.0;  // mean of L over prior network samples
    double e_lg = 0.0;  // mean of L over N(0,K) draws
    double ci_lz = 0.0;
    double ci_lg = 0.0;
};

// Plain Monte Carlo means of the likelihood under the prior network law and
// under the Gaussian limit. An estimate within 3 CI of zero means the
// posterior is ill-conditioned at this sample size.
inline LikelihoodMeans estimate_likelihood_means(const SampleMatrix& samples_z, const SymMatrix& k,
                                                 const LikelihoodSpec& l, int n_g,
                                                 const RngStream& stream) {
    if (samples_z.rows < 1) throw InvalidData("estimate_likelihood_means: no prior samples");
    LikelihoodMeans out;
    {
        std::vector<double> vals(static_cast<std::size_t>(samples_z.rows));
        std::vector<double> x(static_cast<std::size_t>(samples_z.cols));
        for (int i = 0; i < samples_z.rows; ++i) {
            for (int j = 0; j < samples_z.cols; ++j) x[static_cast<std::size_t>(j)] = samples_z.at(i, j);
            vals[static_cast<std::size_t>(i)] = l.evaluator(x);
        }
        const auto ms = mean_sd(vals);
        out.e_lz = ms.mean;
        out.ci_lz = 1.96 * ms.se;
    }
    {
        const SymMatrix root = psd_sqrt(k);
        RngStream sub = stream.substream(1);
        std::vector<double> vals(static_cast<std::size_t>(n_g));
        std::vector<double> n(static_cast<std::size_t>(k.dim()));
        for (int i = 0; i < n_g; ++i) {
            for (auto& v : n) v = sub.next_gaussian();
            vals[static_cast<std::size_t>(i)] = l.evaluator(root.apply(n));
        }
        const auto ms = mean_sd(vals);
        out.e_lg = ms.mean;
        out.ci_lg = 1.96 * ms.se;
    }
    if (out.e_lz <= 3.0 * out.ci_lz || out.e_lg <= 3.0 * out.ci_lg)
        throw MassTooSmall("estimate_likelihood_means: likelihood mass indistinguishable from zero");
    return out;
}

// Posterior TV bound: reweighting the prior TV bound by the likelihood,
//   tv_post <= (||L||_inf / E[L(G)]) (1 + ||L||_inf / E[L(Z)]) tv_prior.
// Both ratios are scale-free in L.
inline double posterior_tv_bound(double prior_tv_bound, const LikelihoodSpec& l, double e_lz,
                                 double e_lg) {
    if (e_lz <= 0.0 || e_lg <= 0.0) throw MassTooSmall("posterior_tv_bound: nonpositive likelihood means");
    return (l.sup_norm / e_lg) * (1.0 + l.sup_norm / e_lz) * prior_tv_bound;
}

// New-input prediction gap: the (d+s)-dimensional reweighting pays one extra
// ||L||_inf factor; the prior bound supplied must be the (d+s)-dimensional one.
inline double posterior_predictive_tv_bound(double prior_tv_bound_ds, const LikelihoodSpec& l,
                                            double e_lz, double e_lg) {
    if (e_lz <= 0.0 || e_lg <= 0.0)
        throw MassTooSmall("posterior_predictive_tv_bound: nonpositive likelihood means");
    return (l.sup_norm * l.sup_norm / e_lg) * (1.0 + l.sup_norm / e_lz) * prior_tv_bound_ds;
}

// Numerical posterior TV at d <= 2: both densities are reweighted by L and
// renormalized on the grid, so the result is exact to grid error with no
// sampler diagnostics. The mass check applies to the unweighted densities
// (the grid must resolve the prior laws before any reweighting).
template <typename Density>
TvResult posterior_tv_numeric(Density&& mixture_density_z, const SymMatrix& k, const LikelihoodSpec& l,
                              const GridSpec& grid) {
    const int dim = grid.dim();
    if (dim != 1 && dim != 2) throw Unsupported("posterior_tv_numeric: dim must be 1 or 2");
    const int n = grid.points_per_axis;
    if (n < 3 || n % 2 == 0) throw InvalidData("posterior_tv_numeric: points_per_axis must be odd");
    const GaussianDensity phi_k(k);

    std::vector<double> node_w;      // full Simpson weight per node
    std::vector<double> coarse_w;    // stride-2 subgrid weight per node (0 off-subgrid)
    std::vector<double> lz, lg;      // L * p_Z, L * phi_K per node
    double mass_pz = 0.0, mass_pg = 0.0;

    auto axis_h = [&](int a) {
        return (grid.hi[static_cast<std::size_t>(a)] - grid.lo[static_cast<std::size_t>(a)]) / (n - 1);
    };
    const auto w0 = detail::simpson_weights(n, axis_h(0));
    const auto c0 = detail::simpson_weights((n + 1) / 2, 2.0 * axis_h(0));
    std::vector<double> x(static_cast<std::size_t>(dim));
    if (dim == 1) {
        for (int i = 0; i < n; ++i) {
            x[0] = grid.lo[0] + axis_h(0) * i;
            const double pz = mixture_density_z(x), pg = phi_k(x), lv = l.evaluator(x);
            const double w = w0[static_cast<std::size_t>(i)];
            mass_pz += w * pz;
            mass_pg += w * pg;
            node_w.push_back(w);
            coarse_w.push_back(i % 2 == 0 ? c0[static_cast<std::size_t>(i / 2)] : 0.0);
            lz.push_back(lv * pz);
            lg.push_back(lv * pg);
        }
    } else {
        const auto w1 = detail::simpson_weights(n, axis_h(1));
        const auto c1 = detail::simpson_weights((n + 1) / 2, 2.0 * axis_h(1));
        for (int i = 0; i < n; ++i) {
            x[0] = grid.lo[0] + axis_h(0) * i;
            for (int j = 0; j < n; ++j) {
                x[1] = grid.lo[1] + axis_h(1) * j;
                const double pz = mixture_density_z(x), pg = phi_k(x), lv = l.evaluator(x);
                const double w = w0[static_cast<std::size_t>(i)] * w1[static_cast<std::size_t>(j)];
                mass_pz += w * pz;
                mass_pg += w * pg;
                node_w.push_back(w);
                coarse_w.push_back((i % 2 == 0 && j % 2 == 0)
                                       ? c0[static_cast<std::size_t>(i / 2)] * c1[static_cast<std::size_t>(j / 2)]
                                       : 0.0);
                lz.push_back(lv * pz);
                lg.push_back(lv * pg);
            }
        }
    }
    if (mass_pz < 1.0 - 1e-6 || mass_pg < 1.0 - 1e-6)
        throw GridTooSmall("posterior_tv_numeric: grid captures too little prior mass");

    double norm_z = 0.0, norm_g = 0.0;
    for (std::size_t i = 0; i < node_w.size(); ++i) {
        norm_z += node_w[i] * lz[i];
        norm_g += node_w[i] * lg[i];
    }
    if (norm_z <= 0.0 || norm_g <= 0.0)
        throw MassTooSmall("posterior_tv_numeric: likelihood mass vanishes on the grid");

    double full = 0.0, coarse = 0.0;
    for (std::size_t i = 0; i < node_w.size(); ++i) {
        const double diff = std::abs(lz[i] / norm_z - lg[i] / norm_g);
        full += node_w[i] * diff;
        coarse += coarse_w[i] * diff;
    }
    TvResult r;
    r.value = 0.5 * full;
    r.error_estimate = 0.5 * std::abs(full - coarse);
    r.mass1 = mass_pz;
    r.mass2 = mass_pg;
    return r;
}

}  // namespace wlc
