#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "wlc/errors.hpp"
#include "wlc/gaussian.hpp"
#include "wlc/matrix.hpp"
#include "wlc/network.hpp"
#include "wlc/rng.hpp"

namespace wlc {

// Monte Carlo estimate of the density of a conditionally Gaussian vector:
// x -> mean over covariance draws of phi_{A_s}(x). The 1-d case is stored as
// flat (normalization, inverse-variance) pairs since mixtures get evaluated
// across full integration grids.
class MixtureDensity {
  public:
    explicit MixtureDensity(const std::vector<SymMatrix>& draws) {
        if (draws.empty()) throw InvalidData("MixtureDensity: no draws");
        dim_ = draws.front().dim();
        if (dim_ == 1) {
            scalar_.reserve(draws.size());
            for (const auto& a : draws) {
                const double v = a(0, 0);
                if (v <= 0.0) throw SingularMatrix("MixtureDensity: singular 1x1 draw");
                scalar_.push_back({1.0 / std::sqrt(2.0 * std::numbers::pi * v), 0.5 / v});
            }
        } else {
            components_.reserve(draws.size());
            for (const auto& a : draws) components_.emplace_back(a);
        }
    }

    int dim() const { return dim_; }

    double operator()(const std::vector<double>& x) const {
        if (dim_ == 1) {
            const double x2 = x[0] * x[0];
            double s = 0.0;
            for (const auto& c : scalar_) s += c.norm * std::exp(-c.half_inv_var * x2);
            return s / static_cast<double>(scalar_.size());
        }
        double s = 0.0;
        for (const auto& c : components_) s += c(x);
        return s / static_cast<double>(components_.size());
    }

  private:
    struct Scalar {
        double norm;
        double half_inv_var;
    };

    int dim_ = 0;
    std::vector<Scalar> scalar_;
    std::vector<GaussianDensity> components_;
};

// Independent conditional-covariance draws, one substream per sample index.
inline std::vector<SymMatrix> draw_covariances(const NetworkConfig& config, const ProbeSet& probes,
                                               int n, const RngStream& stream) {
    std::vector<SymMatrix> draws;
    draws.reserve(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) {
        const ParameterDraw params = sample_parameters(config, stream.substream(static_cast<std::uint64_t>(s)));
        draws.push_back(conditional_covariance(params, probes, config).matrix);
    }
    return draws;
}

}  // namespace wlc
