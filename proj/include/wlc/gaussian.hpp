#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "wlc/errors.hpp"
#include "wlc/matrix.hpp"

namespace wlc {

// Centered Gaussian law N_d(0, covariance).
struct GaussianLaw {
    int dim;
    SymMatrix covariance;

    explicit GaussianLaw(SymMatrix cov) : dim(cov.dim()), covariance(std::move(cov)) {}
};

// Precomputed evaluator for the density
//   phi_M(x) = (2 pi)^{-d/2} det(M)^{-1/2} exp(-<x, M^{-1} x>/2).
// Keeps M^{-1} and the normalization so it can be applied across a grid or a
// mixture of draws without re-factorizing.
class GaussianDensity {
  public:
    explicit GaussianDensity(const SymMatrix& cov) : inv_(cov.dim()) {
        const auto d = detail::eig_sym(cov);
        double logdet = 0.0;
        if (d.values(0) <= 0.0) throw SingularMatrix("GaussianDensity: covariance not strictly PD");
        for (int i = 0; i < cov.dim(); ++i) logdet += std::log(d.values(i));
        inv_ = sym_inverse(cov);
        log_norm_ = -0.5 * (cov.dim() * std::log(2.0 * std::numbers::pi) + logdet);
    }

    double operator()(const std::vector<double>& x) const {
        const auto y = inv_.apply(x);
        double q = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) q += x[i] * y[i];
        return std::exp(log_norm_ - 0.5 * q);
    }

    const SymMatrix& inverse() const { return inv_; }

  private:
    SymMatrix inv_;
    double log_norm_ = 0.0;
};

inline double gaussian_density(const std::vector<double>& x, const GaussianLaw& law) {
    return GaussianDensity(law.covariance)(x);
}

// Relative entropy D(N(0,K1) || N(0,K2)) = (tr(K2^{-1} K1) - d + log det K2 / det K1) / 2.
inline double kl_gaussian(const GaussianLaw& law1, const GaussianLaw& law2) {
    if (law1.dim != law2.dim) throw InvalidData("kl_gaussian: dimension mismatch");
    const auto d1 = detail::eig_sym(law1.covariance);
    const auto d2 = detail::eig_sym(law2.covariance);
    if (d1.values(0) <= 0.0 || d2.values(0) <= 0.0)
        throw SingularMatrix("kl_gaussian: both covariances must be strictly PD");
    double logdet1 = 0.0, logdet2 = 0.0;
    for (int i = 0; i < law1.dim; ++i) {
        logdet1 += std::log(d1.values(i));
        logdet2 += std::log(d2.values(i));
    }
    const SymMatrix inv2 = sym_inverse(law2.covariance);
    const double tr = (inv2.eigen() * law1.covariance.eigen()).trace();
    return 0.5 * (tr - law1.dim + logdet2 - logdet1);
}

}  // namespace wlc
