#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "wlc/errors.hpp"
#include "wlc/hermite.hpp"
#include "wlc/matrix.hpp"

namespace wlc {

// The (A, K) pair of the entropy interpolation: A a candidate (conditional)
// covariance, K the strictly positive definite reference.
struct InterpolationPair {
    SymMatrix A;
    SymMatrix K;
    double lambda_K;  // min eigenvalue of K

    InterpolationPair(SymMatrix a, SymMatrix k) : A(std::move(a)), K(std::move(k)), lambda_K(0.0) {
        if (A.dim() != K.dim()) throw InvalidData("InterpolationPair: dimension mismatch");
        lambda_K = min_eig(K);
        if (lambda_K <= 0.0) throw NotPSD("InterpolationPair: K must be strictly PD");
    }

    int dim() const { return K.dim(); }
};

// Event E = { ||A - K||_op <= lambda(K)/2 }: inside it the whole segment
// Gamma_t stays uniformly positive definite (min eigenvalue >= lambda(K)/2).
inline bool event_E_holds(const InterpolationPair& pair) {
    return op_norm(pair.A - pair.K) <= 0.5 * pair.lambda_K;
}

// Gamma_t = t A + (1 - t) K.
inline SymMatrix gamma_t(const InterpolationPair& pair, double t) {
    return t * pair.A + (1.0 - t) * pair.K;
}

namespace detail {

inline void require_inside_event(const InterpolationPair& pair, const char* who) {
    if (!event_E_holds(pair)) throw OutsideEventE(std::string(who) + ": ||A-K||_op > lambda(K)/2");
}

}  // namespace detail

// Evaluator for h_k(A, t, x), the normalized k-th t-derivative of the
// Gaussian density ratio phi_{Gamma_t}/phi_K. Expanded as
//   h_k = 2^{-k} < M^{(x) k}, grad^{2k} phi_I / phi_I (Gamma_t^{-1/2} x) >,
//   M = Gamma_t^{-1/2} (A - K) Gamma_t^{-1/2},
// with the Hessian-tensor ratio written in multivariate Hermite polynomials.
// The contraction coefficients per Hermite multi-index are precomputed once,
// so repeated evaluation (Monte Carlo) costs one small polynomial per point.
class HkEvaluator {
  public:
    HkEvaluator(const InterpolationPair& pair, double t, int k) : k_(k), dim_(pair.dim()) {
        if (k < 1 || k > 4) throw Unsupported("HkEvaluator: k must be in 1..4");
        if (dim_ > 4) throw Unsupported("HkEvaluator: dim must be <= 4");
        detail::require_inside_event(pair, "HkEvaluator");

        const auto g = detail::eig_sym(gamma_t(pair, t));
        Eigen::VectorXd inv_sqrt(dim_);
        for (int i = 0; i < dim_; ++i) inv_sqrt(i) = 1.0 / std::sqrt(g.values(i));
        whitener_ = SymMatrix::from_eigen(g.vectors * inv_sqrt.asDiagonal() * g.vectors.transpose());
        const SymMatrix m = conjugate(whitener_, pair.A - pair.K);

        // Fold all d^{2k} index tuples prod M_{i_1 i_2} ... M_{i_{2k-1} i_{2k}}
        // into coefficients per Hermite multi-index of total degree 2k.
        std::map<std::vector<int>, double> acc;
        std::vector<int> tuple(static_cast<std::size_t>(2 * k), 0);
        while (true) {
            double c = 1.0;
            for (int r = 0; r < k; ++r)
                c *= m(tuple[static_cast<std::size_t>(2 * r)], tuple[static_cast<std::size_t>(2 * r + 1)]);
            if (c != 0.0) {
                std::vector<int> j(static_cast<std::size_t>(dim_), 0);
                for (int idx : tuple) ++j[static_cast<std::size_t>(idx)];
                acc[j] += c;
            }
            int pos = 0;
            while (pos < 2 * k) {
                if (++tuple[static_cast<std::size_t>(pos)] < dim_) break;
                tuple[static_cast<std::size_t>(pos)] = 0;
                ++pos;
            }
            if (pos == 2 * k) break;
        }
        const double scale = std::pow(0.5, k);
        for (auto& [j, c] : acc) terms_.push_back({j, scale * c});
    }

    double operator()(const std::vector<double>& x) const {
        const auto y = whitener_.apply(x);
        double total = 0.0;
        // Per-axis Hermite values up to degree 2k, then one product per term.
        std::vector<std::vector<double>> per_axis(static_cast<std::size_t>(dim_));
        for (int a = 0; a < dim_; ++a)
            hermite_values(2 * k_, y[static_cast<std::size_t>(a)], per_axis[static_cast<std::size_t>(a)]);
        for (const auto& term : terms_) {
            double p = term.coefficient;
            for (int a = 0; a < dim_; ++a)
                p *= per_axis[static_cast<std::size_t>(a)][static_cast<std::size_t>(term.multi_index[static_cast<std::size_t>(a)])];
            total += p;
        }
        return total;
    }

    const SymMatrix& whitener() const { return whitener_; }

  private:
    struct Term {
        std::vector<int> multi_index;
        double coefficient;
    };

    int k_;
    int dim_;
    SymMatrix whitener_{1};
    std::vector<Term> terms_;
};

inline double h_k_eval(const InterpolationPair& pair, double t, const std::vector<double>& x, int k) {
    return HkEvaluator(pair, t, k)(x);
}

namespace detail {

// tr((Gamma_t^{-1}(A-K))^j) via the eigenvalues of the similar symmetric
// matrix Gamma_t^{-1/2}(A-K)Gamma_t^{-1/2}.
inline std::vector<double> gamma_trace_powers(const InterpolationPair& pair, double t, int max_power) {
    const auto g = eig_sym(gamma_t(pair, t));
    Eigen::VectorXd inv_sqrt(pair.dim());
    for (int i = 0; i < pair.dim(); ++i) inv_sqrt(i) = 1.0 / std::sqrt(g.values(i));
    const SymMatrix w = SymMatrix::from_eigen(g.vectors * inv_sqrt.asDiagonal() * g.vectors.transpose());
    const SymMatrix m = conjugate(w, pair.A - pair.K);
    std::vector<double> tp(static_cast<std::size_t>(max_power) + 1, 0.0);
    for (int j = 0; j <= max_power; ++j) tp[static_cast<std::size_t>(j)] = trace_power(m, j);
    return tp;
}

}  // namespace detail

// Exact second moment E[h_k(A,t,X_t)^2] for X_t ~ N(0, Gamma_t) and a fixed
// matrix pair inside the event E, as a trace polynomial in
// T_j = tr((Gamma_t^{-1}(A-K))^j):
//   k=1:  T_2 / 2
//   k=2:  T_4 + T_2^2 / 2
//   k=3:  3/4 T_2^3 + 6 T_6 + 9/2 T_2 T_4
//   k=4:  3/2 T_2^4 + 18 T_2^2 T_4 + 18 T_4^2 + 72 T_8 + 48 T_2 T_6
inline double hk_second_moment(const InterpolationPair& pair, double t, int k) {
    if (k < 1 || k > 4) throw Unsupported("hk_second_moment: k must be in 1..4");
    detail::require_inside_event(pair, "hk_second_moment");
    const auto tp = detail::gamma_trace_powers(pair, t, 2 * k);
    const double t2 = tp[2];
    switch (k) {
        case 1:
            return 0.5 * t2;
        case 2:
            return tp[4] + 0.5 * t2 * t2;
        case 3:
            return 0.75 * t2 * t2 * t2 + 6.0 * tp[6] + 4.5 * t2 * tp[4];
        default:
            return 1.5 * t2 * t2 * t2 * t2 + 18.0 * t2 * t2 * tp[4] + 18.0 * tp[4] * tp[4] +
                   72.0 * tp[8] + 48.0 * t2 * tp[6];
    }
}

// Higher even moments of h_1 (the k=1 interpolation also has closed 4th and
// 6th moments):
//   E[h_1^4] = 3 T_4 + 3/4 T_2^2
//   E[h_1^6] = 60 T_6 + 15/8 T_2^3 + 10 T_3^2 + 45/2 T_2 T_4
inline double h1_moment(const InterpolationPair& pair, double t, int p) {
    detail::require_inside_event(pair, "h1_moment");
    const auto tp = detail::gamma_trace_powers(pair, t, 6);
    switch (p) {
        case 2:
            return 0.5 * tp[2];
        case 4:
            return 3.0 * tp[4] + 0.75 * tp[2] * tp[2];
        case 6:
            return 60.0 * tp[6] + 1.875 * tp[2] * tp[2] * tp[2] + 10.0 * tp[3] * tp[3] +
                   22.5 * tp[2] * tp[4];
        default:
            throw Unsupported("h1_moment: p must be 2, 4 or 6");
    }
}

}  // namespace wlc
