#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "wlc/errors.hpp"
#include "wlc/matrix.hpp"

namespace wlc {

// Gauss-Hermite rule against the standard Gaussian measure: sum w_i f(x_i)
// approximates E[f(N)] for N ~ N(0,1), exact for polynomials of degree
// <= 2*order - 1. Weights sum to one; nodes are symmetric about zero.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    int order = 0;
};

// Golub-Welsch on the Jacobi matrix of the probabilists' Hermite basis
// (zero diagonal, off-diagonal sqrt(k)). Nodes come out symmetric up to
// rounding; they are mirrored exactly afterwards so the symmetry invariant
// holds bit-for-bit.
inline QuadratureRule gauss_hermite_rule(int order) {
    if (order < 1) throw Unsupported("gauss_hermite_rule: order must be >= 1");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        const double b = std::sqrt(static_cast<double>(k));
        jacobi(k, k - 1) = b;
        jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    QuadratureRule rule;
    rule.order = order;
    rule.nodes.resize(static_cast<std::size_t>(order));
    rule.weights.resize(static_cast<std::size_t>(order));
    double wsum = 0.0;
    for (int i = 0; i < order; ++i) {
        rule.nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
        const double w0 = solver.eigenvectors()(0, i);
        rule.weights[static_cast<std::size_t>(i)] = w0 * w0;
        wsum += w0 * w0;
    }
    for (auto& w : rule.weights) w /= wsum;
    for (int i = 0, j = order - 1; i < j; ++i, --j) {
        const double x = 0.5 * (rule.nodes[static_cast<std::size_t>(i)] - rule.nodes[static_cast<std::size_t>(j)]);
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.nodes[static_cast<std::size_t>(j)] = x;
        const double w = 0.5 * (rule.weights[static_cast<std::size_t>(i)] + rule.weights[static_cast<std::size_t>(j)]);
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(j)] = w;
    }
    if (order % 2 == 1) rule.nodes[static_cast<std::size_t>(order / 2)] = 0.0;
    return rule;
}

inline const QuadratureRule& cached_gauss_hermite_rule(int order) {
    static std::map<int, QuadratureRule> cache;
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, gauss_hermite_rule(order)).first;
    return it->second;
}

// Gauss-Legendre on [-1, 1] (weights sum to 2), again by Golub-Welsch.
inline QuadratureRule gauss_legendre_rule(int order) {
    if (order < 1) throw Unsupported("gauss_legendre_rule: order must be >= 1");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        const double b = static_cast<double>(k) / std::sqrt(4.0 * k * k - 1.0);
        jacobi(k, k - 1) = b;
        jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    QuadratureRule rule;
    rule.order = order;
    rule.nodes.resize(static_cast<std::size_t>(order));
    rule.weights.resize(static_cast<std::size_t>(order));
    for (int i = 0; i < order; ++i) {
        rule.nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
        const double w0 = solver.eigenvectors()(0, i);
        rule.weights[static_cast<std::size_t>(i)] = 2.0 * w0 * w0;
    }
    return rule;
}

inline const QuadratureRule& cached_gauss_legendre_rule(int order) {
    static std::map<int, QuadratureRule> cache;
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, gauss_legendre_rule(order)).first;
    return it->second;
}

// Integral of f over [lo, hi] by composite Gauss-Legendre (`panels` equal
// panels, `order` nodes each); spectral accuracy for smooth f.
template <typename F>
double integrate_legendre(F&& f, double lo, double hi, int panels = 6, int order = 32) {
    const auto& rule = cached_gauss_legendre_rule(order);
    const double h = (hi - lo) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double a = lo + p * h;
        const double mid = a + 0.5 * h;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            total += 0.5 * h * rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
    }
    return total;
}

// E[f(Z)] for Z ~ N(0, cov), by tensorized Gauss-Hermite after whitening with
// psd_sqrt(cov). Axes whose eigenvalue is below 1e-12 of the largest carry no
// mass and are collapsed (this is the |rho| -> 1 bivariate degeneracy: two
// nearly coincident probe inputs). f takes a vector of length cov.dim().
template <typename F>
double gauss_expectation(F&& f, const SymMatrix& cov, int order) {
    const int m = cov.dim();
    if (m > 4) throw Unsupported("gauss_expectation: dimension > 4, use Monte Carlo");
    const auto& rule = cached_gauss_hermite_rule(order);

    const auto decomp = detail::eig_sym(cov);
    double max_eig = 0.0;
    for (int i = 0; i < m; ++i) max_eig = std::max(max_eig, std::abs(decomp.values(i)));
    const double eps = psd_tolerance(max_eig);
    std::vector<int> active;
    Eigen::MatrixXd factor(m, m);  // columns scaled eigenvectors, kept axes only
    for (int i = 0; i < m; ++i) {
        if (decomp.values(i) < -eps) throw NotPSD("gauss_expectation: covariance not PSD");
        const double lam = std::max(0.0, decomp.values(i));
        if (max_eig > 0.0 && lam > 1e-12 * max_eig) {
            factor.col(static_cast<int>(active.size())) = decomp.vectors.col(i) * std::sqrt(lam);
            active.push_back(i);
        }
    }
    const int rank = static_cast<int>(active.size());
    if (rank == 0) {
        std::vector<double> zero(static_cast<std::size_t>(m), 0.0);
        return f(zero);
    }

    std::vector<std::size_t> index(static_cast<std::size_t>(rank), 0);
    std::vector<double> point(static_cast<std::size_t>(m));
    double total = 0.0;
    const std::size_t n = rule.nodes.size();
    while (true) {
        double w = 1.0;
        for (int a = 0; a < m; ++a) point[static_cast<std::size_t>(a)] = 0.0;
        for (int a = 0; a < rank; ++a) {
            const std::size_t i = index[static_cast<std::size_t>(a)];
            w *= rule.weights[i];
            const double x = rule.nodes[i];
            for (int r = 0; r < m; ++r) point[static_cast<std::size_t>(r)] += factor(r, a) * x;
        }
        total += w * f(point);
        int axis = 0;
        while (axis < rank) {
            if (++index[static_cast<std::size_t>(axis)] < n) break;
            index[static_cast<std::size_t>(axis)] = 0;
            ++axis;
        }
        if (axis == rank) break;
    }
    return total;
}

}  // namespace wlc
