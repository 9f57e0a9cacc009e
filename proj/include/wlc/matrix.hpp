#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <vector>

#include "wlc/errors.hpp"

namespace wlc {

// Dense symmetric matrix with a dimension tag. Symmetry is enforced at
// construction by averaging (M + M^T)/2: Monte Carlo covariance estimates are
// symmetric only up to rounding, and every consumer below relies on exact
// entry equality entries(i,j) == entries(j,i).
class SymMatrix {
  public:
    explicit SymMatrix(int dim) : dim_(dim), a_(static_cast<std::size_t>(dim) * dim, 0.0) {
        if (dim < 1) throw InvalidMatrix("SymMatrix: dim must be >= 1");
    }

    SymMatrix(int dim, const std::vector<double>& row_major) : SymMatrix(dim) {
        if (row_major.size() != a_.size()) throw InvalidMatrix("SymMatrix: wrong entry count");
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                a_[idx(i, j)] = 0.5 * (row_major[idx(i, j)] + row_major[idx(j, i)]);
    }

    SymMatrix(std::initializer_list<std::initializer_list<double>> rows)
        : SymMatrix(static_cast<int>(rows.size()), flatten(rows)) {}

    static SymMatrix identity(int dim) {
        SymMatrix m(dim);
        for (int i = 0; i < dim; ++i) m.set(i, i, 1.0);
        return m;
    }

    static SymMatrix diagonal(const std::vector<double>& d) {
        SymMatrix m(static_cast<int>(d.size()));
        for (int i = 0; i < m.dim(); ++i) m.set(i, i, d[static_cast<std::size_t>(i)]);
        return m;
    }

    int dim() const { return dim_; }
    double operator()(int i, int j) const { return a_[idx(i, j)]; }

    // Symmetric write: assigns both (i,j) and (j,i).
    void set(int i, int j, double v) {
        a_[idx(i, j)] = v;
        a_[idx(j, i)] = v;
    }

    const std::vector<double>& data() const { return a_; }

    bool finite() const {
        return std::all_of(a_.begin(), a_.end(), [](double v) { return std::isfinite(v); });
    }

    Eigen::MatrixXd eigen() const {
        return Eigen::Map<const Eigen::MatrixXd>(a_.data(), dim_, dim_);
    }

    static SymMatrix from_eigen(const Eigen::MatrixXd& m) {
        SymMatrix out(static_cast<int>(m.rows()));
        for (int i = 0; i < out.dim(); ++i)
            for (int j = 0; j < out.dim(); ++j) out.a_[out.idx(i, j)] = 0.5 * (m(i, j) + m(j, i));
        return out;
    }

    friend SymMatrix operator+(const SymMatrix& x, const SymMatrix& y) {
        return combined(x, y, 1.0, 1.0);
    }
    friend SymMatrix operator-(const SymMatrix& x, const SymMatrix& y) {
        return combined(x, y, 1.0, -1.0);
    }
    friend SymMatrix operator*(double c, const SymMatrix& x) {
        SymMatrix out(x.dim_);
        for (std::size_t k = 0; k < x.a_.size(); ++k) out.a_[k] = c * x.a_[k];
        return out;
    }

    std::vector<double> apply(const std::vector<double>& v) const {
        std::vector<double> out(static_cast<std::size_t>(dim_), 0.0);
        for (int i = 0; i < dim_; ++i) {
            double s = 0.0;
            for (int j = 0; j < dim_; ++j) s += a_[idx(i, j)] * v[static_cast<std::size_t>(j)];
            out[static_cast<std::size_t>(i)] = s;
        }
        return out;
    }

  private:
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(dim_) +
               static_cast<std::size_t>(j);
    }

    static std::vector<double> flatten(std::initializer_list<std::initializer_list<double>> rows) {
        std::vector<double> out;
        for (const auto& r : rows)
            for (double v : r) out.push_back(v);
        return out;
    }

    static SymMatrix combined(const SymMatrix& x, const SymMatrix& y, double cx, double cy) {
        if (x.dim_ != y.dim_) throw InvalidMatrix("SymMatrix: dimension mismatch");
        SymMatrix out(x.dim_);
        for (std::size_t k = 0; k < x.a_.size(); ++k) out.a_[k] = cx * x.a_[k] + cy * y.a_[k];
        return out;
    }

    int dim_;
    std::vector<double> a_;
};

struct SpectralSummary {
    double min_eig = 0.0;
    double op_norm = 0.0;  // max |eigenvalue|
    double hs_norm = 0.0;  // Frobenius, sqrt(sum of squared eigenvalues)
    std::vector<double> eigenvalues;  // ascending
};

namespace detail {

struct EigenDecomp {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // columns
};

inline EigenDecomp eig_sym(const SymMatrix& m) {
    if (!m.finite()) throw InvalidMatrix("spectral: non-finite entries");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.eigen());
    if (solver.info() != Eigen::Success) throw InvalidMatrix("spectral: eigensolver failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace detail

// All norms derive from one eigendecomposition so that they are mutually
// consistent to solver tolerance.
inline SpectralSummary spectral(const SymMatrix& m) {
    const auto d = detail::eig_sym(m);
    SpectralSummary s;
    s.eigenvalues.assign(d.values.data(), d.values.data() + d.values.size());
    s.min_eig = d.values(0);
    double op = 0.0, hs2 = 0.0;
    for (double v : s.eigenvalues) {
        op = std::max(op, std::abs(v));
        hs2 += v * v;
    }
    s.op_norm = op;
    s.hs_norm = std::sqrt(hs2);
    return s;
}

inline double hs_norm(const SymMatrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    return std::sqrt(s);
}

inline double op_norm(const SymMatrix& m) { return spectral(m).op_norm; }

inline double min_eig(const SymMatrix& m) { return spectral(m).min_eig; }

inline double trace(const SymMatrix& m) {
    double t = 0.0;
    for (int i = 0; i < m.dim(); ++i) t += m(i, i);
    return t;
}

// Relative tolerances: the source theorems assume exact PSD/invertibility,
// floating point does not.
inline double psd_tolerance(double op) { return 1e-10 * op; }
inline double inv_tolerance(double op) { return 1e-12 * op; }

// Unique PSD square root. Eigenvalues in [-eps_psd, 0) are clipped to zero;
// anything below -eps_psd is a genuine PSD violation.
inline SymMatrix psd_sqrt(const SymMatrix& m) {
    const auto d = detail::eig_sym(m);
    const double op = std::max(std::abs(d.values(0)), std::abs(d.values(d.values.size() - 1)));
    const double eps = psd_tolerance(op);
    Eigen::VectorXd sq(d.values.size());
    for (int i = 0; i < d.values.size(); ++i) {
        if (d.values(i) < -eps) throw NotPSD("psd_sqrt: eigenvalue below -eps_psd");
        sq(i) = std::sqrt(std::max(0.0, d.values(i)));
    }
    return SymMatrix::from_eigen(d.vectors * sq.asDiagonal() * d.vectors.transpose());
}

inline SymMatrix sym_inverse(const SymMatrix& m) {
    const auto d = detail::eig_sym(m);
    const double op = std::max(std::abs(d.values(0)), std::abs(d.values(d.values.size() - 1)));
    if (d.values(0) <= inv_tolerance(op))
        throw SingularMatrix("sym_inverse: min eigenvalue at or below eps_inv");
    Eigen::VectorXd inv(d.values.size());
    for (int i = 0; i < d.values.size(); ++i) inv(i) = 1.0 / d.values(i);
    return SymMatrix::from_eigen(d.vectors * inv.asDiagonal() * d.vectors.transpose());
}

// Moore-Penrose pseudoinverse; rank decided relative to the largest |eigenvalue|.
inline SymMatrix sym_pinv(const SymMatrix& m, double rel_tol = 1e-12) {
    const auto d = detail::eig_sym(m);
    double op = 0.0;
    for (int i = 0; i < d.values.size(); ++i) op = std::max(op, std::abs(d.values(i)));
    Eigen::VectorXd inv(d.values.size());
    for (int i = 0; i < d.values.size(); ++i)
        inv(i) = (std::abs(d.values(i)) > rel_tol * op && op > 0.0) ? 1.0 / d.values(i) : 0.0;
    return SymMatrix::from_eigen(d.vectors * inv.asDiagonal() * d.vectors.transpose());
}

// Sum of k-th powers of eigenvalues; tr(M^0) = dim by convention.
inline double trace_power(const SymMatrix& m, int k) {
    if (k == 0) return static_cast<double>(m.dim());
    if (k < 0 || k > 8) throw Unsupported("trace_power: k must be in [0, 8]");
    const auto d = detail::eig_sym(m);
    double s = 0.0;
    for (int i = 0; i < d.values.size(); ++i) s += std::pow(d.values(i), k);
    return s;
}

// S * B * S for symmetric S, B (the result is symmetric exactly).
inline SymMatrix conjugate(const SymMatrix& s, const SymMatrix& b) {
    return SymMatrix::from_eigen(s.eigen() * b.eigen() * s.eigen());
}

}  // namespace wlc
