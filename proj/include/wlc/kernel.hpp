#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "wlc/activation.hpp"
#include "wlc/errors.hpp"
#include "wlc/isserlis.hpp"
#include "wlc/matrix.hpp"
#include "wlc/multiindex.hpp"
#include "wlc/network.hpp"
#include "wlc/quadrature.hpp"

namespace wlc {

// Infinite-width covariances K^(1)..K^(L+1) over the extended index set
// (probe, multi-index in M_q^(p)), row/column (i, J) flattened as
// i * |M_q| + position(J).
struct KernelStack {
    std::vector<SymMatrix> layers;
    int d = 0;
    int q = 0;
    int quadrature_order = 0;
    std::vector<std::vector<int>> index_set;
    double refinement_gap = 0.0;       // max entry change when the order doubles
    bool quadrature_converged = true;  // refinement_gap <= 1e-8

    int block() const { return static_cast<int>(index_set.size()); }
    int flat(int probe, int comp) const { return probe * block() + comp; }
    const SymMatrix& final_layer() const { return layers.back(); }

    // d x d matrix over the probes' chosen (x^(j), J^(j)) pairs: the K that
    // enters the bound certificates.
    SymMatrix probe_matrix(const ProbeSet& probes) const {
        SymMatrix out(d);
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j)
                out.set(i, j, final_layer()(flat(i, probes.component_of(i)), flat(j, probes.component_of(j))));
        return out;
    }
};

namespace detail {

// Faa di Bruno expansion of V^J sigma(G) for |J| <= 2:
//   J = 0:        sigma(G)
//   J = e_a:      sigma'(G) V_a G
//   J = e_a+e_b:  sigma''(G) V_a G V_b G + sigma'(G) V_a V_b G
struct FaaTerm {
    int sigma_order;
    std::vector<std::vector<int>> factors;  // multi-indices of the V^I G factors
};

inline std::vector<FaaTerm> faa_terms(const std::vector<int>& j_index, int p) {
    const int order = multi_index_order(j_index);
    if (order == 0) return {{0, {}}};
    std::vector<int> dirs;
    for (int a = 0; a < p; ++a)
        for (int rep = 0; rep < j_index[static_cast<std::size_t>(a)]; ++rep) dirs.push_back(a);
    auto unit = [p](int a) {
        std::vector<int> e(static_cast<std::size_t>(p), 0);
        e[static_cast<std::size_t>(a)] = 1;
        return e;
    };
    if (order == 1) return {{1, {unit(dirs[0])}}};
    if (order == 2) {
        std::vector<int> pair = unit(dirs[0]);
        pair[static_cast<std::size_t>(dirs[1])] += 1;
        return {{2, {unit(dirs[0]), unit(dirs[1])}}, {1, {pair}}};
    }
    throw Unsupported("faa_terms: |J| > 2");
}

inline double sigma_derivative(const ActivationSpec& act, int order, double x) {
    switch (order) {
        case 0: return act.value(x);
        case 1: return act.deriv1(x);
        default: return act.deriv2(x);
    }
}

// E[relu(G1) relu(G2)] for (G1,G2) ~ N2(0, [[v1,c],[c,v2]]). Tensor
// Gauss-Hermite converges only algebraically across the relu kink, far short
// of the 1e-8 the oracle cross-checks demand, so this moment is computed by
// conditioning: E[relu(N(mu,tau^2))] = mu Phi(mu/tau) + tau phi(mu/tau), then
// a half-line Gauss-Legendre integral in the conditioning variable. The route
// stays independent of the arc-cosine closed form used as the test oracle.
inline double relu_product_moment(const SymMatrix& cov) {
    const double v1 = cov(0, 0), v2 = cov(1, 1), c = cov(0, 1);
    if (v1 <= 0.0 || v2 <= 0.0) return 0.0;
    const double s2 = std::sqrt(v2);
    const double slope = c / v2;
    const double tau = std::sqrt(std::max(0.0, v1 - c * c / v2));
    const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    auto hinge_mean = [&](double mu) {
        if (tau == 0.0) return mu > 0.0 ? mu : 0.0;
        const double z = mu / tau;
        const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
        const double pdf = inv_sqrt2pi * std::exp(-0.5 * z * z);
        return mu * cdf + tau * pdf;
    };
    auto integrand = [&](double g) {
        const double density = inv_sqrt2pi / s2 * std::exp(-0.5 * g * g / v2);
        return g * hinge_mean(slope * g) * density;
    };
    return integrate_legendre(integrand, 0.0, 12.0 * s2, 8, 40);
}

// One entry of the layer recursion
//   K^{(l+1)}[(i,J),(j,J')] = C_b [J=0][J'=0] + C_W E[V^J s(G(x_i)) V^{J'} s(G(x_j))].
// The derivative components (V^I G) are conditioned on (G(x_i), G(x_j)): the
// inner conditional moment is a polynomial obtained from the regression
// coefficients plus Isserlis on the conditional covariance, and the outer
// 2-d expectation is Gauss-Hermite over the previous layer's (G_1, G_2) block.
inline double recursion_entry(const KernelStack& stack, const SymMatrix& prev, int i,
                              const std::vector<int>& ji, int j, const std::vector<int>& jj,
                              const ActivationSpec& act, double c_b, double c_w, int p, int order) {
    const auto terms1 = faa_terms(ji, p);
    const auto terms2 = faa_terms(jj, p);
    SymMatrix sigma_gg(2);
    sigma_gg.set(0, 0, prev(stack.flat(i, 0), stack.flat(i, 0)));
    sigma_gg.set(0, 1, prev(stack.flat(i, 0), stack.flat(j, 0)));
    sigma_gg.set(1, 1, prev(stack.flat(j, 0), stack.flat(j, 0)));
    const SymMatrix gg_pinv = sym_pinv(sigma_gg);

    double total = 0.0;
    for (const auto& t1 : terms1) {
        for (const auto& t2 : terms2) {
            // Flat list of derivative components: (probe, multi-index).
            std::vector<int> comp_rows;
            for (const auto& f : t1.factors)
                comp_rows.push_back(stack.flat(i, multi_index_position(stack.index_set, f)));
            for (const auto& f : t2.factors)
                comp_rows.push_back(stack.flat(j, multi_index_position(stack.index_set, f)));
            const int nw = static_cast<int>(comp_rows.size());
            const int gi = stack.flat(i, 0);
            const int gj = stack.flat(j, 0);

            double value = 0.0;
            if (nw == 0 && act.kind == ActivationKind::relu && t1.sigma_order == 0 &&
                t2.sigma_order == 0) {
                value = relu_product_moment(sigma_gg);
            } else if (nw == 0) {
                value = gauss_expectation(
                    [&](const std::vector<double>& g) {
                        return sigma_derivative(act, t1.sigma_order, g[0]) *
                               sigma_derivative(act, t2.sigma_order, g[1]);
                    },
                    sigma_gg, order);
            } else {
                Eigen::MatrixXd swg(nw, 2);
                for (int w = 0; w < nw; ++w) {
                    swg(w, 0) = prev(comp_rows[static_cast<std::size_t>(w)], gi);
                    swg(w, 1) = prev(comp_rows[static_cast<std::size_t>(w)], gj);
                }
                SymMatrix sww(nw);
                for (int a = 0; a < nw; ++a)
                    for (int b = a; b < nw; ++b)
                        sww.set(a, b, prev(comp_rows[static_cast<std::size_t>(a)], comp_rows[static_cast<std::size_t>(b)]));
                const Eigen::MatrixXd regression = swg * gg_pinv.eigen();
                const SymMatrix cond_cov =
                    SymMatrix::from_eigen(sww.eigen() - regression * swg.transpose());

                // Even subsets S of the components: prod of conditional means
                // off S times the Wick moment of the fluctuation on S.
                value = gauss_expectation(
                    [&](const std::vector<double>& g) {
                        double mu[4];
                        for (int w = 0; w < nw; ++w) mu[w] = regression(w, 0) * g[0] + regression(w, 1) * g[1];
                        double moment = 0.0;
                        for (int mask = 0; mask < (1 << nw); ++mask) {
                            if (__builtin_popcount(static_cast<unsigned>(mask)) % 2 != 0) continue;
                            double mean_part = 1.0;
                            std::vector<int> idx;
                            for (int w = 0; w < nw; ++w) {
                                if (mask & (1 << w))
                                    idx.push_back(w);
                                else
                                    mean_part *= mu[w];
                            }
                            moment += mean_part * isserlis_moment(cond_cov, idx);
                        }
                        return sigma_derivative(act, t1.sigma_order, g[0]) *
                               sigma_derivative(act, t2.sigma_order, g[1]) * moment;
                    },
                    sigma_gg, order);
            }
            total += value;
        }
    }
    double entry = c_w * total;
    if (multi_index_order(ji) == 0 && multi_index_order(jj) == 0) entry += c_b;
    return entry;
}

// Exact extended base case: K^(1)(x,y) = C_b + (C_W/n_0) <x,y> is affine, so
// V^J V^{J'} K^(1) is nonzero only for |J|, |J'| <= 1.
inline SymMatrix base_layer(const NetworkConfig& config, const ProbeSet& probes,
                            const std::vector<std::vector<int>>& index_set) {
    const int d = probes.dim();
    const int block = static_cast<int>(index_set.size());
    const double scale = config.c_w / config.n0();
    auto vec_for = [&](int probe, const std::vector<int>& j) -> const std::vector<double>* {
        const int order = multi_index_order(j);
        if (order == 0) return &probes.inputs[static_cast<std::size_t>(probe)];
        if (order == 1) {
            for (int a = 0; a < probes.n_directions(); ++a)
                if (j[static_cast<std::size_t>(a)] == 1) return &probes.directions[static_cast<std::size_t>(a)];
        }
        return nullptr;  // order 2: derivative of an affine kernel vanishes
    };
    SymMatrix out(d * block);
    for (int i = 0; i < d; ++i) {
        for (const auto& ji : index_set) {
            const int row = i * block + multi_index_position(index_set, ji);
            for (int j = 0; j < d; ++j) {
                for (const auto& jj : index_set) {
                    const int col = j * block + multi_index_position(index_set, jj);
                    if (col < row) continue;
                    const auto* u = vec_for(i, ji);
                    const auto* v = vec_for(j, jj);
                    double e = 0.0;
                    if (u && v) {
                        for (std::size_t s = 0; s < u->size(); ++s) e += (*u)[s] * (*v)[s];
                        e *= scale;
                    }
                    if (multi_index_order(ji) == 0 && multi_index_order(jj) == 0) e += config.c_b;
                    out.set(row, col, e);
                }
            }
        }
    }
    return out;
}

inline KernelStack build_stack(const NetworkConfig& config, const ProbeSet& probes, int q, int order) {
    KernelStack stack;
    stack.d = probes.dim();
    stack.q = q;
    stack.quadrature_order = order;
    stack.index_set = multi_index_set(probes.n_directions(), q);
    stack.layers.push_back(base_layer(config, probes, stack.index_set));
    const int block = stack.block();
    const int n = stack.d * block;
    for (int layer = 2; layer <= config.depth + 1; ++layer) {
        const SymMatrix& prev = stack.layers.back();
        SymMatrix next(n);
        for (int i = 0; i < stack.d; ++i)
            for (int ci = 0; ci < block; ++ci)
                for (int j = 0; j < stack.d; ++j)
                    for (int cj = 0; cj < block; ++cj) {
                        const int row = stack.flat(i, ci);
                        const int col = stack.flat(j, cj);
                        if (col < row) continue;
                        next.set(row, col,
                                 recursion_entry(stack, prev, i, stack.index_set[static_cast<std::size_t>(ci)], j,
                                                 stack.index_set[static_cast<std::size_t>(cj)], config.activation,
                                                 config.c_b, config.c_w, probes.n_directions(), order));
                    }
        stack.layers.push_back(std::move(next));
    }
    return stack;
}

}  // namespace detail

// Layer-wise kernel recursion at q = 0:
//   K^(1) = C_b + (C_W/n_0) <x,y>,
//   K^{(l+1)} = C_b + C_W E[s(G_1) s(G_2)], (G_1,G_2) ~ N_2(0, 2x2 block of K^(l)).
// When check_refinement is set, the stack is recomputed at double order and
// the largest entry change recorded; a gap above 1e-8 clears the converged flag.
inline KernelStack kernel_recursion(const NetworkConfig& config, const ProbeSet& probes, int order = 96,
                                    bool check_refinement = true) {
    config.check();
    if (probes.q != 0) throw Unsupported("kernel_recursion: probes must have q = 0 (use extended_kernel)");
    KernelStack stack = detail::build_stack(config, probes, 0, order);
    if (check_refinement) {
        const KernelStack fine = detail::build_stack(config, probes, 0, 2 * order);
        double gap = 0.0;
        for (std::size_t l = 0; l < stack.layers.size(); ++l)
            for (std::size_t e = 0; e < stack.layers[l].data().size(); ++e)
                gap = std::max(gap, std::abs(stack.layers[l].data()[e] - fine.layers[l].data()[e]));
        stack.refinement_gap = gap;
        stack.quadrature_converged = gap <= 1e-8;
    }
    return stack;
}

// Derivative-extended recursion over (probe, multi-index) blocks, obtained by
// differentiating the layer recursion under the expectation. Validated against
// Richardson-extrapolated finite differences of kernel_recursion in the tests.
inline KernelStack extended_kernel(const NetworkConfig& config, const ProbeSet& probes, int order = 96,
                                   bool check_refinement = false) {
    config.check();
    if (!config.activation.supports_order(probes.q))
        throw SmoothnessViolation("extended_kernel: requested q exceeds activation smoothness");
    KernelStack stack = detail::build_stack(config, probes, probes.q, order);
    if (check_refinement) {
        const KernelStack fine = detail::build_stack(config, probes, probes.q, 2 * order);
        double gap = 0.0;
        for (std::size_t l = 0; l < stack.layers.size(); ++l)
            for (std::size_t e = 0; e < stack.layers[l].data().size(); ++e)
                gap = std::max(gap, std::abs(stack.layers[l].data()[e] - fine.layers[l].data()[e]));
        stack.refinement_gap = gap;
        stack.quadrature_converged = gap <= 1e-8;
    }
    return stack;
}

struct NondegeneracyReport {
    std::vector<double> per_layer_min_eig;
    double tol = 0.0;
    bool pass = false;
    double smallest = 0.0;        // min over layers
    double final_layer_min_eig = 0.0;
};

// Non-degeneracy to order q: every layer's extended matrix must be invertible;
// operationally, min eigenvalue > tol. Failure is a report state, not an error.
inline NondegeneracyReport nondegeneracy_check(const KernelStack& stack, double tol) {
    NondegeneracyReport report;
    report.tol = tol;
    report.smallest = std::numeric_limits<double>::infinity();
    for (const auto& layer : stack.layers) {
        const double eig = min_eig(layer);
        report.per_layer_min_eig.push_back(eig);
        report.smallest = std::min(report.smallest, eig);
    }
    report.final_layer_min_eig = report.per_layer_min_eig.back();
    report.pass = report.smallest > tol;
    return report;
}

// Analytic oracle stacks for cross-validating the quadrature path.
//   identity: K^{(l+1)} = C_b (on the (0,0) block) + C_W K^{(l)}, any q <= 2.
//   relu (q = 0): arc-cosine kernel
//     E[relu(G1) relu(G2)] = sqrt(K11 K22)/(2 pi) (sqrt(1-rho^2) + rho (pi - arccos rho)).
inline KernelStack closed_form_oracle(const NetworkConfig& config, const ProbeSet& probes) {
    config.check();
    const ActivationKind kind = config.activation.kind;
    if (kind != ActivationKind::identity && kind != ActivationKind::relu)
        throw Unsupported("closed_form_oracle: only identity and relu have closed forms");
    if (kind == ActivationKind::relu && probes.q != 0)
        throw Unsupported("closed_form_oracle: relu oracle requires q = 0");

    KernelStack stack;
    stack.d = probes.dim();
    stack.q = probes.q;
    stack.quadrature_order = 0;
    stack.index_set = multi_index_set(probes.n_directions(), probes.q);
    stack.layers.push_back(detail::base_layer(config, probes, stack.index_set));
    const int block = stack.block();
    for (int layer = 2; layer <= config.depth + 1; ++layer) {
        const SymMatrix& prev = stack.layers.back();
        SymMatrix next(stack.d * block);
        if (kind == ActivationKind::identity) {
            for (int r = 0; r < stack.d * block; ++r)
                for (int c = r; c < stack.d * block; ++c) {
                    double e = config.c_w * prev(r, c);
                    if (r % block == 0 && c % block == 0) e += config.c_b;
                    next.set(r, c, e);
                }
        } else {
            for (int i = 0; i < stack.d; ++i)
                for (int j = i; j < stack.d; ++j) {
                    const double kii = prev(i, i);
                    const double kjj = prev(j, j);
                    const double kij = prev(i, j);
                    double e = 0.0;
                    const double denom = std::sqrt(kii * kjj);
                    if (denom > 0.0) {
                        const double rho = std::min(1.0, std::max(-1.0, kij / denom));
                        e = denom / (2.0 * std::numbers::pi) *
                            (std::sqrt(std::max(0.0, 1.0 - rho * rho)) +
                             rho * (std::numbers::pi - std::acos(rho)));
                    }
                    next.set(i, j, config.c_b + config.c_w * e);
                }
        }
        stack.layers.push_back(std::move(next));
    }
    return stack;
}

}  // namespace wlc
