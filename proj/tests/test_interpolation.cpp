#include <doctest.h>

#include <cmath>
#include <vector>

#include "wlc/interpolation.hpp"
#include "wlc/isserlis.hpp"
#include "wlc/quadrature.hpp"
#include "wlc/rng.hpp"

using namespace wlc;

namespace {

// A pair inside the event E: a small symmetric perturbation of a random PD K.
InterpolationPair random_pair_inside_E(int dim, RngStream& rng, double strength = 0.2) {
    Eigen::MatrixXd r(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) r(i, j) = rng.next_gaussian();
    const SymMatrix k = SymMatrix::from_eigen(r.transpose() * r + 0.4 * Eigen::MatrixXd::Identity(dim, dim));
    const double lambda = min_eig(k);
    SymMatrix perturbation(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) perturbation.set(i, j, rng.next_gaussian());
    const double scale = strength * 0.5 * lambda / op_norm(perturbation);
    return InterpolationPair(k + scale * perturbation, k);
}

// Exact standard error of the Monte Carlo mean of h_k^2: the fourth moment of
// the degree-2k polynomial is itself a polynomial moment, integrated exactly
// by Gauss-Hermite. The empirical standard error is useless here: h_k^2 is
// heavy-tailed and a finite sample underestimates its variance badly.
double exact_se_hk2(const InterpolationPair& pair, double t, int k, int n) {
    const HkEvaluator hk(pair, t, k);
    const SymMatrix gamma = gamma_t(pair, t);
    const double second = gauss_expectation(
        [&](const std::vector<double>& x) {
            const double v = hk(x);
            return v * v;
        },
        gamma, 4 * k + 2);
    const double fourth = gauss_expectation(
        [&](const std::vector<double>& x) {
            const double v = hk(x);
            return v * v * v * v;
        },
        gamma, 4 * k + 2);
    return std::sqrt(std::max(0.0, fourth - second * second) / n);
}

}  // namespace

TEST_CASE("event E membership") {
    const SymMatrix k{{1.0}};
    CHECK(event_E_holds(InterpolationPair(k, k)));
    CHECK(event_E_holds(InterpolationPair(SymMatrix{{1.4}}, k)));
    CHECK_FALSE(event_E_holds(InterpolationPair(SymMatrix{{1.6}}, k)));
}

TEST_CASE("gamma_t endpoints and blend") {
    const SymMatrix k = SymMatrix::identity(2);
    const SymMatrix a = SymMatrix::diagonal({1.4, 0.8});
    const InterpolationPair pair(a, k);
    CHECK(hs_norm(gamma_t(pair, 0.0) - k) == doctest::Approx(0.0));
    CHECK(hs_norm(gamma_t(pair, 1.0) - a) == doctest::Approx(0.0));
    const SymMatrix mid = gamma_t(pair, 0.5);
    CHECK(mid(0, 0) == doctest::Approx(1.2));
    CHECK(mid(1, 1) == doctest::Approx(0.9));
}

TEST_CASE("gamma_t stays positive definite inside E") {
    RngStream rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        const auto pair = random_pair_inside_E(1 + static_cast<int>(rng.next_u64() % 3), rng, 0.9);
        for (double t : {0.0, 0.25, 0.5, 0.75, 1.0})
            CHECK(min_eig(gamma_t(pair, t)) >= 0.5 * pair.lambda_K - 1e-12);
    }
}

TEST_CASE("h_k spot values in one dimension") {
    const InterpolationPair pair(SymMatrix{{1.2}}, SymMatrix{{1.0}});
    CHECK(h_k_eval(pair, 0.0, {0.0}, 1) == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(h_k_eval(pair, 0.0, {1.0}, 1) == doctest::Approx(0.0));
}

TEST_CASE("h_k vanishes identically when A equals K") {
    const SymMatrix k{{1.3, 0.2}, {0.2, 0.9}};
    const InterpolationPair pair(k, k);
    RngStream rng(43);
    for (int k_order = 1; k_order <= 4; ++k_order)
        for (int s = 0; s < 5; ++s) {
            const std::vector<double> x{rng.next_gaussian(), rng.next_gaussian()};
            CHECK(h_k_eval(pair, 0.5, x, k_order) == doctest::Approx(0.0));
        }
}

TEST_CASE("h_1 matches the quadratic-minus-trace closed form") {
    RngStream rng(47);
    for (int trial = 0; trial < 10; ++trial) {
        const int dim = 1 + static_cast<int>(rng.next_u64() % 3);
        const auto pair = random_pair_inside_E(dim, rng);
        const double t = rng.next_uniform();
        const SymMatrix gamma_inv = sym_inverse(gamma_t(pair, t));
        const SymMatrix diff = pair.A - pair.K;
        std::vector<double> x(static_cast<std::size_t>(dim));
        for (auto& v : x) v = 1.5 * rng.next_gaussian();
        const auto gx = gamma_inv.apply(x);
        const auto dgx = diff.apply(gx);
        const auto ggx = gamma_inv.apply(dgx);
        double quad = 0.0;
        for (int i = 0; i < dim; ++i) quad += x[static_cast<std::size_t>(i)] * ggx[static_cast<std::size_t>(i)];
        const double tr = (gamma_inv.eigen() * diff.eigen()).trace();
        CHECK(h_k_eval(pair, t, x, 1) == doctest::Approx(0.5 * (quad - tr)).epsilon(1e-10));
    }
}

TEST_CASE("h_k and moments refuse pairs outside E") {
    const InterpolationPair pair(SymMatrix{{1.6}}, SymMatrix{{1.0}});
    CHECK_THROWS_AS(h_k_eval(pair, 0.5, {0.0}, 1), OutsideEventE);
    CHECK_THROWS_AS(hk_second_moment(pair, 0.5, 1), OutsideEventE);
}

TEST_CASE("hk_second_moment closed-form values") {
    const InterpolationPair same(SymMatrix::identity(2), SymMatrix::identity(2));
    for (int k = 1; k <= 4; ++k) CHECK(hk_second_moment(same, 0.3, k) == doctest::Approx(0.0));

    const InterpolationPair pair(SymMatrix{{1.2}}, SymMatrix{{1.0}});
    CHECK(hk_second_moment(pair, 0.0, 1) == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(hk_second_moment(pair, 0.0, 2) == doctest::Approx(0.0024).epsilon(1e-12));
}

TEST_CASE("trace identities reproduced through the isserlis route for k=1,2") {
    RngStream rng(53);
    for (int trial = 0; trial < 6; ++trial) {
        const int dim = 1 + static_cast<int>(rng.next_u64() % 3);
        const auto pair = random_pair_inside_E(dim, rng);
        const double t = (trial % 3) * 0.5;
        // E[h_k^2] = (k!/2^k) E[<N, M^2 N>^k] with M the whitened difference
        const auto g = detail::eig_sym(gamma_t(pair, t));
        Eigen::VectorXd inv_sqrt(dim);
        for (int i = 0; i < dim; ++i) inv_sqrt(i) = 1.0 / std::sqrt(g.values(i));
        const SymMatrix w = SymMatrix::from_eigen(g.vectors * inv_sqrt.asDiagonal() * g.vectors.transpose());
        const SymMatrix m = conjugate(w, pair.A - pair.K);
        const SymMatrix m2 = SymMatrix::from_eigen(m.eigen() * m.eigen());
        const SymMatrix id = SymMatrix::identity(dim);

        double route1 = 0.0;  // k=1
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) route1 += m2(i, j) * isserlis_moment(id, {i, j});
        route1 *= 0.5;
        CHECK(route1 == doctest::Approx(hk_second_moment(pair, t, 1)).epsilon(1e-10));

        double route2 = 0.0;  // k=2
        for (int i1 = 0; i1 < dim; ++i1)
            for (int j1 = 0; j1 < dim; ++j1)
                for (int i2 = 0; i2 < dim; ++i2)
                    for (int j2 = 0; j2 < dim; ++j2)
                        route2 += m2(i1, j1) * m2(i2, j2) * isserlis_moment(id, {i1, j1, i2, j2});
        route2 *= 2.0 / 4.0;
        CHECK(route2 == doctest::Approx(hk_second_moment(pair, t, 2)).epsilon(1e-10));
    }
}

TEST_CASE("polynomial bound on h_1 inside E") {
    RngStream rng(59);
    for (int trial = 0; trial < 5; ++trial) {
        const int dim = 1 + static_cast<int>(rng.next_u64() % 3);
        const auto pair = random_pair_inside_E(dim, rng, 0.95);
        const double gap = hs_norm(pair.A - pair.K);
        for (int s = 0; s < 20; ++s) {
            std::vector<double> x(static_cast<std::size_t>(dim));
            double norm2 = 0.0;
            for (auto& v : x) {
                v = 2.0 * rng.next_gaussian();
                norm2 += v * v;
            }
            const double p1 = 2.0 / (pair.lambda_K * pair.lambda_K) * norm2 +
                              std::sqrt(static_cast<double>(dim)) / pair.lambda_K;
            const double t = rng.next_uniform();
            CHECK(std::abs(h_k_eval(pair, t, x, 1)) <= p1 * gap + 1e-12);
        }
    }
}

TEST_CASE("monte carlo consistency of h_k second moments") {
    RngStream rng(61);
    const int n = 100000;
    for (int dim : {1, 2, 3}) {
        const auto pair = random_pair_inside_E(dim, rng);
        for (double t : {0.0, 0.5, 1.0}) {
            const SymMatrix root = psd_sqrt(gamma_t(pair, t));
            for (int k = 1; k <= 4; ++k) {
                const HkEvaluator hk(pair, t, k);
                RngStream sub = rng.substream(static_cast<std::uint64_t>(dim * 100 + k * 10 + static_cast<int>(t * 2)));
                std::vector<double> z(static_cast<std::size_t>(dim));
                double sum = 0.0;
                for (int i = 0; i < n; ++i) {
                    for (auto& v : z) v = sub.next_gaussian();
                    const double h = hk(root.apply(z));
                    sum += h * h;
                }
                const double mc = sum / n;
                const double exact = hk_second_moment(pair, t, k);
                const double se = exact_se_hk2(pair, t, k, n);
                CHECK(std::abs(mc - exact) <= 4.0 * se);
            }
        }
    }
}

TEST_CASE("h1 higher moments") {
    const InterpolationPair pair(SymMatrix{{1.2}}, SymMatrix{{1.0}});
    // d=1, t=0: M = 0.2; E[h1^4] = 3 T4 + 3/4 T2^2, E[h1^6] = 60 T6 + 15/8 T2^3 + 10 T3^2 + 45/2 T2 T4
    const double m = 0.2;
    const double t2 = m * m, t3 = m * m * m, t4 = std::pow(m, 4), t6 = std::pow(m, 6);
    CHECK(h1_moment(pair, 0.0, 2) == doctest::Approx(0.5 * t2).epsilon(1e-12));
    CHECK(h1_moment(pair, 0.0, 4) == doctest::Approx(3.0 * t4 + 0.75 * t2 * t2).epsilon(1e-12));
    CHECK(h1_moment(pair, 0.0, 6) ==
          doctest::Approx(60.0 * t6 + 1.875 * t2 * t2 * t2 + 10.0 * t3 * t3 + 22.5 * t2 * t4).epsilon(1e-12));
    CHECK_THROWS_AS(h1_moment(pair, 0.0, 3), Unsupported);
}
