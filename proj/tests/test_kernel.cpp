#include <doctest.h>

#include <cmath>
#include <vector>

#include "wlc/kernel.hpp"
#include "wlc/rng.hpp"

using namespace wlc;

namespace {

ProbeSet q0_probes(std::vector<std::vector<double>> inputs) {
    ProbeSet probes;
    probes.inputs = std::move(inputs);
    probes.multi_indices.assign(probes.inputs.size(), {});
    probes.q = 0;
    return probes;
}

NetworkConfig base_net(ActivationKind kind, int depth, int n0) {
    NetworkConfig net;
    net.depth = depth;
    net.widths.assign(static_cast<std::size_t>(depth) + 2, 16);
    net.widths.front() = n0;
    net.widths.back() = 1;
    net.c_b = 0.3;
    net.c_w = 1.5;
    net.activation = make_activation(kind);
    return net;
}

}  // namespace

TEST_CASE("kernel base case") {
    NetworkConfig net = base_net(ActivationKind::tanh, 0, 2);
    net.c_b = 1.0;
    net.c_w = 2.0;
    const auto stack = kernel_recursion(net, q0_probes({{1.0, 1.0}}), 16);
    CHECK(stack.layers.size() == 1);
    CHECK(stack.final_layer()(0, 0) == doctest::Approx(3.0));  // 1 + (2/2) * 2
}

TEST_CASE("identity activation: affine layer recursion, any depth") {
    RngStream rng(67);
    for (int depth : {1, 2, 3}) {
        NetworkConfig net = base_net(ActivationKind::identity, depth, 3);
        std::vector<std::vector<double>> inputs;
        for (int i = 0; i < 2; ++i)
            inputs.push_back({rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian()});
        const auto probes = q0_probes(inputs);
        const auto quad = kernel_recursion(net, probes, 24);
        const auto oracle = closed_form_oracle(net, probes);
        for (std::size_t l = 0; l < quad.layers.size(); ++l)
            CHECK(hs_norm(quad.layers[l] - oracle.layers[l]) < 1e-10);
        CHECK(quad.quadrature_converged);
    }
}

TEST_CASE("relu: quadrature path matches the arc-cosine oracle to 1e-8") {
    RngStream rng(71);
    for (int depth : {1, 3}) {
        NetworkConfig net = base_net(ActivationKind::relu, depth, 2);
        const auto probes = q0_probes({{rng.next_gaussian(), rng.next_gaussian()},
                                       {rng.next_gaussian(), rng.next_gaussian()},
                                       {rng.next_gaussian(), rng.next_gaussian()}});
        const auto quad = kernel_recursion(net, probes, 40);
        const auto oracle = closed_form_oracle(net, probes);
        double worst = 0.0;
        for (std::size_t l = 0; l < quad.layers.size(); ++l)
            worst = std::max(worst, hs_norm(quad.layers[l] - oracle.layers[l]));
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("relu variance preservation at C_b=0, C_W=2") {
    NetworkConfig net = base_net(ActivationKind::relu, 3, 2);
    net.c_b = 0.0;
    net.c_w = 2.0;
    const auto stack = kernel_recursion(net, q0_probes({{0.6, -0.8}}), 40);
    const double k1 = stack.layers[0](0, 0);
    for (const auto& layer : stack.layers) CHECK(layer(0, 0) == doctest::Approx(k1).epsilon(1e-9));
}

TEST_CASE("layers are PSD and refinement is monotone for smooth activations") {
    NetworkConfig net = base_net(ActivationKind::tanh, 3, 2);
    const auto probes = q0_probes({{0.9, 0.2}, {-0.4, 1.0}, {0.3, -0.7}});
    const auto stack = kernel_recursion(net, probes);
    for (const auto& layer : stack.layers) {
        const double eig = min_eig(layer);
        CHECK(eig > -psd_tolerance(op_norm(layer)));
    }
    CHECK(stack.refinement_gap < 1e-8);
    CHECK(stack.quadrature_converged);
}

TEST_CASE("extended kernel at q=0 is bit-identical to kernel_recursion") {
    NetworkConfig net = base_net(ActivationKind::tanh, 2, 2);
    const auto probes = q0_probes({{0.8, 0.4}, {-0.6, 0.5}});
    const auto a = kernel_recursion(net, probes, 24, false);
    const auto b = extended_kernel(net, probes, 24, false);
    REQUIRE(a.layers.size() == b.layers.size());
    for (std::size_t l = 0; l < a.layers.size(); ++l)
        CHECK(a.layers[l].data() == b.layers[l].data());
}

TEST_CASE("identity activation: extended kernel matches the affine oracle at q=1,2") {
    NetworkConfig net = base_net(ActivationKind::identity, 2, 2);
    ProbeSet probes;
    probes.inputs = {{0.8, 0.4}, {-0.6, 0.5}};
    probes.directions = {{1.0, 0.0}, {0.3, 1.0}};
    probes.multi_indices = {{1, 0}, {0, 1}};
    for (int q : {1, 2}) {
        probes.q = q;
        probes.multi_indices = q == 1 ? std::vector<std::vector<int>>{{1, 0}, {0, 1}}
                                      : std::vector<std::vector<int>>{{1, 1}, {0, 2}};
        probes.normalize_and_check();
        const auto got = extended_kernel(net, probes, 24);
        const auto oracle = closed_form_oracle(net, probes);
        for (std::size_t l = 0; l < got.layers.size(); ++l)
            CHECK(hs_norm(got.layers[l] - oracle.layers[l]) < 1e-9);
    }
}

TEST_CASE("extended kernel base case: derivative of the affine kernel") {
    NetworkConfig net = base_net(ActivationKind::identity, 1, 2);
    net.c_w = 2.0;
    ProbeSet probes;
    probes.inputs = {{1.0, 0.0}, {0.0, 1.0}};
    probes.directions = {{1.0, 0.0}, {0.0, 1.0}};
    probes.multi_indices = {{1, 0}, {0, 1}};
    probes.q = 1;
    probes.normalize_and_check();
    const auto stack = extended_kernel(net, probes, 16);
    // V_a V_b K^(1) = (C_W/n_0) <v_a, v_b>
    const int block = stack.block();
    CHECK(stack.layers[0](0 * block + 1, 1 * block + 2) == doctest::Approx(0.0));       // e1 . e2
    CHECK(stack.layers[0](0 * block + 1, 0 * block + 1) == doctest::Approx(1.0));       // (2/2) e1 . e1
    // order-2 derivative rows vanish in the base layer for q=1 there are none
}

TEST_CASE("extended kernel tanh q=1 against Richardson finite differences") {
    NetworkConfig net = base_net(ActivationKind::tanh, 1, 2);
    ProbeSet probes;
    probes.inputs = {{0.9, -0.3}};
    probes.directions = {{0.6, 0.8}};
    probes.multi_indices = {{1}};
    probes.q = 1;
    probes.normalize_and_check();
    const auto stack = extended_kernel(net, probes, 96);
    const int block = stack.block();
    REQUIRE(block == 2);

    const auto& v = probes.directions[0];
    const auto kernel_entry = [&](std::vector<double> x, std::vector<double> y) {
        ProbeSet fd;
        fd.inputs = {std::move(x), std::move(y)};
        fd.multi_indices = {{}, {}};
        fd.q = 0;
        return kernel_recursion(net, fd, 96, false).final_layer()(0, 1);
    };
    const std::vector<double> x0 = probes.inputs[0];
    auto shift = [&](double c) {
        std::vector<double> x = x0;
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += c * v[i];
        return x;
    };
    auto mixed_fd = [&](double h) {
        return (kernel_entry(shift(h), shift(h)) - kernel_entry(shift(h), shift(-h)) -
                kernel_entry(shift(-h), shift(h)) + kernel_entry(shift(-h), shift(-h))) /
               (4.0 * h * h);
    };
    auto single_fd = [&](double h) {
        return (kernel_entry(shift(h), x0) - kernel_entry(shift(-h), x0)) / (2.0 * h);
    };
    // Richardson over steps 1e-3 and 1e-4 for the O(h^2) central schemes
    const double mixed = (100.0 * mixed_fd(1e-4) - mixed_fd(1e-3)) / 99.0;
    const double single = (100.0 * single_fd(1e-4) - single_fd(1e-3)) / 99.0;

    const double got_mixed = stack.final_layer()(1, 1);   // (x,J=1),(x,J=1)
    const double got_single = stack.final_layer()(1, 0);  // (x,J=1),(x,J=0)
    CHECK(got_mixed == doctest::Approx(mixed).epsilon(1e-5));
    CHECK(got_single == doctest::Approx(single).epsilon(1e-5));
}

TEST_CASE("smoothness violation for relu beyond order 1") {
    NetworkConfig net = base_net(ActivationKind::relu, 1, 2);
    ProbeSet probes;
    probes.inputs = {{1.0, 0.5}};
    probes.directions = {{1.0, 0.0}};
    probes.multi_indices = {{2}};
    probes.q = 2;
    probes.normalize_and_check();
    CHECK_THROWS_AS(extended_kernel(net, probes, 16), SmoothnessViolation);
}

TEST_CASE("nondegeneracy check") {
    NetworkConfig tanh_net = base_net(ActivationKind::tanh, 1, 1);
    tanh_net.c_b = 1.0;
    const auto good = kernel_recursion(tanh_net, q0_probes({{0.7}}), 32);
    const auto good_report = nondegeneracy_check(good, 1e-8);
    CHECK(good_report.pass);
    CHECK(good_report.final_layer_min_eig > 0.0);

    // duplicated probe input: rank-deficient at every layer
    NetworkConfig net = base_net(ActivationKind::tanh, 1, 2);
    const auto dup = kernel_recursion(net, q0_probes({{1.0, 0.5}, {1.0, 0.5}}), 32, false);
    CHECK_FALSE(nondegeneracy_check(dup, 1e-8).pass);

    // proportional inputs with identity activation and C_b=0: Gram rank 1
    NetworkConfig lin = base_net(ActivationKind::identity, 1, 2);
    lin.c_b = 0.0;
    const auto prop = kernel_recursion(lin, q0_probes({{1.0, 2.0}, {2.0, 4.0}}), 16, false);
    CHECK_FALSE(nondegeneracy_check(prop, 1e-8).pass);
}

TEST_CASE("probe_matrix extracts the chosen pairs") {
    NetworkConfig net = base_net(ActivationKind::tanh, 1, 2);
    ProbeSet probes;
    probes.inputs = {{0.9, -0.3}, {0.2, 1.1}};
    probes.directions = {{1.0, 0.0}};
    probes.multi_indices = {{0}, {1}};
    probes.q = 1;
    probes.normalize_and_check();
    const auto stack = extended_kernel(net, probes, 32);
    const SymMatrix k = stack.probe_matrix(probes);
    CHECK(k.dim() == 2);
    const int block = stack.block();
    CHECK(k(0, 0) == stack.final_layer()(0 * block + 0, 0 * block + 0));
    CHECK(k(0, 1) == stack.final_layer()(0 * block + 0, 1 * block + 1));
    CHECK(k(1, 1) == stack.final_layer()(1 * block + 1, 1 * block + 1));
}

TEST_CASE("closed_form_oracle rejects unsupported activations") {
    NetworkConfig net = base_net(ActivationKind::tanh, 1, 2);
    CHECK_THROWS_AS(closed_form_oracle(net, q0_probes({{1.0, 0.0}})), Unsupported);
}
