// Acceptance suite: end-to-end checks of the certificate pipeline at desk
// scale. Each criterion prints one [PASS]/[FAIL] line; the process exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wlc/wlc.hpp"

using namespace wlc;

namespace {

struct Criterion {
    int id;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

std::vector<Criterion> results;

template <typename F>
void run_criterion(int id, const std::string& name, F&& body) {
    Criterion c{id, name};
    const auto start = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.pass = false;
        c.detail = std::string("exception: ") + e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %2d: %s (%.1fs) %s\n", c.pass ? "PASS" : "FAIL", c.id,
                c.name.c_str(), c.seconds, c.detail.c_str());
    std::fflush(stdout);
    results.push_back(c);
}

SymMatrix random_pd(int dim, RngStream& rng, double ridge = 0.3) {
    Eigen::MatrixXd r(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) r(i, j) = rng.next_gaussian();
    return SymMatrix::from_eigen(r.transpose() * r + ridge * Eigen::MatrixXd::Identity(dim, dim));
}

InterpolationPair random_pair_inside_E(int dim, RngStream& rng, double strength) {
    const SymMatrix k = random_pd(dim, rng);
    SymMatrix perturbation(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) perturbation.set(i, j, rng.next_gaussian());
    const double scale = strength * 0.5 * min_eig(k) / op_norm(perturbation);
    return InterpolationPair(k + scale * perturbation, k);
}

ProbeSet q0_probes(std::vector<std::vector<double>> inputs) {
    ProbeSet probes;
    probes.inputs = std::move(inputs);
    probes.multi_indices.assign(probes.inputs.size(), {});
    probes.q = 0;
    return probes;
}

// Desk-scale configuration shared by the scaling, dominance, rate-sandwich
// and posterior criteria.
NetworkConfig desk_net(int hidden) {
    NetworkConfig net;
    net.depth = 1;
    net.widths = {2, hidden, 1};
    net.c_b = 0.3;
    net.c_w = 1.5;
    net.activation = make_activation(ActivationKind::tanh);
    return net;
}

const std::vector<int> kWidths{32, 64, 128, 256, 512};
constexpr int kNmc = 4000;
constexpr int kNtv = 20000;
constexpr int kThreads = 2;

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Per-width certificates for the d=1 desk config, shared by criteria 6 and 7.
struct WidthResult {
    int width;
    BoundCertificate cert;
    double tv_measured;
    double tv_error;
};

std::vector<WidthResult> d1_sweep;

void compute_d1_sweep() {
    if (!d1_sweep.empty()) return;
    const auto probes = q0_probes({{0.9, -0.4}});
    NetworkConfig net = desk_net(32);
    const SymMatrix k = kernel_recursion(net, probes).probe_matrix(probes);
    RngStream root(20240901);
    for (std::size_t i = 0; i < kWidths.size(); ++i) {
        net.widths[1] = kWidths[i];
        const auto moments =
            estimate_moments(net, probes, k, kNmc, root.substream(100 + i), 1000, kThreads);
        const auto cert = tv_w2_bound(k, moments);
        const auto draws = draw_covariances(net, probes, kNtv, root.substream(200 + i));
        const MixtureDensity mixture(draws);
        const auto tv = tv_numeric(mixture, GaussianDensity(k),
                                   detail::mixture_grid(k, draws, 1));
        d1_sweep.push_back({kWidths[i], cert, tv.value, tv.error_estimate});
    }
}

}  // namespace

// --- criterion bodies ------------------------------------------------------

void hermite_orthogonality(Criterion& c) {
    double worst = 0.0;
    for (int k = 0; k <= 8; ++k)
        for (int j = 0; j <= 8; ++j) {
            const double expected = k == j ? std::tgamma(k + 1.0) : 0.0;
            const double got = gauss_expectation(
                [&](const std::vector<double>& x) {
                    return hermite_value(k, x[0]) * hermite_value(j, x[0]);
                },
                SymMatrix::identity(1), 64);
            worst = std::max(worst, std::abs(got - expected));
        }
    c.pass = worst <= 1e-8;
    std::ostringstream d;
    d << "max |quad - k! delta| = " << worst;
    c.detail = d.str();
}

void isserlis_vs_mc(Criterion& c) {
    RngStream rng(4242);
    const int cases = 100;
    const int n = 1000000;
    int within = 0;
    for (int trial = 0; trial < cases; ++trial) {
        const int dim = 1 + static_cast<int>(rng.next_u64() % 3);
        const SymMatrix cov = random_pd(dim, rng);
        const SymMatrix root = psd_sqrt(cov);
        const int degree = 2 * (1 + static_cast<int>(rng.next_u64() % 3));
        std::vector<int> indices(static_cast<std::size_t>(degree));
        for (auto& idx : indices) idx = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(dim));
        const double exact = isserlis_moment(cov, indices);

        RngStream sub = rng.substream(1000 + static_cast<std::uint64_t>(trial));
        std::vector<double> z(static_cast<std::size_t>(dim));
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            for (auto& v : z) v = sub.next_gaussian();
            const auto x = root.apply(z);
            double prod = 1.0;
            for (int idx : indices) prod *= x[static_cast<std::size_t>(idx)];
            s += prod;
            s2 += prod * prod;
        }
        const double mc = s / n;
        const double se = std::sqrt(std::max(0.0, s2 / n - mc * mc) / n);
        if (std::abs(mc - exact) <= 4.0 * se) ++within;
    }
    c.pass = within >= 95;
    std::ostringstream d;
    d << within << "/100 cases within 4 standard errors";
    c.detail = d.str();
}

void trace_identities_mc(Criterion& c) {
    RngStream rng(777);
    const int n = 1000000;
    int checked = 0, ok = 0;
    double worst_dev = 0.0;
    for (int pair_idx = 0; pair_idx < 50; ++pair_idx) {
        const int dim = 1 + pair_idx % 3;
        const double t = 0.5 * (pair_idx % 3 == 2 ? 2 : pair_idx % 3);
        const auto pair = random_pair_inside_E(dim, rng, 0.3 + 0.6 * rng.next_uniform());
        const SymMatrix root = psd_sqrt(gamma_t(pair, t));
        std::vector<HkEvaluator> evals;
        for (int k = 1; k <= 4; ++k) evals.emplace_back(pair, t, k);

        std::vector<double> sums(4, 0.0);
        RngStream sub = rng.substream(5000 + static_cast<std::uint64_t>(pair_idx));
        std::vector<double> z(static_cast<std::size_t>(dim));
        for (int i = 0; i < n; ++i) {
            for (auto& v : z) v = sub.next_gaussian();
            const auto x = root.apply(z);
            for (int k = 0; k < 4; ++k) {
                const double h = evals[static_cast<std::size_t>(k)](x);
                sums[static_cast<std::size_t>(k)] += h * h;
            }
        }
        for (int k = 1; k <= 4; ++k) {
            const double mc = sums[static_cast<std::size_t>(k - 1)] / n;
            const double exact = hk_second_moment(pair, t, k);
            // The exact standard error of the MC mean: E[h_k^4] is a polynomial
            // moment, integrated exactly (the empirical variance of h_k^2 is
            // useless under its heavy tails).
            const HkEvaluator& hk = evals[static_cast<std::size_t>(k - 1)];
            const SymMatrix gamma = gamma_t(pair, t);
            const double fourth = gauss_expectation(
                [&](const std::vector<double>& x) {
                    const double v = hk(x);
                    return v * v * v * v;
                },
                gamma, 4 * k + 2);
            const double se = std::sqrt(std::max(0.0, fourth - exact * exact) / n);
            ++checked;
            const double dev = se > 0.0 ? std::abs(mc - exact) / se : 0.0;
            worst_dev = std::max(worst_dev, dev);
            if (std::abs(mc - exact) <= 4.0 * se) ++ok;
        }
    }
    c.pass = ok == checked;
    std::ostringstream d;
    d << ok << "/" << checked << " (pair,k) cells within 4 exact standard errors, worst "
      << worst_dev << " se";
    c.detail = d.str();
}

void kernel_oracles(Criterion& c) {
    RngStream rng(31337);
    double worst_abs = 0.0;
    for (int depth : {1, 2, 3}) {
        for (ActivationKind kind : {ActivationKind::identity, ActivationKind::relu}) {
            NetworkConfig net;
            net.depth = depth;
            net.widths.assign(static_cast<std::size_t>(depth) + 2, 8);
            net.widths.front() = 2;
            net.c_b = 0.2 + 0.3 * rng.next_uniform();
            net.c_w = 1.0 + rng.next_uniform();
            net.activation = make_activation(kind);
            std::vector<std::vector<double>> inputs;
            for (int i = 0; i < 3; ++i) inputs.push_back({rng.next_gaussian(), rng.next_gaussian()});
            const auto probes = q0_probes(inputs);
            const auto quad = kernel_recursion(net, probes, 40, false);
            const auto oracle = closed_form_oracle(net, probes);
            for (std::size_t l = 0; l < quad.layers.size(); ++l)
                for (std::size_t e = 0; e < quad.layers[l].data().size(); ++e)
                    worst_abs = std::max(worst_abs, std::abs(quad.layers[l].data()[e] -
                                                             oracle.layers[l].data()[e]));
        }
    }

    // extended kernel (tanh, q=1) against Richardson finite differences
    NetworkConfig net = desk_net(32);
    ProbeSet probes;
    probes.inputs = {{0.9, -0.3}};
    probes.directions = {{0.6, 0.8}};
    probes.multi_indices = {{1}};
    probes.q = 1;
    probes.normalize_and_check();
    const auto stack = extended_kernel(net, probes);
    const auto& v = probes.directions[0];
    const auto kernel_entry = [&](std::vector<double> x, std::vector<double> y) {
        ProbeSet fd;
        fd.inputs = {std::move(x), std::move(y)};
        fd.multi_indices = {{}, {}};
        fd.q = 0;
        return kernel_recursion(net, fd, 96, false).final_layer()(0, 1);
    };
    const std::vector<double> x0 = probes.inputs[0];
    auto shift = [&](double a) {
        std::vector<double> x = x0;
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += a * v[i];
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
    const double mixed = (100.0 * mixed_fd(1e-4) - mixed_fd(1e-3)) / 99.0;
    const double single = (100.0 * single_fd(1e-4) - single_fd(1e-3)) / 99.0;
    const double rel_mixed = std::abs(stack.final_layer()(1, 1) - mixed) / std::abs(mixed);
    const double rel_single = std::abs(stack.final_layer()(1, 0) - single) / std::abs(single);
    const double worst_rel = std::max(rel_mixed, rel_single);

    c.pass = worst_abs <= 1e-8 && worst_rel <= 1e-5;
    std::ostringstream d;
    d << "closed-form max abs err " << worst_abs << ", FD max rel err " << worst_rel;
    c.detail = d.str();
}

void moment_scaling(Criterion& c) {
    const auto probes = q0_probes({{0.9, -0.4}, {0.3, 1.1}});
    NetworkConfig net = desk_net(32);
    const SymMatrix k = kernel_recursion(net, probes).probe_matrix(probes);
    RngStream root(555);
    std::vector<double> eighth, gaps;
    for (std::size_t i = 0; i < kWidths.size(); ++i) {
        net.widths[1] = kWidths[i];
        const auto m = estimate_moments(net, probes, k, kNmc, root.substream(10 + i), 1000, kThreads);
        eighth.push_back(m.eighth_root);
        gaps.push_back(m.mean_gap);
    }
    const auto fit_eighth = rate_fit(kWidths, eighth);
    const auto fit_gap = rate_fit(kWidths, gaps);
    const bool ok_eighth = fit_eighth.slope >= -1.15 && fit_eighth.slope <= -0.85;
    const bool ok_gap = fit_gap.slope >= -1.3 && fit_gap.slope <= -0.7;
    c.pass = ok_eighth && ok_gap;
    std::ostringstream d;
    d << "eighth_root slope " << fit_eighth.slope << " (want [-1.15,-0.85]), mean_gap slope "
      << fit_gap.slope << " (want [-1.3,-0.7])";
    c.detail = d.str();
}

void bound_dominance(Criterion& c) {
    compute_d1_sweep();
    bool ok = true;
    double worst_margin = 1e300;
    for (const auto& r : d1_sweep) {
        const double budget = r.cert.tv_bound + 3.0 * r.cert.ci_tv_bound;
        worst_margin = std::min(worst_margin, budget - r.tv_measured);
        ok = ok && r.tv_measured <= budget;
    }
    c.pass = ok;
    std::ostringstream d;
    d << "min (bound + 3 ci - measured) = " << worst_margin << " across widths";
    c.detail = d.str();
}

void rate_sandwich(Criterion& c) {
    compute_d1_sweep();
    std::vector<double> tvs;
    for (const auto& r : d1_sweep) tvs.push_back(r.tv_measured);
    const auto fit = rate_fit(kWidths, tvs);
    c.pass = fit.slope >= -1.2 && fit.slope <= -0.8;
    std::ostringstream d;
    d << "measured TV slope " << fit.slope << " (want [-1.2,-0.8]), r2 " << fit.r2;
    c.detail = d.str();
}

void entropy_route(Criterion& c) {
    const SymMatrix k = SymMatrix::identity(1);
    const SymMatrix a{{1.1}};
    const double bound = entropy_bound(k, deterministic_moments(a, k));
    const double exact_kl = kl_gaussian(GaussianLaw(a), GaussianLaw(k));
    const GaussianDensity pa(a), pk(k);
    const double tv = tv_numeric(pa, pk, symmetric_grid(1, 10.0, 4001)).value;
    c.pass = bound >= exact_kl && std::sqrt(0.5 * bound) >= tv;
    std::ostringstream d;
    d << "entropy bound " << bound << " >= KL " << exact_kl << "; sqrt(bound/2) "
      << std::sqrt(0.5 * bound) << " >= measured TV " << tv;
    c.detail = d.str();
}

void posterior_bound(Criterion& c) {
    const auto probes = q0_probes({{0.9, -0.4}});
    NetworkConfig net = desk_net(64);
    const SymMatrix k = kernel_recursion(net, probes).probe_matrix(probes);
    const auto bump = make_gaussian_bump({0.4}, 0.8 * std::sqrt(k(0, 0)));
    RngStream root(909090);
    bool ok = true;
    std::ostringstream d;
    for (std::size_t i = 0; i < 2; ++i) {
        net.widths[1] = (i == 0) ? 64 : 256;
        const auto moments = estimate_moments(net, probes, k, kNmc, root.substream(10 + i), 1000, kThreads);
        const auto cert = tv_w2_bound(k, moments);
        const auto samples = sample_outputs(net, probes, kNtv, root.substream(20 + i));
        const auto means = estimate_likelihood_means(samples, k, bump, kNtv, root.substream(30 + i));
        const double post_bound = posterior_tv_bound(cert.tv_bound, bump, means.e_lz, means.e_lg);

        const auto draws = draw_covariances(net, probes, kNtv, root.substream(40 + i));
        const MixtureDensity mixture(draws);
        const GridSpec grid = detail::mixture_grid(k, draws, 1);
        const auto post_tv = posterior_tv_numeric(mixture, k, bump, grid);
        ok = ok && post_tv.value <= post_bound;
        d << "w=" << net.widths[1] << ": measured " << post_tv.value << " <= bound " << post_bound
          << "; ";

        // constant-likelihood collapse at this width
        const auto collapse = posterior_tv_numeric(mixture, k, make_constant_likelihood(2.0), grid);
        const auto prior_tv = tv_numeric(mixture, GaussianDensity(k), grid);
        const double tol = std::max(1e-10, 10.0 * (collapse.error_estimate + prior_tv.error_estimate));
        ok = ok && std::abs(collapse.value - prior_tv.value) <= tol;
    }
    c.pass = ok;
    c.detail = d.str() + "constant-likelihood collapse within grid tolerance";
}

void determinism(Criterion& c) {
    json j;
    j["schema_version"] = 1;
    j["command"] = "certify";
    j["network"] = {{"depth", 1}, {"widths", {2, 48, 1}}, {"c_b", 0.3}, {"c_w", 1.5},
                    {"activation", "tanh"}, {"seed", 4242}};
    j["probes"] = {{"inputs", {{0.9, -0.4}}}, {"directions", json::array()},
                   {"multi_indices", {json::array()}}, {"q", 0}};
    j["mc"] = {{"n_mc", 400}, {"n_tv_samples", 800}, {"bootstrap_n", 200}};
    j["quadrature"] = {{"order", 24}};
    const RunConfig cfg = parse_run_config(j);

    const auto base = std::filesystem::temp_directory_path();
    const auto d1 = base / "wlc_acceptance_det_1";
    const auto d2 = base / "wlc_acceptance_det_2";
    std::filesystem::remove_all(d1);
    std::filesystem::remove_all(d2);
    RunOptions o1, o2;
    o1.out_dir = d1.string();
    o2.out_dir = d2.string();
    o1.threads = o2.threads = kThreads;
    const auto r1 = run(cfg, o1);
    const auto r2 = run(cfg, o2);
    const bool same = slurp(d1 / "certificate.json") == slurp(d2 / "certificate.json") &&
                      slurp(d1 / "kernel_stack.json") == slurp(d2 / "kernel_stack.json");
    c.pass = r1.exit_code == 0 && r2.exit_code == 0 && same;
    c.detail = same ? "repeated runs byte-identical" : "reports differ";
    std::filesystem::remove_all(d1);
    std::filesystem::remove_all(d2);
}

int run_all() {
    run_criterion(1, "Hermite orthogonality (order-64 quadrature, k,j <= 8)", hermite_orthogonality);
    run_criterion(2, "Isserlis moments vs 1e6-sample Monte Carlo (100 cases)", isserlis_vs_mc);
    run_criterion(3, "h_k second-moment trace identities vs Monte Carlo (50 pairs)", trace_identities_mc);
    run_criterion(4, "kernel recursion vs closed forms; extended kernel vs finite differences",
                  kernel_oracles);
    run_criterion(5, "moment scaling slopes across widths 32..512", moment_scaling);
    run_criterion(6, "certified TV bound dominates measured TV at every width", bound_dominance);
    run_criterion(7, "measured TV rate sandwich (slope -1 within [-1.2,-0.8])", rate_sandwich);
    run_criterion(8, "entropy bound dominates exact KL and Pinsker TV", entropy_route);
    run_criterion(9, "posterior TV bound dominates measured posterior TV", posterior_bound);
    run_criterion(10, "byte-identical reports at fixed config, seed, threads", determinism);

    int failures = 0;
    for (const auto& c : results) failures += c.pass ? 0 : 1;
    std::printf("%d/%zu acceptance criteria passed\n", static_cast<int>(results.size()) - failures,
                results.size());
    return failures == 0 ? 0 : 1;
}

int main() { return run_all(); }
