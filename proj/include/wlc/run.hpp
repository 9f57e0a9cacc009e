#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wlc/certify.hpp"
#include "wlc/config.hpp"
#include "wlc/gaussian.hpp"
#include "wlc/hermite.hpp"
#include "wlc/isserlis.hpp"
#include "wlc/kernel.hpp"
#include "wlc/mixture.hpp"
#include "wlc/posterior.hpp"
#include "wlc/quadrature.hpp"
#include "wlc/tv.hpp"

namespace wlc {

struct RunOptions {
    std::string out_dir = ".";
    bool seed_overridden = false;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct RunOutcome {
    int exit_code = 0;  // 0 ok, 2 config error, 3 hypotheses unmet, 4 numerical failure
    std::string message;
    std::vector<std::string> files;
};

namespace detail {

inline void write_file(const std::string& path, const std::string& content) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline json moments_json(const MomentEstimates& m) {
    json j;
    j["mean_gap"] = m.mean_gap;
    j["eighth_root"] = m.eighth_root;
    j["n_mc"] = m.n_mc;
    j["ci_mean_gap"] = m.ci_mean_gap;
    j["ci_eighth"] = m.ci_eighth;
    j["norm_second"] = m.norm_second;
    j["noninvertible_fraction"] = m.noninvertible_fraction;
    if (m.inv_available) j["inv_second"] = m.inv_second;
    return j;
}

inline json certificate_json(const BoundCertificate& cert) {
    json j;
    j["d"] = cert.d;
    j["lambda_K"] = cert.lambda_K;
    j["hs_K"] = cert.hs_K;
    j["op_K"] = cert.op_K;
    j["hs_Kinv"] = cert.hs_Kinv;
    j["det_K"] = cert.det_K;
    j["tv_bound"] = cert.tv_bound;
    j["w2_bound"] = cert.w2_bound;
    j["ci_tv_bound"] = cert.ci_tv_bound;
    j["ci_w2_bound"] = cert.ci_w2_bound;
    if (cert.entropy_available) j["entropy_bound"] = cert.entropy_bound;
    json breakdown = json::array();
    for (const auto& term : cert.term_breakdown) {
        json t;
        t["name"] = term.name;
        t["value"] = term.value;
        breakdown.push_back(t);
    }
    j["term_breakdown"] = breakdown;
    j["moments"] = moments_json(cert.moments);
    j["validity"] = {{"nondegeneracy_pass", cert.nondegeneracy_pass},
                     {"invertibility_pass", cert.invertibility_pass}};
    return j;
}

inline json kernel_json(const KernelStack& stack, const NondegeneracyReport& nondeg) {
    json j;
    j["quadrature_order"] = stack.quadrature_order;
    j["q"] = stack.q;
    j["refinement_gap"] = stack.refinement_gap;
    j["quadrature_converged"] = stack.quadrature_converged;
    j["per_layer_min_eig"] = nondeg.per_layer_min_eig;
    j["nondegeneracy_tol"] = nondeg.tol;
    j["nondegeneracy_pass"] = nondeg.pass;
    return j;
}

// Dense row-major serialization of the stack (layer-indexed).
inline json kernel_stack_json(const KernelStack& stack) {
    json j;
    j["q"] = stack.q;
    j["quadrature_order"] = stack.quadrature_order;
    j["index_set"] = stack.index_set;
    json layers = json::array();
    for (const auto& layer : stack.layers) {
        json lj;
        lj["dim"] = layer.dim();
        lj["entries"] = layer.data();
        layers.push_back(lj);
    }
    j["layers"] = layers;
    return j;
}

inline json meta_json(const RunConfig& cfg, std::uint64_t seed, int threads) {
    std::ostringstream id;
    id << cfg.canonical << "|seed=" << seed << "|threads=" << threads;
    json j;
    j["schema_version"] = cfg.schema_version;
    j["command"] = cfg.command;
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(fnv1a(id.str())));
    j["config_hash"] = hash;
    j["seed"] = seed;
    j["threads"] = threads;
    return j;
}

inline LikelihoodSpec resolve_likelihood(const LikelihoodConfig& lc, const SymMatrix& k) {
    double max_var = 0.0;
    for (int i = 0; i < k.dim(); ++i) max_var = std::max(max_var, k(i, i));
    const double stddev = std::sqrt(max_var);
    if (lc.name == "constant") return make_constant_likelihood(lc.value);
    if (lc.name == "gaussian-bump")
        return make_gaussian_bump(lc.center, lc.width > 0.0 ? lc.width : 0.5 * stddev);
    if (lc.name == "smoothed-threshold")
        return make_smoothed_threshold(lc.direction, lc.threshold,
                                       lc.width > 0.0 ? lc.width : 1e-2 * stddev);
    throw ConfigError("unknown likelihood: " + lc.name);
}

struct MeasuredTv {
    bool available = false;
    double value = 0.0;
    double error_estimate = 0.0;
};

// Grid wide enough for the reference law and every mixture component.
inline GridSpec mixture_grid(const SymMatrix& k, const std::vector<SymMatrix>& draws, int d) {
    double max_var = 0.0;
    for (int i = 0; i < d; ++i) max_var = std::max(max_var, k(i, i));
    for (const auto& a : draws)
        for (int i = 0; i < d; ++i) max_var = std::max(max_var, a(i, i));
    return default_grid(d, std::sqrt(max_var), d == 1 ? 4001 : 501);
}

inline MeasuredTv measured_tv(const NetworkConfig& net, const ProbeSet& probes, const SymMatrix& k,
                              int n_draws, const RngStream& stream) {
    MeasuredTv out;
    if (k.dim() > 2) return out;
    const auto draws = draw_covariances(net, probes, n_draws, stream);
    const MixtureDensity mixture(draws);
    const GaussianDensity reference(k);
    const auto tv = tv_numeric(mixture, reference, mixture_grid(k, draws, k.dim()));
    out.available = true;
    out.value = tv.value;
    out.error_estimate = tv.error_estimate;
    return out;
}

struct CertifyArtifacts {
    KernelStack stack;
    NondegeneracyReport nondeg;
    SymMatrix k{1};
    BoundCertificate cert;
    MeasuredTv tv;
};

inline CertifyArtifacts certify_pipeline(const RunConfig& cfg, std::uint64_t seed, int threads,
                                         bool with_measured_tv) {
    CertifyArtifacts art;
    art.stack = cfg.probes.q == 0 ? kernel_recursion(cfg.network, cfg.probes, cfg.quadrature_order)
                                  : extended_kernel(cfg.network, cfg.probes, cfg.quadrature_order, true);
    art.nondeg = nondegeneracy_check(art.stack, cfg.nondegeneracy_tol);
    if (!art.nondeg.pass) return art;
    art.k = art.stack.probe_matrix(cfg.probes);
    RngStream root(seed);
    const auto moments = estimate_moments(cfg.network, cfg.probes, art.k, cfg.mc.n_mc,
                                          root.substream(1), cfg.mc.bootstrap_n, threads);
    art.cert = tv_w2_bound(art.k, moments);
    art.cert.nondegeneracy_pass = true;
    try {
        art.cert.entropy_bound = entropy_bound(art.k, moments);
        art.cert.entropy_available = true;
    } catch (const InvertibilityUnverified&) {
        art.cert.entropy_available = false;
        art.cert.invertibility_pass = false;
    }
    if (with_measured_tv)
        art.tv = measured_tv(cfg.network, cfg.probes, art.k, cfg.mc.n_tv_samples, root.substream(2));
    return art;
}

}  // namespace detail

inline RunOutcome run_certify(const RunConfig& cfg, const RunOptions& opt, std::uint64_t seed) {
    RunOutcome outcome;
    auto art = detail::certify_pipeline(cfg, seed, opt.threads, true);
    json report;
    report["meta"] = detail::meta_json(cfg, seed, opt.threads);
    report["kernel"] = detail::kernel_json(art.stack, art.nondeg);
    const std::string path = opt.out_dir + "/certificate.json";
    if (!art.nondeg.pass) {
        report["status"] = "hypotheses_unmet";
        report["reason"] = "nondegeneracy_check failed: extended limiting covariance is singular at tol";
        detail::write_file(path, report.dump(2) + "\n");
        outcome.files.push_back(path);
        outcome.exit_code = 3;
        outcome.message = "non-degeneracy hypothesis unmet; no bound emitted";
        return outcome;
    }
    report["status"] = "ok";
    report["certificate"] = detail::certificate_json(art.cert);
    if (art.tv.available) {
        report["measured"] = {{"tv", art.tv.value}, {"tv_error_estimate", art.tv.error_estimate}};
    }
    detail::write_file(path, report.dump(2) + "\n");
    outcome.files.push_back(path);
    const std::string stack_path = opt.out_dir + "/kernel_stack.json";
    detail::write_file(stack_path, detail::kernel_stack_json(art.stack).dump(2) + "\n");
    outcome.files.push_back(stack_path);
    outcome.message = "certificate written";
    return outcome;
}

inline RunOutcome run_rate(const RunConfig& cfg, const RunOptions& opt, std::uint64_t seed) {
    RunOutcome outcome;
    // The infinite-width kernel does not depend on the swept inner widths.
    auto stack = cfg.probes.q == 0 ? kernel_recursion(cfg.network, cfg.probes, cfg.quadrature_order)
                                   : extended_kernel(cfg.network, cfg.probes, cfg.quadrature_order, true);
    const auto nondeg = nondegeneracy_check(stack, cfg.nondegeneracy_tol);
    json summary;
    summary["meta"] = detail::meta_json(cfg, seed, opt.threads);
    summary["kernel"] = detail::kernel_json(stack, nondeg);
    if (!nondeg.pass) {
        summary["status"] = "hypotheses_unmet";
        const std::string path = opt.out_dir + "/rate_summary.json";
        detail::write_file(path, summary.dump(2) + "\n");
        outcome.files.push_back(path);
        outcome.exit_code = 3;
        outcome.message = "non-degeneracy hypothesis unmet; no rate table emitted";
        return outcome;
    }
    const SymMatrix k = stack.probe_matrix(cfg.probes);
    RngStream root(seed);

    std::ostringstream csv;
    csv << "width,mean_gap,eighth_root,tv_bound,w2_bound,tv_measured,ci_mean_gap,ci_eighth\n";
    std::vector<double> mean_gaps, eighth_roots, tvs;
    bool tv_ok = true;
    for (std::size_t i = 0; i < cfg.widths.size(); ++i) {
        NetworkConfig net = cfg.network;
        for (int layer = 1; layer <= net.depth; ++layer)
            net.widths[static_cast<std::size_t>(layer)] = cfg.widths[i];
        const auto moments = estimate_moments(net, cfg.probes, k, cfg.mc.n_mc,
                                              root.substream(100 + i), cfg.mc.bootstrap_n, opt.threads);
        const auto cert = tv_w2_bound(k, moments);
        detail::MeasuredTv tv;
        if (k.dim() == 1)
            tv = detail::measured_tv(net, cfg.probes, k, cfg.mc.n_tv_samples, root.substream(200 + i));
        mean_gaps.push_back(moments.mean_gap);
        eighth_roots.push_back(moments.eighth_root);
        if (tv.available)
            tvs.push_back(tv.value);
        else
            tv_ok = false;
        csv << cfg.widths[i] << ',' << detail::format_double(moments.mean_gap) << ','
            << detail::format_double(moments.eighth_root) << ',' << detail::format_double(cert.tv_bound)
            << ',' << detail::format_double(cert.w2_bound) << ','
            << (tv.available ? detail::format_double(tv.value) : std::string()) << ','
            << detail::format_double(moments.ci_mean_gap) << ','
            << detail::format_double(moments.ci_eighth) << '\n';
    }
    const std::string csv_path = opt.out_dir + "/rate.csv";
    detail::write_file(csv_path, csv.str());
    outcome.files.push_back(csv_path);

    auto fit_json = [&](const std::vector<double>& values) {
        const RateFit fit = rate_fit(cfg.widths, values);
        json f;
        f["slope"] = fit.slope;
        f["intercept"] = fit.intercept;
        f["r2"] = fit.r2;
        return f;
    };
    summary["status"] = "ok";
    summary["fits"]["eighth_root"] = fit_json(eighth_roots);
    summary["fits"]["mean_gap"] = fit_json(mean_gaps);
    if (tv_ok && !tvs.empty()) summary["fits"]["tv_measured"] = fit_json(tvs);
    const std::string path = opt.out_dir + "/rate_summary.json";
    detail::write_file(path, summary.dump(2) + "\n");
    outcome.files.push_back(path);
    outcome.message = "rate table written";
    return outcome;
}

inline RunOutcome run_posterior(const RunConfig& cfg, const RunOptions& opt, std::uint64_t seed) {
    RunOutcome outcome;
    auto art = detail::certify_pipeline(cfg, seed, opt.threads, false);
    json report;
    report["meta"] = detail::meta_json(cfg, seed, opt.threads);
    report["kernel"] = detail::kernel_json(art.stack, art.nondeg);
    const std::string path = opt.out_dir + "/posterior.json";
    if (!art.nondeg.pass) {
        report["status"] = "hypotheses_unmet";
        detail::write_file(path, report.dump(2) + "\n");
        outcome.files.push_back(path);
        outcome.exit_code = 3;
        outcome.message = "non-degeneracy hypothesis unmet; no posterior bound emitted";
        return outcome;
    }
    RngStream root(seed);
    const LikelihoodSpec likelihood = detail::resolve_likelihood(cfg.likelihood, art.k);
    const SampleMatrix samples_z =
        sample_outputs(cfg.network, cfg.probes, cfg.mc.n_tv_samples, root.substream(4));
    validate_likelihood(likelihood, samples_z);
    const LikelihoodMeans means =
        estimate_likelihood_means(samples_z, art.k, likelihood, cfg.mc.n_tv_samples, root.substream(3));
    const double post_bound = posterior_tv_bound(art.cert.tv_bound, likelihood, means.e_lz, means.e_lg);

    report["status"] = "ok";
    report["prior"] = detail::certificate_json(art.cert);
    report["likelihood"] = {{"name", likelihood.description}, {"sup_norm", likelihood.sup_norm}};
    report["e_LZ"] = {{"value", means.e_lz}, {"ci", means.ci_lz}};
    report["e_LG"] = {{"value", means.e_lg}, {"ci", means.ci_lg}};
    report["tv_bound_posterior"] = post_bound;

    if (art.k.dim() <= 2) {
        const auto draws =
            draw_covariances(cfg.network, cfg.probes, cfg.mc.n_tv_samples, root.substream(2));
        const MixtureDensity mixture(draws);
        const auto tv = posterior_tv_numeric(mixture, art.k, likelihood,
                                             detail::mixture_grid(art.k, draws, art.k.dim()));
        report["tv_measured_posterior"] = tv.value;
        report["tv_measured_posterior_error"] = tv.error_estimate;
    }
    detail::write_file(path, report.dump(2) + "\n");
    outcome.files.push_back(path);
    outcome.message = "posterior report written";
    return outcome;
}

namespace detail {

struct SelftestCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

inline std::vector<SelftestCheck> selftest_checks() {
    std::vector<SelftestCheck> checks;
    auto record = [&](const std::string& name, bool pass, const std::string& detail) {
        checks.push_back({name, pass, detail});
    };

    {
        const auto s = spectral(SymMatrix{{0.0, 1.0}, {1.0, 0.0}});
        record("spectral_offdiagonal", std::abs(s.op_norm - 1.0) < 1e-12 &&
                                           std::abs(s.hs_norm - std::sqrt(2.0)) < 1e-12 &&
                                           std::abs(s.min_eig + 1.0) < 1e-12,
               "eigenvalues of [[0,1],[1,0]]");
    }
    {
        const SymMatrix m{{2.0, 0.5}, {0.5, 1.0}};
        const SymMatrix r = psd_sqrt(m);
        record("psd_sqrt_roundtrip", hs_norm(conjugate(r, SymMatrix::identity(2)) - m) < 1e-10,
               "R*R reconstructs M");
    }
    {
        double worst = 0.0;
        for (int k = 0; k <= 6; ++k)
            for (int j = 0; j <= 6; ++j) {
                double expected = k == j ? std::tgamma(k + 1.0) : 0.0;
                const double got = gauss_expectation(
                    [&](const std::vector<double>& x) {
                        return hermite_value(k, x[0]) * hermite_value(j, x[0]);
                    },
                    SymMatrix::identity(1), 64);
                worst = std::max(worst, std::abs(got - expected));
            }
        record("hermite_orthogonality", worst < 1e-8, "order-64 quadrature, k,j <= 6");
    }
    {
        const double got = isserlis_moment(SymMatrix::identity(2), {0, 0, 1, 1});
        record("isserlis_pairing", std::abs(got - 1.0) < 1e-14, "E[N1^2 N2^2] = 1");
    }
    {
        const SymMatrix cov{{1.0, 0.3}, {0.3, 1.0}};
        const double got = gauss_expectation(
            [](const std::vector<double>& z) { return z[0] * z[1]; }, cov, 24);
        record("quadrature_covariance", std::abs(got - 0.3) < 1e-12, "E[Z1 Z2] = rho");
    }
    {
        NetworkConfig net;
        net.depth = 2;
        net.widths = {2, 8, 8, 1};
        net.c_b = 0.4;
        net.c_w = 1.3;
        net.activation = make_activation(ActivationKind::identity);
        ProbeSet probes;
        probes.inputs = {{1.0, 0.5}, {-0.3, 0.8}};
        probes.multi_indices = {{}, {}};
        probes.q = 0;
        const auto quad = kernel_recursion(net, probes, 24, false);
        const auto oracle = closed_form_oracle(net, probes);
        record("kernel_identity_oracle",
               hs_norm(quad.final_layer() - oracle.final_layer()) < 1e-8, "affine recursion");
        net.activation = make_activation(ActivationKind::relu);
        const auto quad_r = kernel_recursion(net, probes, 80, false);
        const auto oracle_r = closed_form_oracle(net, probes);
        record("kernel_relu_oracle",
               hs_norm(quad_r.final_layer() - oracle_r.final_layer()) < 1e-6, "arc-cosine form");
    }
    {
        const GaussianDensity p(SymMatrix{{1.0}});
        auto q = [&](const std::vector<double>& x) {
            const std::vector<double> shifted{x[0] - 1.0};
            return p(shifted);
        };
        const auto tv = tv_numeric(p, q, symmetric_grid(1, 10.0, 2001));
        const double expected = 0.38292492254802624;  // 2 Phi(1/2) - 1
        record("tv_mean_shift", std::abs(tv.value - expected) < 1e-6, "closed-form mean shift");
    }
    {
        const SymMatrix k = SymMatrix::identity(1);
        const auto m = deterministic_moments(SymMatrix{{1.1}}, k);
        const auto cert = tv_w2_bound(k, m);
        double mean_term = 0.0, eighth_term = 0.0;
        for (const auto& t : cert.term_breakdown) {
            if (t.name == "tv.mean_gap_term") mean_term = t.value;
            if (t.name == "tv.eighth_moment_term") eighth_term = t.value;
        }
        record("bound_assembly_audit",
               std::abs(mean_term + eighth_term - cert.tv_bound) <= 1e-12 * cert.tv_bound,
               "breakdown recombines to the bound");
    }
    {
        NetworkConfig net;
        net.depth = 1;
        net.widths = {2, 16, 1};
        net.c_b = 0.3;
        net.c_w = 1.5;
        ProbeSet probes;
        probes.inputs = {{1.0, 0.5}};
        probes.multi_indices = {{}};
        probes.q = 0;
        const RngStream stream(1234);
        const auto a = conditional_covariance(sample_parameters(net, stream), probes, net).matrix;
        const auto b = conditional_covariance(sample_parameters(net, stream), probes, net).matrix;
        record("determinism", a(0, 0) == b(0, 0), "equal seeds give equal draws");
    }
    return checks;
}

}  // namespace detail

inline RunOutcome run_selftest(const RunConfig& cfg, const RunOptions& opt, std::uint64_t seed) {
    RunOutcome outcome;
    const auto checks = detail::selftest_checks();
    json report;
    report["meta"] = detail::meta_json(cfg, seed, opt.threads);
    json list = json::array();
    bool all = true;
    std::ostringstream text;
    for (const auto& c : checks) {
        all = all && c.pass;
        json cj;
        cj["name"] = c.name;
        cj["pass"] = c.pass;
        cj["detail"] = c.detail;
        list.push_back(cj);
        text << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " - " << c.detail << "\n";
    }
    report["checks"] = list;
    report["all_pass"] = all;
    const std::string path = opt.out_dir + "/selftest.json";
    detail::write_file(path, report.dump(2) + "\n");
    outcome.files.push_back(path);
    outcome.exit_code = all ? 0 : 4;
    outcome.message = text.str() + (all ? "selftest passed" : "selftest FAILED");
    return outcome;
}

// Front door: validate, dispatch, map failures onto the exit-code contract.
inline RunOutcome run(const RunConfig& cfg, const RunOptions& opt) {
    const auto diagnostics = validate(cfg);
    bool fatal = false;
    std::ostringstream msg;
    for (const auto& d : diagnostics) {
        fatal = fatal || d.severity == Diagnostic::Severity::error;
        msg << (d.severity == Diagnostic::Severity::error ? "error: " : "warning: ") << d.message << "\n";
    }
    if (fatal) return {2, msg.str(), {}};

    const std::uint64_t seed = opt.seed_overridden ? opt.seed : cfg.network.seed;
    try {
        if (cfg.command == "certify") return run_certify(cfg, opt, seed);
        if (cfg.command == "rate") return run_rate(cfg, opt, seed);
        if (cfg.command == "posterior") return run_posterior(cfg, opt, seed);
        if (cfg.command == "selftest") return run_selftest(cfg, opt, seed);
    } catch (const ConfigError& e) {
        return {2, std::string("config error: ") + e.what(), {}};
    } catch (const Error& e) {
        return {4, std::string("numerical failure: ") + e.what(), {}};
    }
    return {2, "unknown command: " + cfg.command, {}};
}

}  // namespace wlc
