#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "wlc/activation.hpp"
#include "wlc/errors.hpp"
#include "wlc/network.hpp"

namespace wlc {

using json = nlohmann::ordered_json;

inline ProbeSet probe_set_from_json(const json& j) {
    ProbeSet probes;
    if (!j.contains("inputs")) throw ConfigError("probes: missing inputs");
    probes.inputs = j.at("inputs").get<std::vector<std::vector<double>>>();
    if (j.contains("directions")) probes.directions = j.at("directions").get<std::vector<std::vector<double>>>();
    if (j.contains("multi_indices")) probes.multi_indices = j.at("multi_indices").get<std::vector<std::vector<int>>>();
    probes.q = j.value("q", 0);
    probes.normalize_and_check();
    return probes;
}

inline json probe_set_to_json(const ProbeSet& probes) {
    json j;
    j["inputs"] = probes.inputs;
    j["directions"] = probes.directions;
    j["multi_indices"] = probes.multi_indices;
    j["q"] = probes.q;
    return j;
}

struct McConfig {
    int n_mc = 4000;
    int n_tv_samples = 20000;
    int bootstrap_n = 1000;
};

struct LikelihoodConfig {
    std::string name;
    double value = 1.0;              // constant
    std::vector<double> center;      // gaussian-bump
    std::vector<double> direction;   // smoothed-threshold
    double threshold = 0.0;
    double width = 0.0;              // 0 = use the default mollification width
};

struct RunConfig {
    int schema_version = 1;
    std::string command;
    NetworkConfig network;
    ProbeSet probes;
    McConfig mc;
    int quadrature_order = 96;
    std::vector<int> widths;  // rate sweep of the inner widths
    bool has_likelihood = false;
    LikelihoodConfig likelihood;
    double nondegeneracy_tol = 1e-8;
    std::string output_format = "json";
    std::string canonical;  // canonical serialization, hashed into reports
};

inline RunConfig parse_run_config(const json& j) {
    RunConfig cfg;
    cfg.schema_version = j.value("schema_version", 1);
    if (cfg.schema_version != 1) throw ConfigError("unsupported schema_version");
    if (!j.contains("command")) throw ConfigError("missing command");
    cfg.command = j.at("command").get<std::string>();

    if (!j.contains("network")) throw ConfigError("missing network section");
    const json& n = j.at("network");
    cfg.network.depth = n.value("depth", 1);
    if (!n.contains("widths")) throw ConfigError("network: missing widths");
    cfg.network.widths = n.at("widths").get<std::vector<int>>();
    cfg.network.c_b = n.value("c_b", 0.0);
    cfg.network.c_w = n.value("c_w", 1.0);
    cfg.network.activation = make_activation(activation_from_name(n.value("activation", "tanh")));
    cfg.network.seed = n.value("seed", static_cast<std::uint64_t>(0));

    if (!j.contains("probes")) throw ConfigError("missing probes section");
    cfg.probes = probe_set_from_json(j.at("probes"));

    if (j.contains("mc")) {
        const json& m = j.at("mc");
        cfg.mc.n_mc = m.value("n_mc", cfg.mc.n_mc);
        cfg.mc.n_tv_samples = m.value("n_tv_samples", cfg.mc.n_tv_samples);
        cfg.mc.bootstrap_n = m.value("bootstrap_n", cfg.mc.bootstrap_n);
    }
    if (j.contains("quadrature")) cfg.quadrature_order = j.at("quadrature").value("order", 96);
    if (j.contains("widths")) cfg.widths = j.at("widths").get<std::vector<int>>();
    if (j.contains("likelihood")) {
        cfg.has_likelihood = true;
        const json& l = j.at("likelihood");
        cfg.likelihood.name = l.value("name", "");
        cfg.likelihood.value = l.value("value", 1.0);
        if (l.contains("center")) cfg.likelihood.center = l.at("center").get<std::vector<double>>();
        if (l.contains("direction")) cfg.likelihood.direction = l.at("direction").get<std::vector<double>>();
        cfg.likelihood.threshold = l.value("threshold", 0.0);
        cfg.likelihood.width = l.value("width", 0.0);
    }
    cfg.nondegeneracy_tol = j.value("nondegeneracy_tol", 1e-8);
    if (j.contains("output")) cfg.output_format = j.at("output").value("format", "json");
    cfg.canonical = j.dump();
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_run_config(j);
}

struct Diagnostic {
    enum class Severity { warning, error };
    Severity severity = Severity::error;
    std::string message;
};

// Structural checks beyond parsing: probe admissibility against q and the
// activation, width positivity, likelihood boundedness declaration, and
// command-specific requirements. Diagnostics only; callers decide what to do.
inline std::vector<Diagnostic> validate(const RunConfig& cfg) {
    std::vector<Diagnostic> out;
    auto error = [&](const std::string& m) { out.push_back({Diagnostic::Severity::error, m}); };

    if (cfg.command != "certify" && cfg.command != "rate" && cfg.command != "posterior" &&
        cfg.command != "selftest")
        error("command must be one of certify, rate, posterior, selftest");

    try {
        cfg.network.check();
    } catch (const ConfigError& e) {
        error(e.what());
    }

    if (cfg.probes.q >= 1) {
        for (std::size_t i = 0; i < cfg.probes.inputs.size(); ++i) {
            double norm2 = 0.0;
            for (double v : cfg.probes.inputs[i]) norm2 += v * v;
            if (norm2 == 0.0)
                error("probe input " + std::to_string(i) +
                      " is zero with q >= 1: derivatives require x != 0");
        }
    }
    if (!cfg.network.activation.supports_order(cfg.probes.q))
        error("SmoothnessViolation: activation '" + activation_name(cfg.network.activation.kind) +
              "' does not support derivative order q=" + std::to_string(cfg.probes.q));
    if (!cfg.probes.inputs.empty() && cfg.probes.inputs.front().size() !=
                                          static_cast<std::size_t>(cfg.network.widths.empty() ? 0 : cfg.network.widths.front()))
        error("probe input dimension does not match n_0");

    // Near-coincident probes force kernel degeneracy and quadrature
    // instability; reject them at ingestion.
    for (std::size_t i = 0; i < cfg.probes.inputs.size(); ++i) {
        for (std::size_t j = i + 1; j < cfg.probes.inputs.size(); ++j) {
            double dot = 0.0, ni = 0.0, nj = 0.0;
            for (std::size_t s = 0; s < cfg.probes.inputs[i].size(); ++s) {
                dot += cfg.probes.inputs[i][s] * cfg.probes.inputs[j][s];
                ni += cfg.probes.inputs[i][s] * cfg.probes.inputs[i][s];
                nj += cfg.probes.inputs[j][s] * cfg.probes.inputs[j][s];
            }
            if (ni > 0.0 && nj > 0.0 && dot / std::sqrt(ni * nj) > 1.0 - 1e-10)
                error("probe inputs " + std::to_string(i) + " and " + std::to_string(j) +
                      " are near-coincident (cosine similarity > 1 - 1e-10)");
        }
    }

    if (cfg.mc.n_mc < 100) error("mc.n_mc must be >= 100");
    if (cfg.quadrature_order < 2) error("quadrature.order must be >= 2");

    if (cfg.command == "rate") {
        if (cfg.widths.size() < 4) error("rate: needs at least 4 widths");
        for (std::size_t i = 0; i + 1 < cfg.widths.size(); ++i)
            if (cfg.widths[i] >= cfg.widths[i + 1]) error("rate: widths must be strictly increasing");
        for (int w : cfg.widths)
            if (w < 1) error("rate: widths must be positive");
    }
    if (cfg.command == "posterior") {
        if (!cfg.has_likelihood) error("posterior: needs a likelihood section");
    }
    if (cfg.has_likelihood) {
        const auto& l = cfg.likelihood;
        if (l.name != "constant" && l.name != "gaussian-bump" && l.name != "smoothed-threshold")
            error("likelihood.name must be constant, gaussian-bump or smoothed-threshold");
        if (l.name == "constant" && l.value <= 0.0) error("constant likelihood needs value > 0");
        if (l.name == "gaussian-bump" && l.center.size() != cfg.probes.inputs.size())
            error("gaussian-bump center must have one coordinate per probe");
        if (l.name == "smoothed-threshold" && l.direction.size() != cfg.probes.inputs.size())
            error("smoothed-threshold direction must have one coordinate per probe");
        if (l.width < 0.0) error("likelihood width must be >= 0 (0 = default mollification)");
    }
    if (cfg.output_format != "json" && cfg.output_format != "csv")
        error("output.format must be json or csv");
    return out;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace wlc
