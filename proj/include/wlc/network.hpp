#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "wlc/activation.hpp"
#include "wlc/errors.hpp"
#include "wlc/matrix.hpp"
#include "wlc/multiindex.hpp"
#include "wlc/rng.hpp"

namespace wlc {

// Fully connected feed-forward architecture: depth L, widths n_0..n_{L+1},
// bias variance C_b, weight variance C_W / fan-in.
struct NetworkConfig {
    int depth = 1;  // L
    std::vector<int> widths;  // n_0 .. n_{L+1}
    double c_b = 0.0;
    double c_w = 1.0;
    ActivationSpec activation = make_activation(ActivationKind::tanh);
    std::uint64_t seed = 0;

    int n0() const { return widths.front(); }
    int width(int layer) const { return widths[static_cast<std::size_t>(layer)]; }

    void check() const {
        if (depth < 0) throw ConfigError("NetworkConfig: depth must be >= 0");
        if (static_cast<int>(widths.size()) != depth + 2)
            throw ConfigError("NetworkConfig: widths must list n_0..n_{L+1}");
        for (int w : widths)
            if (w < 1) throw ConfigError("NetworkConfig: widths must be positive");
        if (c_w <= 0.0) throw ConfigError("NetworkConfig: C_W must be > 0");
        if (c_b < 0.0) throw ConfigError("NetworkConfig: C_b must be >= 0");
    }
};

// Probe specification: d input points, p unit direction vectors, one
// multi-index J^(j) per input with |J^(j)| <= q <= 2.
struct ProbeSet {
    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> directions;
    std::vector<std::vector<int>> multi_indices;
    int q = 0;

    int dim() const { return static_cast<int>(inputs.size()); }
    int n_directions() const { return static_cast<int>(directions.size()); }

    // Normalizes directions to unit length and checks the structural
    // invariants. Inputs must be nonzero whenever q >= 1 (mixed derivatives
    // at the highest order are only almost-surely defined away from 0).
    void normalize_and_check() {
        if (inputs.empty()) throw ConfigError("ProbeSet: needs at least one input");
        const std::size_t n0 = inputs.front().size();
        if (n0 == 0) throw ConfigError("ProbeSet: empty input vector");
        for (const auto& x : inputs)
            if (x.size() != n0) throw ConfigError("ProbeSet: inputs of unequal dimension");
        if (q < 0 || q > 2) throw ConfigError("ProbeSet: q must be 0, 1 or 2");
        if (q >= 1) {
            for (const auto& x : inputs) {
                double norm2 = 0.0;
                for (double v : x) norm2 += v * v;
                if (norm2 == 0.0) throw ConfigError("ProbeSet: zero input with q >= 1 (x != 0 required)");
            }
            if (directions.empty()) throw ConfigError("ProbeSet: q >= 1 needs direction vectors");
        }
        for (auto& v : directions) {
            if (v.size() != n0) throw ConfigError("ProbeSet: direction dimension mismatch");
            double norm = 0.0;
            for (double c : v) norm += c * c;
            norm = std::sqrt(norm);
            if (norm == 0.0) throw ConfigError("ProbeSet: zero direction vector");
            for (double& c : v) c /= norm;
        }
        if (multi_indices.empty())
            multi_indices.assign(inputs.size(), std::vector<int>(directions.size(), 0));
        if (multi_indices.size() != inputs.size())
            throw ConfigError("ProbeSet: one multi-index per input required");
        for (const auto& j : multi_indices) {
            if (j.size() != directions.size())
                throw ConfigError("ProbeSet: multi-index length must equal number of directions");
            int total = 0;
            for (int v : j) {
                if (v < 0) throw ConfigError("ProbeSet: negative multi-index entry");
                total += v;
            }
            if (total > q) throw ConfigError("ProbeSet: |J| exceeds q");
        }
    }

    // Jet component set shared by the forward pass and the kernel recursion.
    std::vector<std::vector<int>> component_set() const {
        return multi_index_set(n_directions(), q);
    }

    // Position of probe j's multi-index in component_set().
    int component_of(int probe) const {
        const auto set = component_set();
        const int pos = multi_index_position(set, multi_indices[static_cast<std::size_t>(probe)]);
        if (pos < 0) throw ConfigError("ProbeSet: multi-index not in M_q");
        return pos;
    }
};

struct ParameterDraw {
    std::vector<Eigen::MatrixXd> weights;  // weights[l-1]: n_l x n_{l-1}, layer l = 1..L+1
    std::vector<Eigen::VectorXd> biases;   // biases[l-1]: n_l
    NetworkConfig config;
    std::uint64_t provenance = 0;  // key of the stream the draw came from
};

// Gaussian initialization: biases ~ N(0, C_b), weights ~ N(0, C_W/n_{l-1}),
// all mutually independent. Layer l draws from stream.substream(l) in a fixed
// order (biases, then weights row-major), so equal seeds give equal draws and
// substream 0 stays free for output-layer normals.
inline ParameterDraw sample_parameters(const NetworkConfig& config, const RngStream& stream) {
    config.check();
    ParameterDraw draw;
    draw.config = config;
    draw.provenance = stream.key();
    const double sb = std::sqrt(config.c_b);
    for (int layer = 1; layer <= config.depth + 1; ++layer) {
        RngStream sub = stream.substream(static_cast<std::uint64_t>(layer));
        const int fan_in = config.width(layer - 1);
        const int fan_out = config.width(layer);
        const double sw = std::sqrt(config.c_w / fan_in);
        Eigen::VectorXd b(fan_out);
        for (int i = 0; i < fan_out; ++i) b(i) = sb * sub.next_gaussian();
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int i = 0; i < fan_out; ++i)
            for (int j = 0; j < fan_in; ++j) w(i, j) = sw * sub.next_gaussian();
        draw.biases.push_back(std::move(b));
        draw.weights.push_back(std::move(w));
    }
    return draw;
}

// Preactivation jets for every layer and unit: layers[probe][l-1] is the
// n_l x n_comp matrix of V^J z^{(l)} components, columns indexed by the
// probe component set.
struct JetValues {
    std::vector<std::vector<Eigen::MatrixXd>> layers;
    std::vector<std::vector<double>> inputs_used;  // after any kink perturbation
    std::vector<std::vector<int>> component_set;
    int kink_perturbations = 0;

    double component(int probe, int layer, int unit, int comp) const {
        return layers[static_cast<std::size_t>(probe)][static_cast<std::size_t>(layer - 1)](unit, comp);
    }
};

namespace detail {

// sigma applied to a matrix of jets, row-wise; truncated Taylor (jet)
// transport: out_0 = s(u_0), out_a = s'(u_0) u_a,
// out_{ab} = s''(u_0) u_a u_b + s'(u_0) u_{ab}.
inline Eigen::MatrixXd sigma_jet(const Eigen::MatrixXd& h, const ActivationSpec& act,
                                 const std::vector<std::vector<int>>& comps, int p, int q) {
    Eigen::MatrixXd out(h.rows(), h.cols());
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
        const double u0 = h(r, 0);
        const double s0 = act.value(u0);
        out(r, 0) = s0;
        if (q >= 1) {
            const double d1 = act.deriv1(u0);
            for (int a = 0; a < p; ++a) out(r, 1 + a) = d1 * h(r, 1 + a);
            if (q >= 2) {
                const double d2 = act.deriv2(u0);
                for (std::size_t c = static_cast<std::size_t>(1 + p); c < comps.size(); ++c) {
                    int a = -1, b = -1;
                    for (int dir = 0; dir < p; ++dir) {
                        if (comps[c][static_cast<std::size_t>(dir)] >= 1 && a < 0) a = dir;
                        if (comps[c][static_cast<std::size_t>(dir)] >= 1) b = dir;
                        if (comps[c][static_cast<std::size_t>(dir)] == 2) a = b = dir;
                    }
                    out(r, static_cast<Eigen::Index>(c)) =
                        d2 * h(r, 1 + a) * h(r, 1 + b) + d1 * h(r, static_cast<Eigen::Index>(c));
                }
            }
        }
    }
    return out;
}

// Input-coordinate jets for one probe: component 0 is x itself, component
// e_a is the direction vector v_a, second-order components vanish.
inline Eigen::MatrixXd input_jets(const std::vector<double>& x, const ProbeSet& probes, int n_comp) {
    const int n0 = static_cast<int>(x.size());
    Eigen::MatrixXd jets = Eigen::MatrixXd::Zero(n0, n_comp);
    for (int s = 0; s < n0; ++s) jets(s, 0) = x[static_cast<std::size_t>(s)];
    if (probes.q >= 1)
        for (int a = 0; a < probes.n_directions(); ++a)
            for (int s = 0; s < n0; ++s)
                jets(s, 1 + a) = probes.directions[static_cast<std::size_t>(a)][static_cast<std::size_t>(s)];
    return jets;
}

}  // namespace detail

// Forward pass with directional jets through the recursion. For ReLU with
// q >= 1, a preactivation within 1e-12 of the kink makes the jet ill-defined;
// the probe is re-perturbed by 1e-9 * ||x|| along a deterministic direction
// and the event is recorded (the kink is a null event that floating point
// can still hit).
inline JetValues forward_with_jets(const ParameterDraw& params, const ProbeSet& probes) {
    const NetworkConfig& config = params.config;
    const int q = probes.q;
    if (!config.activation.supports_order(q))
        throw SmoothnessViolation("forward_with_jets: activation does not support this q");
    const auto comps = probes.component_set();
    const int n_comp = static_cast<int>(comps.size());
    const int p = probes.n_directions();
    const bool kink_sensitive = config.activation.kind == ActivationKind::relu && q >= 1;

    JetValues out;
    out.component_set = comps;
    out.layers.resize(probes.inputs.size());
    out.inputs_used.resize(probes.inputs.size());

    for (int probe = 0; probe < probes.dim(); ++probe) {
        std::vector<double> x = probes.inputs[static_cast<std::size_t>(probe)];
        for (int attempt = 0;; ++attempt) {
            if (attempt > 16) throw KinkHit("forward_with_jets: persistent ReLU kink hits");
            std::vector<Eigen::MatrixXd> layer_jets;
            Eigen::MatrixXd state = detail::input_jets(x, probes, n_comp);
            bool kink = false;
            for (int layer = 1; layer <= config.depth + 1; ++layer) {
                Eigen::MatrixXd z = params.weights[static_cast<std::size_t>(layer - 1)] * state;
                z.col(0) += params.biases[static_cast<std::size_t>(layer - 1)];
                if (kink_sensitive && layer <= config.depth && z.col(0).cwiseAbs().minCoeff() < 1e-12) {
                    kink = true;
                    break;
                }
                layer_jets.push_back(z);
                if (layer <= config.depth)
                    state = detail::sigma_jet(z, config.activation, comps, p, q);
            }
            if (!kink) {
                out.layers[static_cast<std::size_t>(probe)] = std::move(layer_jets);
                out.inputs_used[static_cast<std::size_t>(probe)] = x;
                break;
            }
            ++out.kink_perturbations;
            double norm = 0.0;
            for (double v : x) norm += v * v;
            norm = std::sqrt(norm);
            RngStream jitter(0x6b696e6bULL + static_cast<std::uint64_t>(attempt) * 7919ULL +
                             static_cast<std::uint64_t>(probe));
            std::vector<double> u(x.size());
            double unorm = 0.0;
            for (auto& v : u) {
                v = jitter.next_gaussian();
                unorm += v * v;
            }
            unorm = std::sqrt(unorm);
            for (std::size_t s = 0; s < x.size(); ++s) x[s] += 1e-9 * norm * u[s] / unorm;
        }
    }
    return out;
}

// One draw of the derivative-extended conditional covariance matrix.
struct CovSample {
    SymMatrix matrix;
    std::uint64_t seed_stream = 0;
    int kink_perturbations = 0;
};

// A_{ij} = C_b [J_i = 0][J_j = 0] + (C_W/n_L) sum_k V^{J_i} s(z_k(x_i)) V^{J_j} s(z_k(x_j))
// for L >= 1; the L = 0 branch is the exact affine form on coordinate jets.
inline CovSample conditional_covariance(const ParameterDraw& params, const ProbeSet& probes,
                                        const NetworkConfig& config) {
    const int d = probes.dim();
    const auto comps = probes.component_set();
    const int n_comp = static_cast<int>(comps.size());
    std::vector<int> pos(static_cast<std::size_t>(d));
    std::vector<bool> is_zero(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        pos[static_cast<std::size_t>(j)] = probes.component_of(j);
        is_zero[static_cast<std::size_t>(j)] =
            multi_index_order(probes.multi_indices[static_cast<std::size_t>(j)]) == 0;
    }

    CovSample sample{SymMatrix(d), params.provenance, 0};
    if (config.depth == 0) {
        const double scale = config.c_w / config.n0();
        std::vector<Eigen::MatrixXd> jets;
        for (int i = 0; i < d; ++i)
            jets.push_back(detail::input_jets(probes.inputs[static_cast<std::size_t>(i)], probes, n_comp));
        for (int i = 0; i < d; ++i) {
            for (int j = i; j < d; ++j) {
                double v = scale * jets[static_cast<std::size_t>(i)].col(pos[static_cast<std::size_t>(i)]).dot(
                                       jets[static_cast<std::size_t>(j)].col(pos[static_cast<std::size_t>(j)]));
                if (is_zero[static_cast<std::size_t>(i)] && is_zero[static_cast<std::size_t>(j)]) v += config.c_b;
                sample.matrix.set(i, j, v);
            }
        }
        return sample;
    }

    const JetValues jets = forward_with_jets(params, probes);
    sample.kink_perturbations = jets.kink_perturbations;
    const int n_l = config.width(config.depth);
    const double scale = config.c_w / n_l;
    std::vector<Eigen::MatrixXd> activated;
    for (int i = 0; i < d; ++i)
        activated.push_back(detail::sigma_jet(
            jets.layers[static_cast<std::size_t>(i)][static_cast<std::size_t>(config.depth - 1)],
            config.activation, comps, probes.n_directions(), probes.q));
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            double v = scale * activated[static_cast<std::size_t>(i)].col(pos[static_cast<std::size_t>(i)]).dot(
                                   activated[static_cast<std::size_t>(j)].col(pos[static_cast<std::size_t>(j)]));
            if (is_zero[static_cast<std::size_t>(i)] && is_zero[static_cast<std::size_t>(j)]) v += config.c_b;
            sample.matrix.set(i, j, v);
        }
    }
    return sample;
}

struct SampleMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;  // row-major

    double at(int i, int j) const {
        return data[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(j)];
    }
    double& at(int i, int j) {
        return data[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(j)];
    }
};

// Draws of the network observation vector (V^{J_j} z_1^{(L+1)}(x_j))_j:
// each row uses a fresh parameter draw for the inner layers and a fresh
// standard normal for the output layer, realized as sqrt(A) N.
inline SampleMatrix sample_outputs(const NetworkConfig& config, const ProbeSet& probes, int n_samples,
                                   const RngStream& stream) {
    if (n_samples < 1) throw InvalidData("sample_outputs: n_samples must be >= 1");
    const int d = probes.dim();
    SampleMatrix out;
    out.rows = n_samples;
    out.cols = d;
    out.data.assign(static_cast<std::size_t>(n_samples) * static_cast<std::size_t>(d), 0.0);
    for (int s = 0; s < n_samples; ++s) {
        RngStream sub = stream.substream(static_cast<std::uint64_t>(s));
        const ParameterDraw params = sample_parameters(config, sub);
        const CovSample cov = conditional_covariance(params, probes, config);
        const SymMatrix root = psd_sqrt(cov.matrix);
        RngStream normals = sub.substream(0);
        std::vector<double> n(static_cast<std::size_t>(d));
        for (auto& v : n) v = normals.next_gaussian();
        const auto row = root.apply(n);
        for (int j = 0; j < d; ++j) out.at(s, j) = row[static_cast<std::size_t>(j)];
    }
    return out;
}

}  // namespace wlc
