#pragma once

#include <cmath>
#include <string>

#include "wlc/errors.hpp"

namespace wlc {

enum class ActivationKind { identity, relu, tanh, sigmoid };

// Activation descriptor with derivative evaluators up to order 2.
// smoothness_r is the regularity order of the activation assumption: ReLU is
// piece-wise linear (r = 1); the smooth activations carry a nominal large r.
struct ActivationSpec {
    ActivationKind kind = ActivationKind::tanh;
    int smoothness_r = 99;

    double value(double x) const {
        switch (kind) {
            case ActivationKind::identity: return x;
            case ActivationKind::relu: return x > 0.0 ? x : 0.0;
            case ActivationKind::tanh: return std::tanh(x);
            case ActivationKind::sigmoid: return 1.0 / (1.0 + std::exp(-x));
        }
        return x;
    }

    double deriv1(double x) const {
        switch (kind) {
            case ActivationKind::identity: return 1.0;
            case ActivationKind::relu: return x > 0.0 ? 1.0 : 0.0;
            case ActivationKind::tanh: {
                const double t = std::tanh(x);
                return 1.0 - t * t;
            }
            case ActivationKind::sigmoid: {
                const double s = 1.0 / (1.0 + std::exp(-x));
                return s * (1.0 - s);
            }
        }
        return 1.0;
    }

    double deriv2(double x) const {
        switch (kind) {
            case ActivationKind::identity: return 0.0;
            case ActivationKind::relu: return 0.0;
            case ActivationKind::tanh: {
                const double t = std::tanh(x);
                return -2.0 * t * (1.0 - t * t);
            }
            case ActivationKind::sigmoid: {
                const double s = 1.0 / (1.0 + std::exp(-x));
                return s * (1.0 - s) * (1.0 - 2.0 * s);
            }
        }
        return 0.0;
    }

    // Highest derivative order q for which V^J sigma(z) jets are available.
    // ReLU supports q = 1 only away from the kink (handled by the forward
    // pass perturbation policy); q = 2 would need sigma'' across the kink.
    bool supports_order(int q) const {
        if (kind == ActivationKind::relu) return q <= 1;
        return q <= 2;
    }
};

inline ActivationSpec make_activation(ActivationKind kind) {
    ActivationSpec a;
    a.kind = kind;
    a.smoothness_r = (kind == ActivationKind::relu) ? 1 : 99;
    return a;
}

inline ActivationKind activation_from_name(const std::string& name) {
    if (name == "identity") return ActivationKind::identity;
    if (name == "relu") return ActivationKind::relu;
    if (name == "tanh") return ActivationKind::tanh;
    if (name == "sigmoid") return ActivationKind::sigmoid;
    throw ConfigError("unknown activation: " + name);
}

inline std::string activation_name(ActivationKind kind) {
    switch (kind) {
        case ActivationKind::identity: return "identity";
        case ActivationKind::relu: return "relu";
        case ActivationKind::tanh: return "tanh";
        case ActivationKind::sigmoid: return "sigmoid";
    }
    return "?";
}

}  // namespace wlc
