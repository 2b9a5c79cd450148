#pragma once

// Mini-batch SGD with momentum, decoupled-from-bias weight decay and
// gradient clipping:
//   g' = clip(g) + weight_decay * w   (decay on weights only)
//   v  = momentum * v - lr * g'
//   p  = p + v
// Clipping is global-norm by default: if ||g||_2 > clip_norm every component
// is scaled by clip_norm/||g||_2, preserving direction. Per-component value
// clipping is available as an alternative mode.

#include <cmath>
#include <stdexcept>

#include "padnet/network.hpp"

namespace padnet {

enum class ClipMode { Norm, Value };

struct SgdOptions {
    double lr = 0.01;
    double momentum = 0.9;
    double weight_decay = 0.0001;
    double clip_norm = 0.1;
    ClipMode clip_mode = ClipMode::Norm;
};

struct OptimState {
    std::array<ConvGrads, 5> velocity;
    long iteration = 0;

    static OptimState zeros_like(const NetworkParams& p) {
        OptimState s;
        for (int l = 0; l < 5; ++l) {
            s.velocity[std::size_t(l)].weights.assign(p.conv[std::size_t(l)].weights.size(), 0.0);
            s.velocity[std::size_t(l)].biases.assign(p.conv[std::size_t(l)].biases.size(), 0.0);
        }
        return s;
    }
};

inline double global_grad_norm(const ParamGrads& grads) {
    double sq = 0.0;
    for (const ConvGrads& g : grads.conv) {
        for (double v : g.weights) sq += v * v;
        for (double v : g.biases) sq += v * v;
    }
    return std::sqrt(sq);
}

inline bool grads_finite(const ParamGrads& grads) {
    for (const ConvGrads& g : grads.conv) {
        for (double v : g.weights)
            if (!std::isfinite(v)) return false;
        for (double v : g.biases)
            if (!std::isfinite(v)) return false;
    }
    return true;
}

inline ParamGrads clip_gradients(ParamGrads grads, double clip_norm,
                                 ClipMode mode = ClipMode::Norm) {
    if (!(clip_norm > 0.0)) throw std::invalid_argument("clip_gradients: clip_norm must be positive");
    if (!grads_finite(grads)) throw std::runtime_error("clip_gradients: non-finite gradient");
    if (mode == ClipMode::Value) {
        for (ConvGrads& g : grads.conv) {
            for (double& v : g.weights) v = std::clamp(v, -clip_norm, clip_norm);
            for (double& v : g.biases) v = std::clamp(v, -clip_norm, clip_norm);
        }
        return grads;
    }
    double norm = global_grad_norm(grads);
    if (norm > clip_norm) {
        double s = clip_norm / norm;
        for (ConvGrads& g : grads.conv) {
            for (double& v : g.weights) v *= s;
            for (double& v : g.biases) v *= s;
        }
    }
    return grads;
}

inline void sgd_step(NetworkParams& params, const ParamGrads& grads, OptimState& state,
                     const SgdOptions& opt) {
    for (std::size_t l = 0; l < 5; ++l)
        if (grads.conv[l].weights.size() != params.conv[l].weights.size() ||
            grads.conv[l].biases.size() != params.conv[l].biases.size() ||
            state.velocity[l].weights.size() != params.conv[l].weights.size() ||
            state.velocity[l].biases.size() != params.conv[l].biases.size())
            throw std::invalid_argument("sgd_step: shape mismatch");

    ParamGrads clipped = clip_gradients(grads, opt.clip_norm, opt.clip_mode);
    for (std::size_t l = 0; l < 5; ++l) {
        ConvLayer& layer = params.conv[l];
        ConvGrads& vel = state.velocity[l];
        const ConvGrads& g = clipped.conv[l];
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
            double gp = g.weights[i] + opt.weight_decay * layer.weights[i];
            vel.weights[i] = opt.momentum * vel.weights[i] - opt.lr * gp;
            layer.weights[i] += vel.weights[i];
        }
        for (std::size_t i = 0; i < layer.biases.size(); ++i) {
            vel.biases[i] = opt.momentum * vel.biases[i] - opt.lr * g.biases[i];
            layer.biases[i] += vel.biases[i];
        }
    }
    ++state.iteration;
}

}  // namespace padnet
