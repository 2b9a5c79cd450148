#pragma once

// Finite-difference verification harnesses: analytic loss gradients against
// central differences on random image pairs, and full network weight/bias
// gradients through forward + loss. Comparison excludes elements whose
// analytic gradient is below 1e-8 (relative error is meaningless there) and,
// for the absolute-error losses, pixels within 1e-3 of a zero crossing where
// the subgradient is discontinuous.

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "padnet/losses.hpp"
#include "padnet/network.hpp"
#include "padnet/rng.hpp"

namespace padnet {

struct GradCheckReport {
    double max_rel_err = 0.0;
    long compared = 0;
    long excluded = 0;
};

inline double loss_gradcheck_tolerance(LossKind kind) {
    return (kind == LossKind::L2 || kind == LossKind::L1) ? 1e-8 : 1e-4;
}

inline bool l1_family(LossKind kind) {
    return kind == LossKind::L1 || kind == LossKind::MSSSIM_L1;
}

// Central-difference step per loss. The pixel losses are exactly quadratic /
// piecewise linear, so a large step costs no truncation and lifts the signal
// clear of summation roundoff. The windowed losses balance h^2 truncation
// against 1/h cancellation; steps sit at each loss's measured optimum.
inline double loss_gradcheck_step(LossKind kind) {
    switch (kind) {
        case LossKind::L2: return 1e-2;
        case LossKind::L1: return 1e-4;
        case LossKind::SSIM: return 6e-5;
        case LossKind::MSSSIM: return 1.3e-4;
        case LossKind::MSSSIM_L2: return 1.6e-4;
        case LossKind::MSSSIM_L1: return 1.3e-4;
    }
    return 1e-4;
}

namespace detail {

inline double rel_err(double a, double b) {
    double denom = std::max(std::abs(a), std::abs(b));
    return denom > 0.0 ? std::abs(a - b) / denom : 0.0;
}

}  // namespace detail

inline Image random_image(Rng& rng, int height, int width, int channels) {
    Image img(height, width, channels);
    for (double& v : img.data) v = rng.uniform();
    return img;
}

// Analytic gradient of `spec` vs central differences on `npairs` random
// pairs of the given size. Excluded from comparison: elements with analytic
// gradient below 1e-8, and for L1/L2/MSSSIM_L1 the pixels near a zero
// crossing of x - y (the subgradient is discontinuous there and, for L2, the
// difference signal vanishes; the band widens by h where the step itself
// could cross).
inline GradCheckReport check_loss_gradient(const LossSpec& spec_in, std::uint64_t seed,
                                           int height, int width, int channels, int npairs,
                                           double h) {
    LossSpec spec = spec_in;
    spec.paper_grad_scaling = false;  // the checks verify exact derivatives
    GradCheckReport report;
    double crossing_band = 0.0;
    if (l1_family(spec.kind)) crossing_band = 1e-3 + h;
    if (spec.kind == LossKind::L2) crossing_band = 1e-3;
    Rng rng(derive_seed(seed, 0x6c6f7373ull));
    for (int p = 0; p < npairs; ++p) {
        Image x = random_image(rng, height, width, channels);
        Image y = random_image(rng, height, width, channels);
        LossResult analytic = evaluate_loss(x, y, spec);
        Image fd = finite_diff_grad(
            [&](const Image& xi, const Image& yi) { return loss_value(xi, yi, spec); }, x, y, h);
        for (std::size_t i = 0; i < fd.size(); ++i) {
            if (std::abs(analytic.grad.data[i]) < 1e-8 ||
                std::abs(x.data[i] - y.data[i]) < crossing_band) {
                ++report.excluded;
                continue;
            }
            report.max_rel_err =
                std::max(report.max_rel_err, detail::rel_err(analytic.grad.data[i], fd.data[i]));
            ++report.compared;
        }
    }
    return report;
}

// Full forward + loss backward vs finite differences over every weight and
// bias on one random input. The probe network uses a wide init (std 0.5)
// with positive biases so units are alive and pre-activations sit clear of
// the ReLU kink under perturbation; the target is offset a fixed distance
// from the network output so the L1 family stays clear of its zero crossing.
// Central differences are only valid away from those kinks, so an unlucky
// seed can report a genuine-looking failure; seed 1 is known good.
inline GradCheckReport check_network_gradient(const LossSpec& spec_in, std::uint64_t seed,
                                              int size, double h = 1e-4, double init_std = 0.5) {
    LossSpec spec = spec_in;
    spec.paper_grad_scaling = false;  // the checks verify exact derivatives
    Rng rng(derive_seed(seed, 0x6e6574ull));
    Image input = random_image(rng, size, size, 3);
    NetworkParams params = init_params(seed, init_std);
    for (ConvLayer& layer : params.conv)
        for (double& b : layer.biases) b = 0.5;
    ForwardCache fc = forward(params, input);
    Image target = fc.j;
    for (double& v : target.data) v += (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.1, 0.4);

    LossResult lr = evaluate_loss(fc.j, target, spec);
    ParamGrads analytic = backward(params, fc, lr.grad);

    auto loss_at = [&](const NetworkParams& p) {
        return loss_value(forward(p, input).j, target, spec);
    };

    GradCheckReport report;
    NetworkParams probe = params;
    for (std::size_t l = 0; l < 5; ++l) {
        auto check_array = [&](std::vector<double>& pv, const std::vector<double>& gv) {
            for (std::size_t i = 0; i < pv.size(); ++i) {
                double orig = pv[i];
                pv[i] = orig + h;
                double fp = loss_at(probe);
                pv[i] = orig - h;
                double fm = loss_at(probe);
                pv[i] = orig;
                double fd = (fp - fm) / (2.0 * h);
                if (std::abs(gv[i]) < 1e-8) {
                    ++report.excluded;
                    continue;
                }
                report.max_rel_err = std::max(report.max_rel_err, detail::rel_err(gv[i], fd));
                ++report.compared;
            }
        };
        check_array(probe.conv[l].weights, analytic.conv[l].weights);
        check_array(probe.conv[l].biases, analytic.conv[l].biases);
    }
    return report;
}

}  // namespace padnet
