#pragma once

// Atmospheric scattering model: hazy synthesis I = J*t + A*(1-t) with
// transmission t = exp(-beta*d), plus the transformed K formulation
// K = ((I-A)/t + (A-b)) / (I-1) and its inverse J = K*I - K + b, used for
// ground-truth round trips. Also the synthetic depth generators that stand
// in for measured depth maps.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "padnet/image.hpp"
#include "padnet/rng.hpp"

namespace padnet {

// d(x) >= 0, scene distance in arbitrary units.
using DepthMap = Plane;
// t(x) in (0,1]; equals 1 exactly where beta*d = 0.
using TransmissionMap = Plane;
// Unified haze parameter map, one value per pixel per channel, unbounded.
using KMap = Image;

// Guard width for the I(x)-1 denominator in analytic_k.
inline constexpr double kDenominatorGuard = 1e-6;

inline TransmissionMap transmission(const DepthMap& depth, double beta) {
    if (beta < 0.0) throw std::invalid_argument("transmission: beta must be non-negative");
    TransmissionMap t(depth.height, depth.width);
    for (std::size_t i = 0; i < depth.size(); ++i) {
        double d = depth.v[i];
        if (!(d >= 0.0) || !std::isfinite(d))
            throw std::invalid_argument("transmission: depth must be finite and non-negative");
        t.v[i] = std::exp(-beta * d);
    }
    return t;
}

// I = J*t + A*(1-t), a per-pixel convex combination of scene and airlight.
inline Image synthesize_haze(const Image& clean, const TransmissionMap& t, double a) {
    if (clean.height != t.height || clean.width != t.width)
        throw std::invalid_argument("synthesize_haze: dimension mismatch");
    if (!(a > 0.0 && a <= 1.0))
        throw std::invalid_argument("synthesize_haze: A must lie in (0,1]");
    Image hazy(clean.height, clean.width, clean.channels);
    for (int c = 0; c < clean.channels; ++c)
        for (int y = 0; y < clean.height; ++y)
            for (int x = 0; x < clean.width; ++x) {
                double tv = t.at(y, x);
                hazy.at(c, y, x) = clean.at(c, y, x) * tv + a * (1.0 - tv);
            }
    return hazy;
}

// K = ((I-A)/t + (A-b)) / (I-1). The denominator is singular at I = 1;
// it is replaced by sign(I-1)*max(|I-1|, guard) with sign(0) taken as +1,
// which keeps K finite everywhere. Pixels inside the guard band do not
// round-trip and are excluded by callers that check reconstruction.
inline KMap analytic_k(const Image& hazy, const TransmissionMap& t, double a, double b) {
    if (hazy.height != t.height || hazy.width != t.width)
        throw std::invalid_argument("analytic_k: dimension mismatch");
    KMap k(hazy.height, hazy.width, hazy.channels);
    for (int c = 0; c < hazy.channels; ++c)
        for (int y = 0; y < hazy.height; ++y)
            for (int x = 0; x < hazy.width; ++x) {
                double i = hazy.at(c, y, x);
                double den = i - 1.0;
                den = den < 0.0 ? std::min(den, -kDenominatorGuard)
                                : std::max(den, kDenominatorGuard);
                k.at(c, y, x) = ((i - a) / t.at(y, x) + (a - b)) / den;
            }
    return k;
}

// J = K*I - K + b, unclamped.
inline Image reconstruct(const KMap& k, const Image& hazy, double b) {
    if (!k.same_shape(hazy)) throw std::invalid_argument("reconstruct: dimension mismatch");
    Image j(hazy.height, hazy.width, hazy.channels);
    for (std::size_t i = 0; i < j.size(); ++i)
        j.data[i] = k.data[i] * hazy.data[i] - k.data[i] + b;
    return j;
}

// ============================================================================
// Synthetic depth
// ============================================================================

enum class DepthKind { Ramp, Radial, SmoothNoise };

inline DepthKind depth_kind_from_string(const std::string& s) {
    if (s == "ramp") return DepthKind::Ramp;
    if (s == "radial") return DepthKind::Radial;
    if (s == "smooth_noise") return DepthKind::SmoothNoise;
    throw std::invalid_argument("unknown depth kind: " + s);
}

inline std::string to_string(DepthKind k) {
    switch (k) {
        case DepthKind::Ramp: return "ramp";
        case DepthKind::Radial: return "radial";
        case DepthKind::SmoothNoise: return "smooth_noise";
    }
    throw std::logic_error("unreachable");
}

// Deterministic synthetic depth in [0, d_max]. ramp rises linearly left to
// right, radial is the rescaled distance from the image center, smooth_noise
// is Gaussian-filtered white noise rescaled to the full range.
inline DepthMap make_depth(DepthKind kind, int height, int width, std::uint64_t seed,
                           double d_max = 5.0) {
    if (height <= 0 || width <= 0)
        throw std::invalid_argument("make_depth: dimensions must be positive");
    DepthMap d(height, width);
    switch (kind) {
        case DepthKind::Ramp: {
            for (int y = 0; y < height; ++y)
                for (int x = 0; x < width; ++x)
                    d.at(y, x) = width > 1 ? d_max * double(x) / double(width - 1) : 0.0;
            break;
        }
        case DepthKind::Radial: {
            double cy = (height - 1) / 2.0, cx = (width - 1) / 2.0;
            double rmax = std::hypot(cy, cx);
            for (int y = 0; y < height; ++y)
                for (int x = 0; x < width; ++x) {
                    double r = std::hypot(y - cy, x - cx);
                    d.at(y, x) = rmax > 0.0 ? d_max * r / rmax : 0.0;
                }
            break;
        }
        case DepthKind::SmoothNoise: {
            Rng rng(derive_seed(seed, 0x6465707468ull));
            for (double& v : d.v) v = rng.normal();
            double sigma = std::max(1.0, std::min(height, width) / 16.0);
            d = gaussian_filter(d, gaussian_kernel(sigma));
            auto [lo_it, hi_it] = std::minmax_element(d.v.begin(), d.v.end());
            double lo = *lo_it, span = *hi_it - *lo_it;
            if (span <= 0.0) {
                std::fill(d.v.begin(), d.v.end(), 0.0);
            } else {
                for (double& v : d.v) v = d_max * (v - lo) / span;
            }
            break;
        }
    }
    return d;
}

}  // namespace padnet
