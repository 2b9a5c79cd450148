#pragma once

// Image substrate: planar floating-point grids, Gaussian kernels, separable
// filtering with symmetric-reflection borders, and the Gaussian-windowed
// local statistics that the structural-similarity losses and metrics build on.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace padnet {

// H x W grid of doubles, row-major.
struct Plane {
    int height = 0;
    int width = 0;
    std::vector<double> v;

    Plane() = default;
    Plane(int h, int w, double fill = 0.0)
        : height(h), width(w), v(std::size_t(h) * std::size_t(w), fill) {
        if (h <= 0 || w <= 0) throw std::invalid_argument("Plane: dimensions must be positive");
    }

    double& at(int y, int x) { return v[std::size_t(y) * width + x]; }
    double at(int y, int x) const { return v[std::size_t(y) * width + x]; }
    std::size_t size() const { return v.size(); }
    bool same_shape(const Plane& o) const { return height == o.height && width == o.width; }
};

// H x W x C grid of doubles, planar layout: data[(c*height + y)*width + x].
// Intensities are held in [0,1] at the file I/O boundary; intermediate
// values (network activations, K maps, loss gradients) may leave that range.
// Channel counts are restricted to {1,3} only by the image file codecs;
// internal feature maps use the same type with wider channel counts.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    Image() = default;
    Image(int h, int w, int c, double fill = 0.0)
        : height(h), width(w), channels(c),
          data(std::size_t(h) * std::size_t(w) * std::size_t(c), fill) {
        if (h <= 0 || w <= 0 || c <= 0)
            throw std::invalid_argument("Image: dimensions must be positive");
    }

    double& at(int c, int y, int x) {
        return data[(std::size_t(c) * height + y) * width + x];
    }
    double at(int c, int y, int x) const {
        return data[(std::size_t(c) * height + y) * width + x];
    }

    std::size_t plane_size() const { return std::size_t(height) * width; }
    std::size_t size() const { return data.size(); }
    bool same_shape(const Image& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }

    Plane channel(int c) const {
        Plane p(height, width);
        std::copy_n(data.begin() + std::ptrdiff_t(c * plane_size()), plane_size(), p.v.begin());
        return p;
    }
    void set_channel(int c, const Plane& p) {
        std::copy(p.v.begin(), p.v.end(), data.begin() + std::ptrdiff_t(c * plane_size()));
    }
};

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Compensated accumulator. Loss sums feed finite-difference checks where
// the signal can sit near 1e-13; plain summation roundoff would swamp it.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v) {
        double y = v - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

inline Image clamp01(Image img) {
    for (double& d : img.data) d = clamp01(d);
    return img;
}

// ============================================================================
// Gaussian kernels
// ============================================================================

// Normalized symmetric 1-D Gaussian, truncated at radius ceil(3*sigma).
struct GaussianKernel {
    double sigma = 0.0;
    int radius = 0;
    std::vector<double> taps;  // length 2*radius+1, sums to 1

    int length() const { return 2 * radius + 1; }
};

inline GaussianKernel gaussian_kernel(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_kernel: sigma must be positive");
    GaussianKernel k;
    k.sigma = sigma;
    k.radius = int(std::ceil(3.0 * sigma));
    k.taps.resize(std::size_t(k.length()));
    double sum = 0.0;
    for (int i = 0; i < k.length(); ++i) {
        double d = double(i - k.radius);
        k.taps[std::size_t(i)] = std::exp(-(d * d) / (2.0 * sigma * sigma));
        sum += k.taps[std::size_t(i)];
    }
    for (double& t : k.taps) t /= sum;
    return k;
}

// Symmetric (half-sample) reflection: index -1 maps to 0, n maps to n-1.
inline int mirror_index(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

// Separable 2-D convolution, horizontal pass then vertical pass, borders by
// symmetric reflection. The kernel is even-symmetric so convolution and
// correlation coincide.
inline Plane gaussian_filter(const Plane& plane, const GaussianKernel& kernel) {
    if (plane.height <= 0 || plane.width <= 0)
        throw std::invalid_argument("gaussian_filter: empty plane");
    const int h = plane.height, w = plane.width, r = kernel.radius;
    Plane tmp(h, w), out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int t = -r; t <= r; ++t)
                acc += kernel.taps[std::size_t(t + r)] * plane.at(y, mirror_index(x + t, w));
            tmp.at(y, x) = acc;
        }
    }
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) {
            double acc = 0.0;
            for (int t = -r; t <= r; ++t)
                acc += kernel.taps[std::size_t(t + r)] * tmp.at(mirror_index(y + t, h), x);
            out.at(y, x) = acc;
        }
    }
    return out;
}

// ============================================================================
// Windowed local statistics
// ============================================================================

struct LocalStats {
    double mu_x = 0.0;
    double mu_y = 0.0;
    double var_x = 0.0;
    double var_y = 0.0;
    double cov_xy = 0.0;
};

// Per-pixel Gaussian-weighted means, variances and covariance, stored as a
// struct of planes.
struct LocalStatsMap {
    Plane mu_x, mu_y, var_x, var_y, cov_xy;

    LocalStats at(int y, int x) const {
        return {mu_x.at(y, x), mu_y.at(y, x), var_x.at(y, x), var_y.at(y, x), cov_xy.at(y, x)};
    }
};

// mu = G*x, var = G*x^2 - mu^2, cov = G*(xy) - mu_x*mu_y. Slightly negative
// variances are cancellation noise and clamp to 0; anything beyond the
// cancellation bound indicates a broken kernel and throws. The bound is
// 1e-9 for unit-range data and scales with E[x^2] for larger values
// (unclamped network outputs can legitimately leave [0,1]).
inline LocalStatsMap local_stats(const Plane& x, const Plane& y, const GaussianKernel& kernel) {
    if (!x.same_shape(y)) throw std::invalid_argument("local_stats: dimension mismatch");
    const int h = x.height, w = x.width;
    Plane xx(h, w), yy(h, w), xy(h, w);
    for (std::size_t i = 0; i < x.size(); ++i) {
        xx.v[i] = x.v[i] * x.v[i];
        yy.v[i] = y.v[i] * y.v[i];
        xy.v[i] = x.v[i] * y.v[i];
    }
    LocalStatsMap s;
    s.mu_x = gaussian_filter(x, kernel);
    s.mu_y = gaussian_filter(y, kernel);
    s.var_x = gaussian_filter(xx, kernel);
    s.var_y = gaussian_filter(yy, kernel);
    s.cov_xy = gaussian_filter(xy, kernel);
    for (std::size_t i = 0; i < s.mu_x.size(); ++i) {
        double tol_x = 1e-9 * std::max(1.0, s.var_x.v[i]);
        double tol_y = 1e-9 * std::max(1.0, s.var_y.v[i]);
        s.var_x.v[i] -= s.mu_x.v[i] * s.mu_x.v[i];
        s.var_y.v[i] -= s.mu_y.v[i] * s.mu_y.v[i];
        s.cov_xy.v[i] -= s.mu_x.v[i] * s.mu_y.v[i];
        if (s.var_x.v[i] < 0.0) {
            if (s.var_x.v[i] < -tol_x)
                throw std::runtime_error("local_stats: variance beyond cancellation bound");
            s.var_x.v[i] = 0.0;
        }
        if (s.var_y.v[i] < 0.0) {
            if (s.var_y.v[i] < -tol_y)
                throw std::runtime_error("local_stats: variance beyond cancellation bound");
            s.var_y.v[i] = 0.0;
        }
    }
    return s;
}

}  // namespace padnet
