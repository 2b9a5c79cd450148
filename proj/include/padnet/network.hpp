#pragma once

// The K-estimation network: five convolutional layers with multi-scale
// filter sizes and concatenation skips, ReLU after every layer including the
// K output, followed by the element-wise clean-image stage J = K*I - K + b.
// Forward and backward passes are hand-written; the backward pass produces
// exact gradients of a scalar loss with respect to every weight and bias.
//
// Topology (3 filters per layer):
//   conv1 1x1  3 -> 3          h1 = relu(conv1(I))
//   conv2 3x3  3 -> 3          h2 = relu(conv2(h1))
//   conv3 5x5  6 -> 3          h3 = relu(conv3([h1 h2]))
//   conv4 7x7  6 -> 3          h4 = relu(conv4([h2 h3]))
//   conv5 3x3 12 -> 3          K  = relu(conv5([h1 h2 h3 h4]))
// All convolutions use "same" zero padding, so every map keeps the input's
// spatial dimensions.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "padnet/image.hpp"
#include "padnet/rng.hpp"

namespace padnet {

struct ConvLayer {
    int kernel_size = 0;  // odd, so "same" padding is symmetric
    int in_channels = 0;
    int out_channels = 0;
    std::vector<double> weights;  // [out][in][ky][kx]
    std::vector<double> biases;   // [out]

    double& w(int o, int i, int ky, int kx) {
        return weights[((std::size_t(o) * in_channels + i) * kernel_size + ky) * kernel_size + kx];
    }
    double w(int o, int i, int ky, int kx) const {
        return weights[((std::size_t(o) * in_channels + i) * kernel_size + ky) * kernel_size + kx];
    }
};

struct NetworkParams {
    std::array<ConvLayer, 5> conv;
    double output_bias = 1.0;  // the constant b in J = K*I - K + b, not trained
};

// Gradient (or velocity) buffers shaped like one ConvLayer's parameters.
struct ConvGrads {
    std::vector<double> weights;
    std::vector<double> biases;
};

struct ParamGrads {
    std::array<ConvGrads, 5> conv;
};

struct ForwardCache {
    Image input;
    std::array<Image, 5> pre;        // pre-activation map per layer
    std::array<Image, 4> post;       // h1..h4
    std::array<Image, 3> concat_in;  // inputs of conv3, conv4, conv5
    Image k;                         // relu(pre[4])
    Image j;                         // K*I - K + b
};

// Fixed layer shapes: {kernel, in, out} per layer.
inline constexpr std::array<std::array<int, 3>, 5> kLayerShapes = {{
    {1, 3, 3}, {3, 3, 3}, {5, 6, 3}, {7, 6, 3}, {3, 12, 3},
}};

inline NetworkParams make_architecture() {
    NetworkParams p;
    for (int l = 0; l < 5; ++l) {
        ConvLayer& c = p.conv[std::size_t(l)];
        c.kernel_size = kLayerShapes[std::size_t(l)][0];
        c.in_channels = kLayerShapes[std::size_t(l)][1];
        c.out_channels = kLayerShapes[std::size_t(l)][2];
        c.weights.assign(std::size_t(c.out_channels) * c.in_channels * c.kernel_size * c.kernel_size, 0.0);
        c.biases.assign(std::size_t(c.out_channels), 0.0);
    }
    return p;
}

inline ParamGrads make_grads_like(const NetworkParams& p) {
    ParamGrads g;
    for (int l = 0; l < 5; ++l) {
        g.conv[std::size_t(l)].weights.assign(p.conv[std::size_t(l)].weights.size(), 0.0);
        g.conv[std::size_t(l)].biases.assign(p.conv[std::size_t(l)].biases.size(), 0.0);
    }
    return g;
}

// Weights ~ N(0, std^2) drawn in layer-then-index order, biases zero, b = 1.
inline NetworkParams init_params(std::uint64_t seed, double std = 0.01) {
    if (!(std > 0.0)) throw std::invalid_argument("init_params: std must be positive");
    NetworkParams p = make_architecture();
    Rng rng(derive_seed(seed, 0x696e6974ull));
    for (auto& layer : p.conv)
        for (double& w : layer.weights) w = rng.normal(0.0, std);
    return p;
}

// "Same" zero-padded cross-correlation plus bias, no activation.
inline Image conv_forward(const ConvLayer& layer, const Image& input) {
    if (input.channels != layer.in_channels)
        throw std::invalid_argument("conv_forward: channel mismatch");
    const int h = input.height, w = input.width;
    const int k = layer.kernel_size, r = k / 2;
    Image out(h, w, layer.out_channels);
    for (int o = 0; o < layer.out_channels; ++o) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double acc = layer.biases[std::size_t(o)];
                for (int i = 0; i < layer.in_channels; ++i)
                    for (int ky = 0; ky < k; ++ky) {
                        int yy = y + ky - r;
                        if (yy < 0 || yy >= h) continue;
                        for (int kx = 0; kx < k; ++kx) {
                            int xx = x + kx - r;
                            if (xx < 0 || xx >= w) continue;
                            acc += layer.w(o, i, ky, kx) * input.at(i, yy, xx);
                        }
                    }
                out.at(o, y, x) = acc;
            }
    }
    return out;
}

namespace detail {

inline Image relu(const Image& z) {
    Image h = z;
    for (double& v : h.data) v = v > 0.0 ? v : 0.0;
    return h;
}

// Channel-wise stack; planar layout makes this a sequence of plane copies.
inline Image concat(std::initializer_list<const Image*> parts) {
    const Image& first = **parts.begin();
    int c_total = 0;
    for (const Image* p : parts) c_total += p->channels;
    Image out(first.height, first.width, c_total);
    std::size_t offset = 0;
    for (const Image* p : parts) {
        std::copy(p->data.begin(), p->data.end(), out.data.begin() + std::ptrdiff_t(offset));
        offset += p->data.size();
    }
    return out;
}

// Gradients of the convolution: accumulates dW and dBias into g and returns
// the gradient with respect to the layer input.
inline Image conv_backward(const ConvLayer& layer, const Image& input, const Image& d_out,
                           ConvGrads& g) {
    const int h = input.height, w = input.width;
    const int k = layer.kernel_size, r = k / 2;
    for (int o = 0; o < layer.out_channels; ++o) {
        double db = 0.0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) db += d_out.at(o, y, x);
        g.biases[std::size_t(o)] += db;

        for (int i = 0; i < layer.in_channels; ++i)
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    double dw = 0.0;
                    for (int y = 0; y < h; ++y) {
                        int yy = y + ky - r;
                        if (yy < 0 || yy >= h) continue;
                        for (int x = 0; x < w; ++x) {
                            int xx = x + kx - r;
                            if (xx < 0 || xx >= w) continue;
                            dw += d_out.at(o, y, x) * input.at(i, yy, xx);
                        }
                    }
                    g.weights[((std::size_t(o) * layer.in_channels + i) * k + ky) * k + kx] += dw;
                }
    }
    Image d_in(h, w, layer.in_channels);
    for (int i = 0; i < layer.in_channels; ++i)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int o = 0; o < layer.out_channels; ++o)
                    for (int ky = 0; ky < k; ++ky) {
                        int yo = y - ky + r;
                        if (yo < 0 || yo >= h) continue;
                        for (int kx = 0; kx < k; ++kx) {
                            int xo = x - kx + r;
                            if (xo < 0 || xo >= w) continue;
                            acc += d_out.at(o, yo, xo) * layer.w(o, i, ky, kx);
                        }
                    }
                d_in.at(i, y, x) = acc;
            }
    return d_in;
}

// dL/dz = dL/dh where z > 0, else 0.
inline void apply_relu_mask(Image& d, const Image& z) {
    for (std::size_t i = 0; i < d.size(); ++i)
        if (!(z.data[i] > 0.0)) d.data[i] = 0.0;
}

// Adds the channel block [c0, c0+part.channels) of src into dst.
inline void add_channel_block(Image& dst, const Image& src, int c0, int channels) {
    const std::size_t plane = dst.plane_size();
    for (int c = 0; c < channels; ++c)
        for (std::size_t i = 0; i < plane; ++i)
            dst.data[std::size_t(c) * plane + i] += src.data[std::size_t(c0 + c) * plane + i];
}

}  // namespace detail

inline ForwardCache forward(const NetworkParams& params, const Image& input) {
    if (input.channels != 3) throw std::invalid_argument("forward: input must have 3 channels");
    ForwardCache fc;
    fc.input = input;
    fc.pre[0] = conv_forward(params.conv[0], input);
    fc.post[0] = detail::relu(fc.pre[0]);  // h1
    fc.pre[1] = conv_forward(params.conv[1], fc.post[0]);
    fc.post[1] = detail::relu(fc.pre[1]);  // h2
    fc.concat_in[0] = detail::concat({&fc.post[0], &fc.post[1]});
    fc.pre[2] = conv_forward(params.conv[2], fc.concat_in[0]);
    fc.post[2] = detail::relu(fc.pre[2]);  // h3
    fc.concat_in[1] = detail::concat({&fc.post[1], &fc.post[2]});
    fc.pre[3] = conv_forward(params.conv[3], fc.concat_in[1]);
    fc.post[3] = detail::relu(fc.pre[3]);  // h4
    fc.concat_in[2] = detail::concat({&fc.post[0], &fc.post[1], &fc.post[2], &fc.post[3]});
    fc.pre[4] = conv_forward(params.conv[4], fc.concat_in[2]);
    fc.k = detail::relu(fc.pre[4]);
    fc.j = Image(input.height, input.width, 3);
    for (std::size_t i = 0; i < fc.j.size(); ++i)
        fc.j.data[i] = fc.k.data[i] * input.data[i] - fc.k.data[i] + params.output_bias;
    return fc;
}

// Convenience for inference paths that only need the restored image.
inline Image dehaze(const NetworkParams& params, const Image& hazy) {
    return forward(params, hazy).j;
}

// Backpropagates dJ (gradient of a scalar loss with respect to the network
// output) to every weight and bias. Layers are visited in reverse
// topological order so each hidden map's gradient is complete before its
// producing layer is processed; concatenation gradients split back into the
// contributing blocks.
inline ParamGrads backward(const NetworkParams& params, const ForwardCache& fc, const Image& d_j) {
    if (!d_j.same_shape(fc.j)) throw std::invalid_argument("backward: gradient shape mismatch");
    ParamGrads g = make_grads_like(params);
    const int h = fc.input.height, w = fc.input.width;

    // J = K*I - K + b  =>  dK = dJ * (I - 1)
    Image d_k(h, w, 3);
    for (std::size_t i = 0; i < d_k.size(); ++i)
        d_k.data[i] = d_j.data[i] * (fc.input.data[i] - 1.0);

    std::array<Image, 4> d_post;
    for (int l = 0; l < 4; ++l) d_post[std::size_t(l)] = Image(h, w, 3);

    // conv5: input [h1 h2 h3 h4]
    detail::apply_relu_mask(d_k, fc.pre[4]);
    Image d_c5 = detail::conv_backward(params.conv[4], fc.concat_in[2], d_k, g.conv[4]);
    detail::add_channel_block(d_post[0], d_c5, 0, 3);
    detail::add_channel_block(d_post[1], d_c5, 3, 3);
    detail::add_channel_block(d_post[2], d_c5, 6, 3);
    detail::add_channel_block(d_post[3], d_c5, 9, 3);

    // conv4: input [h2 h3]
    Image d_z4 = d_post[3];
    detail::apply_relu_mask(d_z4, fc.pre[3]);
    Image d_c4 = detail::conv_backward(params.conv[3], fc.concat_in[1], d_z4, g.conv[3]);
    detail::add_channel_block(d_post[1], d_c4, 0, 3);
    detail::add_channel_block(d_post[2], d_c4, 3, 3);

    // conv3: input [h1 h2]
    Image d_z3 = d_post[2];
    detail::apply_relu_mask(d_z3, fc.pre[2]);
    Image d_c3 = detail::conv_backward(params.conv[2], fc.concat_in[0], d_z3, g.conv[2]);
    detail::add_channel_block(d_post[0], d_c3, 0, 3);
    detail::add_channel_block(d_post[1], d_c3, 3, 3);

    // conv2: input h1
    Image d_z2 = d_post[1];
    detail::apply_relu_mask(d_z2, fc.pre[1]);
    Image d_h1 = detail::conv_backward(params.conv[1], fc.post[0], d_z2, g.conv[1]);
    detail::add_channel_block(d_post[0], d_h1, 0, 3);

    // conv1: input I
    Image d_z1 = d_post[0];
    detail::apply_relu_mask(d_z1, fc.pre[0]);
    detail::conv_backward(params.conv[0], fc.input, d_z1, g.conv[0]);
    return g;
}

// ============================================================================
// Checkpoints
// ============================================================================
//
// Binary container, little-endian:
//   magic "PADNETv1" (8 bytes)
//   per layer, in order: int32 kernel_size, in_channels, out_channels,
//     float64 weights [out][in][ky][kx], float64 biases [out]
//   float64 output_bias
// load_checkpoint validates every shape against the fixed architecture.

namespace detail {

inline constexpr char kCheckpointMagic[8] = {'P', 'A', 'D', 'N', 'E', 'T', 'v', '1'};

struct CFile {
    std::FILE* f = nullptr;
    explicit CFile(std::FILE* fp) : f(fp) {}
    ~CFile() {
        if (f) std::fclose(f);
    }
    CFile(const CFile&) = delete;
    CFile& operator=(const CFile&) = delete;
};

template <class T>
void write_raw(std::FILE* f, const T* ptr, std::size_t count, const std::string& path) {
    if (std::fwrite(ptr, sizeof(T), count, f) != count)
        throw std::runtime_error("save_checkpoint: write failed: " + path);
}

template <class T>
void read_raw(std::FILE* f, T* ptr, std::size_t count, const std::string& path) {
    if (std::fread(ptr, sizeof(T), count, f) != count)
        throw std::runtime_error("load_checkpoint: truncated file: " + path);
}

}  // namespace detail

inline void save_checkpoint(const NetworkParams& params, const std::string& path) {
    static_assert(sizeof(double) == 8);
    detail::CFile f(std::fopen(path.c_str(), "wb"));
    if (!f.f) throw std::runtime_error("save_checkpoint: cannot open " + path + " for writing");
    detail::write_raw(f.f, detail::kCheckpointMagic, 8, path);
    for (const ConvLayer& c : params.conv) {
        std::int32_t shape[3] = {c.kernel_size, c.in_channels, c.out_channels};
        detail::write_raw(f.f, shape, 3, path);
        detail::write_raw(f.f, c.weights.data(), c.weights.size(), path);
        detail::write_raw(f.f, c.biases.data(), c.biases.size(), path);
    }
    detail::write_raw(f.f, &params.output_bias, 1, path);
}

inline NetworkParams load_checkpoint(const std::string& path) {
    detail::CFile f(std::fopen(path.c_str(), "rb"));
    if (!f.f) throw std::runtime_error("load_checkpoint: cannot open " + path);
    char magic[8];
    detail::read_raw(f.f, magic, 8, path);
    if (std::memcmp(magic, detail::kCheckpointMagic, 8) != 0)
        throw std::runtime_error("load_checkpoint: bad magic (not a checkpoint): " + path);
    NetworkParams p = make_architecture();
    for (std::size_t l = 0; l < 5; ++l) {
        ConvLayer& c = p.conv[l];
        std::int32_t shape[3];
        detail::read_raw(f.f, shape, 3, path);
        if (shape[0] != c.kernel_size || shape[1] != c.in_channels || shape[2] != c.out_channels)
            throw std::runtime_error("load_checkpoint: layer " + std::to_string(l + 1) +
                                     " shape mismatch in " + path);
        detail::read_raw(f.f, c.weights.data(), c.weights.size(), path);
        detail::read_raw(f.f, c.biases.data(), c.biases.size(), path);
    }
    detail::read_raw(f.f, &p.output_bias, 1, path);
    return p;
}

}  // namespace padnet
