#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <vector>

#include "padnet/gradcheck.hpp"
#include "padnet/network.hpp"
#include "padnet/rng.hpp"

using namespace padnet;

namespace {

// Naive re-implementation of the forward pass, written independently of the
// library code: plain vectors, explicit channel bookkeeping, no shared
// helpers. Used as the dual-implementation oracle.
struct NaiveMap {
    int h = 0, w = 0, c = 0;
    std::vector<double> v;  // [c][y][x]
    double get(int ci, int y, int x) const { return v[size_t((ci * h + y) * w + x)]; }
    void set(int ci, int y, int x, double val) { v[size_t((ci * h + y) * w + x)] = val; }
};

NaiveMap naive_from(const Image& img) {
    NaiveMap m{img.height, img.width, img.channels, img.data};
    return m;
}

NaiveMap naive_conv_relu(const ConvLayer& layer, const NaiveMap& in, bool relu) {
    NaiveMap out{in.h, in.w, layer.out_channels,
                 std::vector<double>(size_t(in.h) * in.w * layer.out_channels, 0.0)};
    int r = layer.kernel_size / 2;
    for (int o = 0; o < layer.out_channels; ++o)
        for (int y = 0; y < in.h; ++y)
            for (int x = 0; x < in.w; ++x) {
                double acc = layer.biases[size_t(o)];
                for (int i = 0; i < layer.in_channels; ++i)
                    for (int dy = -r; dy <= r; ++dy)
                        for (int dx = -r; dx <= r; ++dx) {
                            int yy = y + dy, xx = x + dx;
                            if (yy < 0 || yy >= in.h || xx < 0 || xx >= in.w) continue;
                            acc += layer.w(o, i, dy + r, dx + r) * in.get(i, yy, xx);
                        }
                if (relu && acc < 0.0) acc = 0.0;
                out.set(o, y, x, acc);
            }
    return out;
}

NaiveMap naive_concat(const std::vector<const NaiveMap*>& parts) {
    int c = 0;
    for (auto* p : parts) c += p->c;
    NaiveMap out{parts[0]->h, parts[0]->w, c, {}};
    for (auto* p : parts) out.v.insert(out.v.end(), p->v.begin(), p->v.end());
    return out;
}

std::vector<double> naive_forward_j(const NetworkParams& p, const Image& input) {
    NaiveMap in = naive_from(input);
    NaiveMap h1 = naive_conv_relu(p.conv[0], in, true);
    NaiveMap h2 = naive_conv_relu(p.conv[1], h1, true);
    NaiveMap c3 = naive_concat({&h1, &h2});
    NaiveMap h3 = naive_conv_relu(p.conv[2], c3, true);
    NaiveMap c4 = naive_concat({&h2, &h3});
    NaiveMap h4 = naive_conv_relu(p.conv[3], c4, true);
    NaiveMap c5 = naive_concat({&h1, &h2, &h3, &h4});
    NaiveMap k = naive_conv_relu(p.conv[4], c5, true);
    std::vector<double> j(k.v.size());
    for (size_t i = 0; i < j.size(); ++i)
        j[i] = k.v[i] * input.data[i] - k.v[i] + p.output_bias;
    return j;
}

Image random_input(Rng& rng, int h, int w) {
    Image img(h, w, 3);
    for (double& v : img.data) v = rng.uniform();
    return img;
}

}  // namespace

TEST(InitParams, DeterministicAndZeroBiases) {
    NetworkParams a = init_params(5);
    NetworkParams b = init_params(5);
    NetworkParams c = init_params(6);
    for (int l = 0; l < 5; ++l) {
        EXPECT_EQ(a.conv[size_t(l)].weights, b.conv[size_t(l)].weights);
        for (double bias : a.conv[size_t(l)].biases) EXPECT_EQ(bias, 0.0);
    }
    EXPECT_NE(a.conv[0].weights, c.conv[0].weights);
    EXPECT_DOUBLE_EQ(a.output_bias, 1.0);
}

TEST(InitParams, PooledStdNearTarget) {
    NetworkParams p = init_params(7, 0.01);
    double sq = 0.0;
    long n = 0;
    for (const auto& layer : p.conv) {
        for (double w : layer.weights) sq += w * w;
        n += long(layer.weights.size());
    }
    double std = std::sqrt(sq / double(n));
    EXPECT_NEAR(std, 0.01, 0.002);  // within 20%
}

TEST(InitParams, ArchitectureShapes) {
    NetworkParams p = make_architecture();
    const int expect[5][3] = {{1, 3, 3}, {3, 3, 3}, {5, 6, 3}, {7, 6, 3}, {3, 12, 3}};
    for (int l = 0; l < 5; ++l) {
        EXPECT_EQ(p.conv[size_t(l)].kernel_size, expect[l][0]);
        EXPECT_EQ(p.conv[size_t(l)].in_channels, expect[l][1]);
        EXPECT_EQ(p.conv[size_t(l)].out_channels, expect[l][2]);
    }
    // concatenation channel bookkeeping: 3+3 = 6, 3+3 = 6, 3+3+3+3 = 12
    EXPECT_EQ(p.conv[2].in_channels, p.conv[0].out_channels + p.conv[1].out_channels);
    EXPECT_EQ(p.conv[4].in_channels, 4 * 3);
}

TEST(ConvForward, OneByOneIdentityAddsBias) {
    ConvLayer layer;
    layer.kernel_size = 1;
    layer.in_channels = layer.out_channels = 3;
    layer.weights.assign(9, 0.0);
    layer.biases = {0.25, -0.5, 0.0};
    for (int o = 0; o < 3; ++o) layer.weights[size_t(o * 3 + o)] = 1.0;

    Rng rng(31);
    Image in = random_input(rng, 4, 5);
    Image out = conv_forward(layer, in);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 5; ++x)
                EXPECT_NEAR(out.at(c, y, x), in.at(c, y, x) + layer.biases[size_t(c)], 1e-15);
}

TEST(ConvForward, ImpulsePicksCenterTap) {
    ConvLayer layer;
    layer.kernel_size = 3;
    layer.in_channels = 1;
    layer.out_channels = 1;
    layer.weights = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    layer.biases = {0.0};
    Image in(5, 5, 1);
    in.at(0, 2, 2) = 1.0;
    Image out = conv_forward(layer, in);
    EXPECT_DOUBLE_EQ(out.at(0, 2, 2), 5.0);  // center tap
    EXPECT_DOUBLE_EQ(out.at(0, 1, 1), 9.0);  // cross-correlation offsets
    EXPECT_DOUBLE_EQ(out.at(0, 3, 3), 1.0);
}

TEST(ConvForward, MatchesQuadrupleLoopOracle) {
    Rng rng(32);
    ConvLayer layer;
    layer.kernel_size = 3;
    layer.in_channels = 2;
    layer.out_channels = 4;
    layer.weights.resize(size_t(4 * 2 * 9));
    layer.biases.resize(4);
    for (double& w : layer.weights) w = rng.normal(0.0, 1.0);
    for (double& b : layer.biases) b = rng.normal(0.0, 1.0);

    Image in(6, 6, 2);
    for (double& v : in.data) v = rng.uniform();
    Image out = conv_forward(layer, in);

    for (int o = 0; o < 4; ++o)
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 6; ++x) {
                double acc = layer.biases[size_t(o)];
                for (int i = 0; i < 2; ++i)
                    for (int ky = 0; ky < 3; ++ky)
                        for (int kx = 0; kx < 3; ++kx) {
                            int yy = y + ky - 1, xx = x + kx - 1;
                            if (yy < 0 || yy >= 6 || xx < 0 || xx >= 6) continue;
                            acc += layer.w(o, i, ky, kx) * in.at(i, yy, xx);
                        }
                EXPECT_NEAR(out.at(o, y, x), acc, 1e-6);
            }
    EXPECT_THROW(conv_forward(layer, Image(4, 4, 3)), std::invalid_argument);
}

TEST(Forward, ZeroWeightsGiveConstantOutputBias) {
    NetworkParams p = make_architecture();
    Rng rng(33);
    Image in = random_input(rng, 8, 8);
    ForwardCache fc = forward(p, in);
    for (double v : fc.k.data) EXPECT_DOUBLE_EQ(v, 0.0);
    for (double v : fc.j.data) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(Forward, SamePaddingKeepsSpatialDims) {
    NetworkParams p = init_params(1, 0.05);
    Rng rng(34);
    for (auto [h, w] : {std::pair{7, 7}, {9, 13}, {16, 8}}) {
        Image in = random_input(rng, h, w);
        ForwardCache fc = forward(p, in);
        EXPECT_EQ(fc.j.height, h);
        EXPECT_EQ(fc.j.width, w);
        EXPECT_EQ(fc.k.channels, 3);
        for (const Image& pre : fc.pre) {
            EXPECT_EQ(pre.height, h);
            EXPECT_EQ(pre.width, w);
        }
    }
}

TEST(Forward, MatchesNaiveReimplementation) {
    NetworkParams p = init_params(97, 0.5);
    Rng rng(35);
    Image in = random_input(rng, 11, 10);
    ForwardCache fc = forward(p, in);
    std::vector<double> naive = naive_forward_j(p, in);
    ASSERT_EQ(naive.size(), fc.j.data.size());
    for (size_t i = 0; i < naive.size(); ++i) EXPECT_NEAR(fc.j.data[i], naive[i], 1e-5);
}

TEST(Forward, Deterministic) {
    NetworkParams p = init_params(3, 0.1);
    Rng rng(36);
    Image in = random_input(rng, 9, 9);
    ForwardCache a = forward(p, in);
    ForwardCache b = forward(p, in);
    EXPECT_EQ(a.j.data, b.j.data);
    EXPECT_EQ(a.k.data, b.k.data);
}

TEST(Forward, RejectsWrongChannelCount) {
    NetworkParams p = init_params(1);
    EXPECT_THROW(forward(p, Image(8, 8, 1)), std::invalid_argument);
}

TEST(Backward, ZeroUpstreamGradientGivesZeroGrads) {
    NetworkParams p = init_params(4, 0.2);
    Rng rng(37);
    Image in = random_input(rng, 9, 9);
    ForwardCache fc = forward(p, in);
    ParamGrads g = backward(p, fc, Image(9, 9, 3, 0.0));
    for (const auto& layer : g.conv) {
        for (double v : layer.weights) EXPECT_DOUBLE_EQ(v, 0.0);
        for (double v : layer.biases) EXPECT_DOUBLE_EQ(v, 0.0);
    }
}

TEST(Backward, DeadReluUnitHasZeroIncomingGrads) {
    NetworkParams p = init_params(5, 0.2);
    p.conv[0].biases[0] = -100.0;  // unit 0 of conv1 never activates
    Rng rng(38);
    Image in = random_input(rng, 9, 9);
    ForwardCache fc = forward(p, in);
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 9; ++x) ASSERT_LT(fc.pre[0].at(0, y, x), 0.0);

    Image dj(9, 9, 3);
    for (double& v : dj.data) v = rng.normal(0.0, 1.0);
    ParamGrads g = backward(p, fc, dj);
    for (int i = 0; i < p.conv[0].in_channels; ++i)
        EXPECT_DOUBLE_EQ(g.conv[0].weights[size_t(i)], 0.0);  // out 0, 1x1 kernel
    EXPECT_DOUBLE_EQ(g.conv[0].biases[0], 0.0);
}

TEST(Backward, FiniteDifferenceAgreementL2) {
    LossSpec spec = LossSpec::defaults_for(LossKind::L2);
    GradCheckReport rep = check_network_gradient(spec, 1, 9, 1e-4);
    EXPECT_GT(rep.compared, 0);
    EXPECT_LT(rep.max_rel_err, 1e-4);
}

TEST(Backward, GradientShapesMatchParams) {
    NetworkParams p = init_params(6, 0.2);
    Rng rng(39);
    Image in = random_input(rng, 9, 9);
    ForwardCache fc = forward(p, in);
    Image dj(9, 9, 3, 0.1);
    ParamGrads g = backward(p, fc, dj);
    for (int l = 0; l < 5; ++l) {
        EXPECT_EQ(g.conv[size_t(l)].weights.size(), p.conv[size_t(l)].weights.size());
        EXPECT_EQ(g.conv[size_t(l)].biases.size(), p.conv[size_t(l)].biases.size());
    }
    EXPECT_THROW(backward(p, fc, Image(8, 9, 3)), std::invalid_argument);
}

TEST(Forward, TranslationEquivarianceInInterior) {
    NetworkParams p = init_params(11, 0.3);
    Rng rng(40);
    Image big = random_input(rng, 40, 40);
    const int dy = 3, dx = 2, h = 32, w = 32;
    auto crop = [&](int y0, int x0) {
        Image out(h, w, 3);
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) out.at(c, y, x) = big.at(c, y0 + y, x0 + x);
        return out;
    };
    Image a = crop(0, 0), b = crop(dy, dx);
    Image ka = forward(p, a).k, kb = forward(p, b).k;
    // K(y, x) of the shifted crop equals K(y+dy, x+dx) of the original in
    // the interior (8 px margin covers the receptive field radius of 7).
    for (int c = 0; c < 3; ++c)
        for (int y = 8; y < h - 8 - dy; ++y)
            for (int x = 8; x < w - 8 - dx; ++x)
                ASSERT_NEAR(kb.at(c, y, x), ka.at(c, y + dy, x + dx), 1e-12);
}

TEST(Checkpoint, RoundTripIsBitExact) {
    NetworkParams p = init_params(123, 0.37);
    p.conv[2].biases[1] = -0.75;
    std::string path = testing::TempDir() + "net.ckpt";
    save_checkpoint(p, path);
    NetworkParams q = load_checkpoint(path);
    for (int l = 0; l < 5; ++l) {
        EXPECT_EQ(p.conv[size_t(l)].weights, q.conv[size_t(l)].weights);
        EXPECT_EQ(p.conv[size_t(l)].biases, q.conv[size_t(l)].biases);
    }
    EXPECT_EQ(p.output_bias, q.output_bias);
}

TEST(Checkpoint, RejectsCorruptFiles) {
    std::string bad = testing::TempDir() + "bad.ckpt";
    std::ofstream(bad, std::ios::binary) << "PADNETv1 but then garbage";
    EXPECT_THROW(load_checkpoint(bad), std::runtime_error);

    std::string nomagic = testing::TempDir() + "nomagic.ckpt";
    std::ofstream(nomagic, std::ios::binary) << "junkjunkjunkjunk";
    EXPECT_THROW(load_checkpoint(nomagic), std::runtime_error);
    EXPECT_THROW(load_checkpoint(testing::TempDir() + "missing.ckpt"), std::runtime_error);
}
