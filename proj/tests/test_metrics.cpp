#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "padnet/dataset.hpp"
#include "padnet/metrics.hpp"
#include "padnet/rng.hpp"

using namespace padnet;

namespace {

Image random_image(Rng& rng, int h, int w, int c) {
    Image img(h, w, c);
    for (double& v : img.data) v = rng.uniform();
    return img;
}

int mirror_ref(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

// Network that reproduces its input: all weights zero, conv5 bias 1 makes
// K identically 1 and J = K*I - K + 1 = I.
NetworkParams identity_network() {
    NetworkParams p = make_architecture();
    for (double& b : p.conv[4].biases) b = 1.0;
    return p;
}

}  // namespace

TEST(Psnr, PerfectMatchIsInfinite) {
    Rng rng(80);
    Image x = random_image(rng, 8, 8, 3);
    EXPECT_TRUE(std::isinf(psnr(x, x)));
}

TEST(Psnr, ConstantOffsetGives20dB) {
    Image x(10, 10, 1, 0.3), y(10, 10, 1, 0.4);
    EXPECT_NEAR(psnr(x, y), 20.0, 1e-12);
}

TEST(Psnr, MatchesIndependentTwoPassMse) {
    Rng rng(81);
    Image x = random_image(rng, 9, 7, 3);
    Image y = random_image(rng, 9, 7, 3);
    // two-pass: accumulate diffs first, square-sum second
    std::vector<double> diffs(x.size());
    for (size_t i = 0; i < x.size(); ++i) diffs[i] = x.data[i] - y.data[i];
    double sse = 0.0;
    for (double d : diffs) sse += d * d;
    double expect = 10.0 * std::log10(double(x.size()) / sse);
    EXPECT_NEAR(psnr(x, y), expect, 1e-9);
}

TEST(Psnr, SymmetricAndMonotonic) {
    Rng rng(82);
    Image x = random_image(rng, 8, 8, 1);
    Image y = random_image(rng, 8, 8, 1);
    EXPECT_DOUBLE_EQ(psnr(x, y), psnr(y, x));

    Image y_close = x, y_far = x;
    for (size_t i = 0; i < x.size(); ++i) {
        y_close.data[i] = std::clamp(x.data[i] + 0.01, 0.0, 1.0);
        y_far.data[i] = std::clamp(x.data[i] + 0.2, 0.0, 1.0);
    }
    EXPECT_GT(psnr(x, y_close), psnr(x, y_far));
}

TEST(Psnr, ClampsBeforeComparing) {
    Image x(2, 2, 1, 1.4), y(2, 2, 1, 1.0);  // both clamp to 1.0
    EXPECT_TRUE(std::isinf(psnr(x, y)));
    EXPECT_THROW(psnr(x, Image(2, 3, 1)), std::invalid_argument);
}

TEST(SsimEval, SelfSimilarityIsOne) {
    Rng rng(83);
    Image x = random_image(rng, 16, 16, 3);
    EXPECT_NEAR(ssim_eval(x, x), 1.0, 1e-9);
}

TEST(SsimEval, InvertedCheckerboardScoresLow) {
    Image x(16, 16, 1), y(16, 16, 1);
    for (int yy = 0; yy < 16; ++yy)
        for (int xx = 0; xx < 16; ++xx) {
            double v = ((yy + xx) % 2 == 0) ? 1.0 : 0.0;
            x.at(0, yy, xx) = v;
            y.at(0, yy, xx) = 1.0 - v;
        }
    EXPECT_LT(ssim_eval(x, y), 0.5);
}

TEST(SsimEval, MatchesBruteForceWindowOracle) {
    Rng rng(84);
    Image x = random_image(rng, 11, 11, 1);
    Image y = random_image(rng, 11, 11, 1);
    GaussianKernel k = gaussian_kernel(1.5);
    ASSERT_EQ(k.radius, 5);  // exactly one valid center in an 11x11 image
    int r = k.radius, cy = 5, cx = 5;
    double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
            double g = k.taps[size_t(dy + r)] * k.taps[size_t(dx + r)];
            double xv = x.at(0, mirror_ref(cy + dy, 11), mirror_ref(cx + dx, 11));
            double yv = y.at(0, mirror_ref(cy + dy, 11), mirror_ref(cx + dx, 11));
            mx += g * xv;
            my += g * yv;
            sxx += g * xv * xv;
            syy += g * yv * yv;
            sxy += g * xv * yv;
        }
    double l = (2 * mx * my + kEvalSsimC1) / (mx * mx + my * my + kEvalSsimC1);
    double cs = (2 * (sxy - mx * my) + kEvalSsimC2) /
                ((sxx - mx * mx) + (syy - my * my) + kEvalSsimC2);
    EXPECT_NEAR(ssim_eval(x, y), l * cs, 1e-9);
}

TEST(EvaluateSet, IdentityModelOnZeroHazeSet) {
    // zero-haze dataset: beta range [0,0] makes hazy == clean
    DatasetSpec spec;
    spec.n_train = 2;
    spec.n_val = 1;
    spec.n_test = 1;
    spec.beta_lo = spec.beta_hi = 0.0;
    spec.patch_size = 24;
    spec.seed = 5;
    std::string dir = testing::TempDir() + "zero_haze";
    DatasetPaths paths = build_dataset(spec, dir);

    EvalReport rep = evaluate_set(identity_network(), paths.train_manifest);
    ASSERT_EQ(rep.entries.size(), 2u);
    EXPECT_EQ(rep.infinite_psnr_count, 2);
    EXPECT_EQ(rep.finite_psnr_count, 0);
    for (const auto& e : rep.entries) EXPECT_NEAR(e.ssim, 1.0, 1e-9);
    EXPECT_NEAR(rep.mean_ssim, 1.0, 1e-9);
}

TEST(EvaluateSet, AggregatesEqualHandComputedMeans) {
    DatasetSpec spec;
    spec.n_train = 4;
    spec.n_val = 1;
    spec.n_test = 1;
    spec.patch_size = 24;
    spec.seed = 6;
    std::string dir = testing::TempDir() + "agg_set";
    DatasetPaths paths = build_dataset(spec, dir);

    EvalReport rep = evaluate_set(identity_network(), paths.train_manifest);
    ASSERT_EQ(rep.entries.size(), 4u);
    double psum = 0.0, ssum = 0.0;
    int finite = 0;
    for (const auto& e : rep.entries) {
        if (!std::isinf(e.psnr_db)) {
            psum += e.psnr_db;
            ++finite;
        }
        ssum += e.ssim;
    }
    ASSERT_GT(finite, 0);
    EXPECT_DOUBLE_EQ(rep.mean_psnr, psum / finite);
    EXPECT_DOUBLE_EQ(rep.mean_ssim, ssum / 4.0);

    // permutation invariance of the aggregates
    std::vector<ManifestEntry> entries = read_manifest(paths.train_manifest);
    std::reverse(entries.begin(), entries.end());
    EvalReport rev = evaluate_set(identity_network(), entries);
    EXPECT_DOUBLE_EQ(rev.mean_psnr, rep.mean_psnr);
    EXPECT_DOUBLE_EQ(rev.mean_ssim, rep.mean_ssim);
}

TEST(EvaluateSet, SkipsUnreadableSamples) {
    DatasetSpec spec;
    spec.n_train = 2;
    spec.n_val = 1;
    spec.n_test = 1;
    spec.patch_size = 24;
    spec.seed = 7;
    std::string dir = testing::TempDir() + "skip_set";
    DatasetPaths paths = build_dataset(spec, dir);
    std::vector<ManifestEntry> entries = read_manifest(paths.train_manifest);
    entries.push_back(entries.back());
    entries.back().hazy_path = dir + "/missing.png";

    EvalReport rep = evaluate_set(identity_network(), entries);
    EXPECT_EQ(rep.entries.size(), 2u);
    EXPECT_EQ(rep.skipped, 1);
}

TEST(EvaluateSet, ThreadCountDoesNotChangeResults) {
    DatasetSpec spec;
    spec.n_train = 4;
    spec.n_val = 1;
    spec.n_test = 1;
    spec.patch_size = 24;
    spec.seed = 8;
    std::string dir = testing::TempDir() + "thread_set";
    DatasetPaths paths = build_dataset(spec, dir);
    EvalReport one = evaluate_set(identity_network(), paths.train_manifest, 1);
    EvalReport four = evaluate_set(identity_network(), paths.train_manifest, 4);
    ASSERT_EQ(one.entries.size(), four.entries.size());
    for (size_t i = 0; i < one.entries.size(); ++i) {
        EXPECT_EQ(one.entries[i].id, four.entries[i].id);
        EXPECT_DOUBLE_EQ(one.entries[i].ssim, four.entries[i].ssim);
    }
}

TEST(EvalReport, CsvContainsPerImageRowsAndSummary) {
    EvalReport rep;
    rep.entries = {{"a", 20.0, 0.9}, {"b", std::numeric_limits<double>::infinity(), 1.0}};
    rep.aggregate();
    std::string path = testing::TempDir() + "report.csv";
    write_report_csv(rep, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "image_id,psnr_db,ssim");
    std::getline(in, line);
    EXPECT_EQ(line.substr(0, 2), "a,");
    std::getline(in, line);
    EXPECT_NE(line.find("inf"), std::string::npos);
    std::string table = format_report_table(rep);
    EXPECT_NE(table.find("mean"), std::string::npos);
}
