#pragma once

// Synthetic dataset construction: clean patches (procedural or cropped from
// a source directory), per-sample haze parameters drawn uniformly from
// configured ranges, hazy/clean pair emission as PNG and train/val/test
// manifests with disjoint samples. Fully deterministic from the spec seed;
// every sample derives its own seed so generation order does not matter.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "padnet/haze.hpp"
#include "padnet/image.hpp"
#include "padnet/image_io.hpp"
#include "padnet/manifest.hpp"
#include "padnet/rng.hpp"

namespace padnet {

struct DatasetSpec {
    std::string clean_source = "procedural";  // directory of images, or "procedural"
    int n_train = 64;
    int n_val = 16;
    int n_test = 16;
    double beta_lo = 0.4, beta_hi = 1.6;
    double a_lo = 0.7, a_hi = 1.0;
    std::vector<DepthKind> depth_kinds = {DepthKind::Ramp, DepthKind::Radial,
                                          DepthKind::SmoothNoise};
    int patch_size = 64;
    double d_max = 5.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_train < 1 || n_val < 1 || n_test < 1)
            throw std::invalid_argument("dataset spec: split counts must be >= 1");
        if (!(beta_lo >= 0.0) || beta_hi < beta_lo)
            throw std::invalid_argument("dataset spec: invalid beta range (need 0 <= lo <= hi)");
        if (!(a_lo > 0.0) || a_hi < a_lo || a_hi > 1.0)
            throw std::invalid_argument("dataset spec: invalid A range (need 0 < lo <= hi <= 1)");
        if (depth_kinds.empty())
            throw std::invalid_argument("dataset spec: depth_kinds must be non-empty");
        if (patch_size < 16) throw std::invalid_argument("dataset spec: patch_size must be >= 16");
        if (!(d_max > 0.0)) throw std::invalid_argument("dataset spec: d_max must be positive");
    }
};

// Deterministic synthetic clean image: an oriented gradient base, a handful
// of rectangles with per-channel color offsets, and smoothed noise, then an
// affine rescale of every channel to [0.05, 0.95] so intensities always span
// at least [0.1, 0.9].
inline Image procedural_clean(std::uint64_t seed, int size) {
    if (size < 16) throw std::invalid_argument("procedural_clean: size must be >= 16");
    Rng rng(derive_seed(seed, 0x636c65616eull));
    const int h = size, w = size;
    Image img(h, w, 3);

    double ang = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    double gx = std::cos(ang), gy = std::sin(ang);
    for (int c = 0; c < 3; ++c) {
        double amp = rng.uniform(0.5, 1.0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                img.at(c, y, x) = amp * (gx * x / double(w - 1) + gy * y / double(h - 1));
    }

    int nrect = 2 + int(rng.below(4));
    for (int k = 0; k < nrect; ++k) {
        int y0 = int(rng.below(std::uint64_t(h)));
        int x0 = int(rng.below(std::uint64_t(w)));
        int ry = 3 + int(rng.below(std::uint64_t(h / 2)));
        int rx = 3 + int(rng.below(std::uint64_t(w / 2)));
        double dc[3] = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
        for (int c = 0; c < 3; ++c)
            for (int y = y0; y < std::min(h, y0 + ry); ++y)
                for (int x = x0; x < std::min(w, x0 + rx); ++x) img.at(c, y, x) += dc[c];
    }

    GaussianKernel smooth = gaussian_kernel(1.5);
    for (int c = 0; c < 3; ++c) {
        Plane noise(h, w);
        for (double& v : noise.v) v = rng.normal(0.0, 0.15);
        noise = gaussian_filter(noise, smooth);
        Plane p = img.channel(c);
        for (std::size_t i = 0; i < p.size(); ++i) p.v[i] += noise.v[i];
        auto [lo_it, hi_it] = std::minmax_element(p.v.begin(), p.v.end());
        double lo = *lo_it, span = *hi_it - *lo_it;
        if (span <= 0.0) throw std::logic_error("procedural_clean: degenerate channel");
        for (double& v : p.v) v = 0.05 + 0.9 * (v - lo) / span;
        img.set_channel(c, p);
    }
    return img;
}

struct DatasetPaths {
    std::string train_manifest;
    std::string val_manifest;
    std::string test_manifest;
};

namespace detail {

inline std::vector<std::string> list_images(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string p = entry.path().string();
        if (ends_with(p, ".png") || ends_with(p, ".ppm") || ends_with(p, ".pgm"))
            files.push_back(p);
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw std::runtime_error("build_dataset: no images found in " + dir);
    return files;
}

// Random crop of a source image to patch_size, promoted to 3 channels.
inline Image crop_clean(const Image& src, int patch, Rng& rng) {
    if (src.height < patch || src.width < patch)
        throw std::runtime_error("build_dataset: source image smaller than patch size");
    int y0 = src.height == patch ? 0 : int(rng.below(std::uint64_t(src.height - patch + 1)));
    int x0 = src.width == patch ? 0 : int(rng.below(std::uint64_t(src.width - patch + 1)));
    Image out(patch, patch, 3);
    for (int c = 0; c < 3; ++c) {
        int sc = src.channels == 3 ? c : 0;
        for (int y = 0; y < patch; ++y)
            for (int x = 0; x < patch; ++x) out.at(c, y, x) = src.at(sc, y0 + y, x0 + x);
    }
    return out;
}

}  // namespace detail

// Emits n_train + n_val + n_test hazy/clean pairs under out_dir/images and
// writes the three disjoint split manifests into out_dir. Manifest paths are
// relative to out_dir.
inline DatasetPaths build_dataset(const DatasetSpec& spec, const std::string& out_dir) {
    spec.validate();
    std::filesystem::create_directories(out_dir + "/images");

    std::vector<std::string> sources;
    if (spec.clean_source != "procedural") sources = detail::list_images(spec.clean_source);

    struct Split {
        const char* name;
        int count;
        std::vector<ManifestEntry> entries;
    };
    std::array<Split, 3> splits = {
        Split{"train", spec.n_train, {}}, Split{"val", spec.n_val, {}},
        Split{"test", spec.n_test, {}}};

    std::uint64_t sample_index = 0;
    for (Split& split : splits) {
        for (int i = 0; i < split.count; ++i, ++sample_index) {
            std::uint64_t sample_seed = derive_seed(spec.seed, sample_index);
            Rng rng(sample_seed);

            Image clean;
            if (sources.empty()) {
                clean = procedural_clean(sample_seed, spec.patch_size);
            } else {
                const std::string& path = sources[std::size_t(rng.below(sources.size()))];
                clean = detail::crop_clean(load_image(path), spec.patch_size, rng);
            }

            double beta = rng.uniform(spec.beta_lo, spec.beta_hi);
            double a = rng.uniform(spec.a_lo, spec.a_hi);
            DepthKind kind = spec.depth_kinds[std::size_t(rng.below(spec.depth_kinds.size()))];
            DepthMap depth = make_depth(kind, spec.patch_size, spec.patch_size, sample_seed,
                                        spec.d_max);
            Image hazy = synthesize_haze(clean, transmission(depth, beta), a);

            char stem[64];
            std::snprintf(stem, sizeof(stem), "%s_%04d", split.name, i);
            std::string clean_rel = std::string("images/") + stem + "_clean.png";
            std::string hazy_rel = std::string("images/") + stem + "_hazy.png";
            save_image(clean, out_dir + "/" + clean_rel);
            save_image(hazy, out_dir + "/" + hazy_rel);
            split.entries.push_back(
                {clean_rel, hazy_rel, beta, a, sample_seed, to_string(kind)});
        }
    }

    DatasetPaths paths{out_dir + "/train.txt", out_dir + "/val.txt", out_dir + "/test.txt"};
    write_manifest(splits[0].entries, paths.train_manifest);
    write_manifest(splits[1].entries, paths.val_manifest);
    write_manifest(splits[2].entries, paths.test_manifest);
    return paths;
}

}  // namespace padnet
