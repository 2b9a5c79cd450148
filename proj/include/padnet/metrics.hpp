#pragma once

// Objective evaluation: PSNR and evaluation SSIM. The evaluation SSIM is
// deliberately parameterized differently from the training loss: sigma 1.5
// and the standard squared constants C1=(0.01)^2, C2=(0.03)^2 for unit
// dynamic range. Per-image metrics aggregate into an EvalReport; PSNR of a
// perfect match is reported as +infinity and excluded from the mean.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "padnet/image.hpp"
#include "padnet/image_io.hpp"
#include "padnet/losses.hpp"
#include "padnet/manifest.hpp"
#include "padnet/network.hpp"
#include "padnet/parallel.hpp"

namespace padnet {

inline constexpr double kEvalSsimSigma = 1.5;
inline constexpr double kEvalSsimC1 = 0.01 * 0.01;
inline constexpr double kEvalSsimC2 = 0.03 * 0.03;

// 10*log10(1/MSE) with MAX=1; both inputs are clamped to [0,1] first.
// Returns +infinity when MSE < 1e-12.
inline double psnr(const Image& x, const Image& y) {
    if (!x.same_shape(y)) throw std::invalid_argument("psnr: dimension mismatch");
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = clamp01(x.data[i]) - clamp01(y.data[i]);
        sse += d * d;
    }
    double mse = sse / double(x.size());
    if (mse < 1e-12) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

// Mean SSIM over the valid region, sigma 1.5, standard squared constants,
// channel results averaged.
inline double ssim_eval(const Image& x, const Image& y) {
    if (!x.same_shape(y)) throw std::invalid_argument("ssim_eval: dimension mismatch");
    GaussianKernel kern = gaussian_kernel(kEvalSsimSigma);
    ValidRegion vr = valid_region(x.height, x.width, kern.radius);
    if (vr.count == 0) throw std::invalid_argument("ssim_eval: image too small");
    double total = 0.0;
    for (int c = 0; c < x.channels; ++c) {
        SsimMaps m = ssim_map(x.channel(c), y.channel(c), kern, kEvalSsimC1, kEvalSsimC2);
        double sum = 0.0;
        for (int py = vr.y0; py < vr.y1; ++py)
            for (int px = vr.x0; px < vr.x1; ++px) sum += m.ssim.at(py, px);
        total += sum / double(vr.count);
    }
    return total / x.channels;
}

struct EvalReport {
    struct Entry {
        std::string id;
        double psnr_db = 0.0;  // +inf marks a perfect match
        double ssim = 0.0;
    };
    std::vector<Entry> entries;
    double mean_psnr = 0.0;  // over finite entries only
    double mean_ssim = 0.0;
    int finite_psnr_count = 0;
    int infinite_psnr_count = 0;
    int skipped = 0;

    void aggregate() {
        double psum = 0.0, ssum = 0.0;
        finite_psnr_count = infinite_psnr_count = 0;
        for (const Entry& e : entries) {
            if (std::isinf(e.psnr_db)) {
                ++infinite_psnr_count;
            } else {
                psum += e.psnr_db;
                ++finite_psnr_count;
            }
            ssum += e.ssim;
        }
        mean_psnr = finite_psnr_count > 0 ? psum / finite_psnr_count : 0.0;
        mean_ssim = entries.empty() ? 0.0 : ssum / double(entries.size());
    }
};

namespace detail {

inline std::string basename_stem(const std::string& path) {
    std::size_t slash = path.find_last_of('/');
    std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
    std::size_t dot = name.find_last_of('.');
    return dot == std::string::npos ? name : name.substr(0, dot);
}

}  // namespace detail

// Dehazes every hazy image in the manifest, clamps to [0,1] and scores it
// against its clean ground truth. Unreadable samples are reported to stderr,
// skipped and counted. Entry order follows the manifest.
inline EvalReport evaluate_set(const NetworkParams& params,
                               const std::vector<ManifestEntry>& entries, int threads = 1) {
    EvalReport report;
    std::vector<EvalReport::Entry> slots(entries.size());
    std::vector<char> ok(entries.size(), 0);
    std::vector<std::string> errors(entries.size());
    parallel_for(entries.size(), threads, [&](std::size_t i) {
        try {
            Image clean = load_image(entries[i].clean_path);
            Image hazy = load_image(entries[i].hazy_path);
            Image restored = clamp01(dehaze(params, hazy));
            slots[i] = {detail::basename_stem(entries[i].hazy_path), psnr(restored, clean),
                        ssim_eval(restored, clean)};
            ok[i] = 1;
        } catch (const std::exception& ex) {
            errors[i] = ex.what();
        }
    });
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (ok[i]) {
            report.entries.push_back(std::move(slots[i]));
        } else {
            std::cerr << "evaluate_set: skipping sample " << i << ": " << errors[i] << "\n";
            ++report.skipped;
        }
    }
    report.aggregate();
    return report;
}

inline EvalReport evaluate_set(const NetworkParams& params, const std::string& manifest_path,
                               int threads = 1) {
    return evaluate_set(params, read_manifest(manifest_path), threads);
}

inline void write_report_csv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_report_csv: cannot open " + path + " for writing");
    out << "image_id,psnr_db,ssim\n";
    out << std::setprecision(10);
    for (const auto& e : report.entries) {
        out << e.id << ',';
        if (std::isinf(e.psnr_db)) out << "inf";
        else out << e.psnr_db;
        out << ',' << e.ssim << '\n';
    }
    out << "# mean_psnr_db=" << report.mean_psnr << " (over " << report.finite_psnr_count
        << " finite, " << report.infinite_psnr_count << " infinite) mean_ssim="
        << report.mean_ssim << " skipped=" << report.skipped << '\n';
}

inline std::string format_report_table(const EvalReport& report) {
    std::ostringstream os;
    os << std::left << std::setw(24) << "image" << std::right << std::setw(10) << "psnr_db"
       << std::setw(10) << "ssim" << '\n';
    os << std::fixed << std::setprecision(4);
    for (const auto& e : report.entries) {
        os << std::left << std::setw(24) << e.id << std::right << std::setw(10);
        if (std::isinf(e.psnr_db)) os << "inf";
        else os << e.psnr_db;
        os << std::setw(10) << e.ssim << '\n';
    }
    os << std::left << std::setw(24) << "mean" << std::right << std::setw(10) << report.mean_psnr
       << std::setw(10) << report.mean_ssim << '\n';
    if (report.infinite_psnr_count > 0)
        os << "(" << report.infinite_psnr_count << " image(s) with infinite PSNR excluded from "
           << "the PSNR mean)\n";
    if (report.skipped > 0) os << "(" << report.skipped << " sample(s) skipped)\n";
    return os.str();
}

}  // namespace padnet
