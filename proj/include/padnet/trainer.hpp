#pragma once

// Mini-batch training loop: seeded shuffling, per-batch averaged gradients,
// clipped momentum SGD, loss logging every 10 iterations, per-epoch
// validation and checkpointing. A fine-tuning variant warm starts from a
// checkpoint with a smaller learning rate and a larger batch. Batch items
// may be processed by parallel workers; per-image results land in indexed
// slots and are reduced in order, so any thread count gives identical
// results (single-threaded mode remains the reproducibility reference).

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "padnet/image_io.hpp"
#include "padnet/losses.hpp"
#include "padnet/manifest.hpp"
#include "padnet/metrics.hpp"
#include "padnet/network.hpp"
#include "padnet/optimizer.hpp"
#include "padnet/parallel.hpp"
#include "padnet/rng.hpp"

namespace padnet {

struct FineTuneConfig {
    double lr = 0.002;
    int batch_size = 16;
    std::string init_checkpoint;
};

struct TrainConfig {
    double base_lr = 0.01;
    int batch_size = 8;
    double momentum = 0.9;
    double weight_decay = 0.0001;
    double clip_norm = 0.1;
    ClipMode clip_mode = ClipMode::Norm;
    int epochs = 50;
    std::uint64_t seed = 0;
    double init_std = 0.01;
    LossSpec loss;
    int threads = 1;
    std::string out_dir;  // checkpoints land here when non-empty
    std::optional<FineTuneConfig> fine_tune;

    // lr and batch size after the fine-tune override, if any.
    double effective_lr() const { return fine_tune ? fine_tune->lr : base_lr; }
    int effective_batch_size() const { return fine_tune ? fine_tune->batch_size : batch_size; }

    void validate() const {
        if (!(base_lr > 0.0)) throw std::invalid_argument("train config: base_lr must be positive");
        if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
        if (!(momentum >= 0.0 && momentum < 1.0))
            throw std::invalid_argument("train config: momentum must lie in [0,1)");
        if (weight_decay < 0.0)
            throw std::invalid_argument("train config: weight_decay must be non-negative");
        if (!(clip_norm > 0.0)) throw std::invalid_argument("train config: clip_norm must be positive");
        if (epochs < 1) throw std::invalid_argument("train config: epochs must be >= 1");
        if (fine_tune) {
            if (!(fine_tune->lr > 0.0))
                throw std::invalid_argument("train config: fine-tune lr must be positive");
            if (fine_tune->batch_size < 1)
                throw std::invalid_argument("train config: fine-tune batch_size must be >= 1");
            if (fine_tune->init_checkpoint.empty())
                throw std::invalid_argument("train config: fine-tune requires an init checkpoint");
        }
        loss.validate();
    }
};

struct TrainHistory {
    struct LossSample {
        long iteration = 0;
        double loss = 0.0;
    };
    struct ValSample {
        int epoch = 0;
        double psnr_db = 0.0;
        double ssim = 0.0;
    };
    std::vector<LossSample> loss_curve;   // every 10th iteration plus the last
    std::vector<ValSample> validation;    // one row per epoch
};

struct TrainResult {
    NetworkParams params;
    TrainHistory history;
};

inline void write_history_csv(const TrainHistory& h, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_history_csv: cannot open " + path + " for writing");
    out << "iteration,loss\n" << std::setprecision(17);
    for (const auto& s : h.loss_curve) out << s.iteration << ',' << s.loss << '\n';
}

inline void write_validation_csv(const TrainHistory& h, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("write_validation_csv: cannot open " + path + " for writing");
    out << "epoch,psnr_db,ssim\n" << std::setprecision(17);
    for (const auto& s : h.validation) out << s.epoch << ',' << s.psnr_db << ',' << s.ssim << '\n';
}

namespace detail {

struct SamplePair {
    Image hazy;
    Image clean;
};

inline std::vector<SamplePair> load_pairs(const std::vector<ManifestEntry>& entries) {
    std::vector<SamplePair> pairs;
    pairs.reserve(entries.size());
    for (const ManifestEntry& e : entries)
        pairs.push_back({load_image(e.hazy_path), load_image(e.clean_path)});
    return pairs;
}

}  // namespace detail

// Trains from scratch (Gaussian init) or from config.fine_tune's checkpoint.
// Returns the final parameters; when config.out_dir is set, `last.ckpt` is
// rewritten after every epoch and `best.ckpt` tracks the best validation
// SSIM seen so far.
inline TrainResult train(const std::vector<ManifestEntry>& train_entries,
                         const std::vector<ManifestEntry>& val_entries,
                         const TrainConfig& config) {
    config.validate();
    if (train_entries.empty()) throw std::invalid_argument("train: empty training manifest");
    if (val_entries.empty()) throw std::invalid_argument("train: empty validation manifest");

    std::vector<detail::SamplePair> data = detail::load_pairs(train_entries);
    NetworkParams params = config.fine_tune ? load_checkpoint(config.fine_tune->init_checkpoint)
                                            : init_params(config.seed, config.init_std);
    OptimState state = OptimState::zeros_like(params);
    SgdOptions opt{config.effective_lr(), config.momentum, config.weight_decay, config.clip_norm,
                   config.clip_mode};
    const int batch_size = config.effective_batch_size();

    TrainHistory history;
    Rng shuffle_rng(derive_seed(config.seed, 0x73687566666cull));
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    double best_val_ssim = -2.0;
    long iteration = 0;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += std::size_t(batch_size)) {
            std::size_t count = std::min(std::size_t(batch_size), order.size() - start);
            ++iteration;

            std::vector<ParamGrads> grads(count);
            std::vector<double> values(count);
            parallel_for(count, config.threads, [&](std::size_t k) {
                const detail::SamplePair& sample = data[order[start + k]];
                ForwardCache fc = forward(params, sample.hazy);
                LossResult lr = evaluate_loss(fc.j, sample.clean, config.loss);
                values[k] = lr.value;
                grads[k] = backward(params, fc, lr.grad);
            });

            double batch_loss = 0.0;
            for (double v : values) batch_loss += v;
            batch_loss /= double(count);
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("train: non-finite loss at iteration " +
                                         std::to_string(iteration) +
                                         " (last epoch checkpoint preserved)");

            ParamGrads batch_grads = grads[0];
            for (std::size_t k = 1; k < count; ++k)
                for (std::size_t l = 0; l < 5; ++l) {
                    for (std::size_t i = 0; i < batch_grads.conv[l].weights.size(); ++i)
                        batch_grads.conv[l].weights[i] += grads[k].conv[l].weights[i];
                    for (std::size_t i = 0; i < batch_grads.conv[l].biases.size(); ++i)
                        batch_grads.conv[l].biases[i] += grads[k].conv[l].biases[i];
                }
            double inv = 1.0 / double(count);
            for (std::size_t l = 0; l < 5; ++l) {
                for (double& v : batch_grads.conv[l].weights) v *= inv;
                for (double& v : batch_grads.conv[l].biases) v *= inv;
            }

            sgd_step(params, batch_grads, state, opt);
            if ((iteration - 1) % 10 == 0)
                history.loss_curve.push_back({iteration, batch_loss});
            else if (epoch == config.epochs && start + count >= order.size())
                history.loss_curve.push_back({iteration, batch_loss});  // final sample
        }

        EvalReport val = evaluate_set(params, val_entries, config.threads);
        history.validation.push_back({epoch, val.mean_psnr, val.mean_ssim});
        if (!config.out_dir.empty()) {
            save_checkpoint(params, config.out_dir + "/last.ckpt");
            if (val.mean_ssim > best_val_ssim) {
                best_val_ssim = val.mean_ssim;
                save_checkpoint(params, config.out_dir + "/best.ckpt");
            }
        } else if (val.mean_ssim > best_val_ssim) {
            best_val_ssim = val.mean_ssim;
        }
    }
    return {std::move(params), std::move(history)};
}

inline TrainResult train(const std::string& train_manifest, const std::string& val_manifest,
                         const TrainConfig& config) {
    return train(read_manifest(train_manifest), read_manifest(val_manifest), config);
}

// ============================================================================
// Alpha sweep
// ============================================================================

struct SweepRow {
    double alpha = 0.0;
    double psnr_db = 0.0;
    double ssim = 0.0;
};

// One training run per alpha (fine-tuning when configured), each evaluated
// on the validation manifest. Rows come back sorted by alpha.
inline std::vector<SweepRow> alpha_sweep(const std::vector<ManifestEntry>& train_entries,
                                         const std::vector<ManifestEntry>& val_entries,
                                         const TrainConfig& config, std::vector<double> alphas) {
    if (config.loss.kind != LossKind::MSSSIM_L2 && config.loss.kind != LossKind::MSSSIM_L1)
        throw std::invalid_argument("alpha_sweep: loss kind must be a mix loss");
    if (alphas.empty()) throw std::invalid_argument("alpha_sweep: no alpha values given");
    std::sort(alphas.begin(), alphas.end());
    std::vector<SweepRow> rows;
    for (double alpha : alphas) {
        TrainConfig run = config;
        run.loss.alpha = alpha;
        run.out_dir.clear();  // sweep runs do not overwrite checkpoints
        TrainResult res = train(train_entries, val_entries, run);
        EvalReport report = evaluate_set(res.params, val_entries, config.threads);
        rows.push_back({alpha, report.mean_psnr, report.mean_ssim});
    }
    return rows;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_sweep_csv: cannot open " + path + " for writing");
    out << "alpha,psnr_db,ssim\n" << std::setprecision(10);
    for (const SweepRow& r : rows) out << r.alpha << ',' << r.psnr_db << ',' << r.ssim << '\n';
}

}  // namespace padnet
