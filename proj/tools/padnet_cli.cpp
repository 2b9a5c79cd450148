// padnet command-line driver. Subcommands cover the full pipeline:
//   synthesize  build a synthetic hazy/clean dataset with split manifests
//   train       train the K-estimation network under a chosen loss
//   dehaze      restore a single image with a trained checkpoint
//   eval        score a checkpoint on a manifest (PSNR / SSIM report)
//   gradcheck   finite-difference self-test of loss and network gradients
//   sweep       fine-tuning runs over a list of alpha mix weights
// Options mirror run-config keys; a --config file is applied first and
// explicit flags override it.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "padnet/config.hpp"
#include "padnet/dataset.hpp"
#include "padnet/gradcheck.hpp"
#include "padnet/image_io.hpp"
#include "padnet/metrics.hpp"
#include "padnet/trainer.hpp"

namespace {

struct CommandState {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;  // config key -> value

    padnet::RunConfig resolve() const {
        padnet::RunConfig cfg;
        if (!config_path.empty()) cfg = padnet::parse_config_file(config_path);
        for (const auto& [key, value] : overrides) padnet::apply_config_key(cfg, key, value);
        cfg.finalize();
        return cfg;
    }
};

// Registers a flag that feeds the run-config key of the same meaning.
void add_key_option(CLI::App* cmd, CommandState& st, const std::string& flag,
                    const std::string& key, const std::string& desc) {
    cmd->add_option_function<std::string>(
        flag, [&st, key](const std::string& v) { st.overrides.emplace_back(key, v); }, desc);
}

void add_common_options(CLI::App* cmd, CommandState& st) {
    cmd->add_option("--config", st.config_path, "run-config file (key = value lines)");
    add_key_option(cmd, st, "--seed", "seed", "RNG seed (default 0)");
    add_key_option(cmd, st, "--threads", "threads",
                   "worker threads; 1 guarantees bitwise reproducibility (default 1)");
    add_key_option(cmd, st, "--out", "out", "output directory (default out)");
}

void add_loss_options(CLI::App* cmd, CommandState& st) {
    add_key_option(cmd, st, "--loss", "loss",
                   "loss kind: L2, L1, SSIM, MSSSIM, MSSSIM_L2, MSSSIM_L1 (default L2)");
    add_key_option(cmd, st, "--alpha", "alpha", "mix weight for MSSSIM_L2/MSSSIM_L1 (default 0.1)");
    add_key_option(cmd, st, "--sigma-g", "sigma_g", "SSIM Gaussian sigma (default 5)");
    add_key_option(cmd, st, "--sigmas", "sigmas",
                   "MS-SSIM sigma ladder, comma list (default 0.5,1,2,4,8)");
    add_key_option(cmd, st, "--c1", "c1", "SSIM stability constant C1 (default 0.01)");
    add_key_option(cmd, st, "--c2", "c2", "SSIM stability constant C2 (default 0.03)");
    add_key_option(cmd, st, "--luminance-only", "luminance_only",
                   "compute structural terms on luma instead of per channel (default false)");
}

void add_train_options(CLI::App* cmd, CommandState& st) {
    add_key_option(cmd, st, "--train-manifest", "train_manifest", "training split manifest");
    add_key_option(cmd, st, "--val-manifest", "val_manifest", "validation split manifest");
    add_key_option(cmd, st, "--base-lr", "base_lr", "base learning rate (default 0.01)");
    add_key_option(cmd, st, "--batch-size", "batch_size", "mini-batch size (default 8)");
    add_key_option(cmd, st, "--momentum", "momentum", "SGD momentum (default 0.9)");
    add_key_option(cmd, st, "--weight-decay", "weight_decay", "weight decay (default 0.0001)");
    add_key_option(cmd, st, "--clip-norm", "clip_norm", "gradient clip threshold (default 0.1)");
    add_key_option(cmd, st, "--clip-mode", "clip_mode", "norm or value (default norm)");
    add_key_option(cmd, st, "--epochs", "epochs", "training epochs (default 50)");
    add_key_option(cmd, st, "--init-std", "init_std", "Gaussian init stddev (default 0.01)");
    add_key_option(cmd, st, "--fine-tune-init", "fine_tune_init",
                   "checkpoint to warm start from (enables fine-tuning)");
    add_key_option(cmd, st, "--fine-tune-lr", "fine_tune_lr", "fine-tuning lr (default 0.002)");
    add_key_option(cmd, st, "--fine-tune-batch-size", "fine_tune_batch_size",
                   "fine-tuning batch size (default 16)");
}

int run_synthesize(const CommandState& st) {
    padnet::RunConfig cfg = st.resolve();
    padnet::DatasetPaths paths = padnet::build_dataset(cfg.dataset, cfg.out_dir);
    std::cout << paths.train_manifest << "\n" << paths.val_manifest << "\n"
              << paths.test_manifest << "\n";
    return 0;
}

int run_train(const CommandState& st) {
    padnet::RunConfig cfg = st.resolve();
    if (cfg.train_manifest.empty() || cfg.val_manifest.empty())
        throw std::invalid_argument("train: --train-manifest and --val-manifest are required");
    std::filesystem::create_directories(cfg.out_dir);
    padnet::TrainResult res = padnet::train(cfg.train_manifest, cfg.val_manifest, cfg.train);
    padnet::save_checkpoint(res.params, cfg.out_dir + "/final.ckpt");
    padnet::write_history_csv(res.history, cfg.out_dir + "/history.csv");
    padnet::write_validation_csv(res.history, cfg.out_dir + "/val_history.csv");
    const auto& last = res.history.validation.back();
    std::cout << "final validation: psnr_db=" << last.psnr_db << " ssim=" << last.ssim << "\n";
    std::cout << "checkpoints and history written to " << cfg.out_dir << "\n";
    return 0;
}

int run_dehaze(const std::string& checkpoint, const std::string& input,
               const std::string& output) {
    padnet::NetworkParams params = padnet::load_checkpoint(checkpoint);
    padnet::Image hazy = padnet::load_image(input);
    if (hazy.channels != 3)
        throw std::invalid_argument("dehaze: input must be a 3-channel image");
    padnet::save_image(padnet::clamp01(padnet::dehaze(params, hazy)), output);
    return 0;
}

int run_eval(const CommandState& st, const std::string& checkpoint, const std::string& manifest,
             std::string csv_path) {
    padnet::RunConfig cfg = st.resolve();
    padnet::NetworkParams params = padnet::load_checkpoint(checkpoint);
    padnet::EvalReport report = padnet::evaluate_set(params, manifest, cfg.train.threads);
    if (csv_path.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        csv_path = cfg.out_dir + "/eval.csv";
    }
    padnet::write_report_csv(report, csv_path);
    std::cout << padnet::format_report_table(report);
    std::cout << "report written to " << csv_path << "\n";
    return 0;
}

int run_gradcheck(const std::string& kind_name, std::uint64_t seed, int size, int pairs) {
    padnet::LossKind kind = padnet::loss_kind_from_string(kind_name);
    padnet::LossSpec spec = padnet::LossSpec::defaults_for(kind);
    // Small windows so the suite sizes keep a valid region.
    spec.sigma_g = 1.0;
    spec.sigmas = {0.5, 1.0, 2.0};
    double tol = padnet::loss_gradcheck_tolerance(kind);

    padnet::GradCheckReport loss_rep = padnet::check_loss_gradient(
        spec, seed, size, size, 1, pairs, padnet::loss_gradcheck_step(kind));
    std::printf("loss gradient    %-10s max rel err %.3e over %ld elements (tolerance %.0e)\n",
                kind_name.c_str(), loss_rep.max_rel_err, loss_rep.compared, tol);

    padnet::LossSpec net_spec = spec;
    net_spec.sigmas = {0.5, 1.0};  // radius 3 fits the 9x9 network probe
    padnet::GradCheckReport net_rep = padnet::check_network_gradient(net_spec, seed, 9, 1e-4);
    std::printf("network gradient %-10s max rel err %.3e over %ld parameters (tolerance 1e-04)\n",
                kind_name.c_str(), net_rep.max_rel_err, net_rep.compared);

    bool ok = loss_rep.max_rel_err < tol && net_rep.max_rel_err < 1e-4 && loss_rep.compared > 0 &&
              net_rep.compared > 0;
    std::printf("gradcheck %s: %s\n", kind_name.c_str(), ok ? "PASS" : "FAIL");
    return ok ? 0 : 1;
}

int run_sweep(const CommandState& st, const std::string& alphas_csv) {
    padnet::RunConfig cfg = st.resolve();
    if (cfg.train_manifest.empty() || cfg.val_manifest.empty())
        throw std::invalid_argument("sweep: --train-manifest and --val-manifest are required");
    std::vector<double> alphas;
    for (const std::string& tok : padnet::detail::split_commas(alphas_csv))
        alphas.push_back(padnet::detail::parse_double("alphas", tok));
    std::vector<padnet::SweepRow> rows = padnet::alpha_sweep(
        padnet::read_manifest(cfg.train_manifest), padnet::read_manifest(cfg.val_manifest),
        cfg.train, alphas);
    std::filesystem::create_directories(cfg.out_dir);
    std::string csv = cfg.out_dir + "/sweep.csv";
    padnet::write_sweep_csv(rows, csv);
    std::printf("%8s %10s %10s\n", "alpha", "psnr_db", "ssim");
    for (const auto& r : rows) std::printf("%8.3f %10.4f %10.4f\n", r.alpha, r.psnr_db, r.ssim);
    std::cout << "table written to " << csv << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"perception-aided single-image dehazing toolkit"};
    app.require_subcommand(1);

    CommandState synth_st, train_st, eval_st, sweep_st;

    CLI::App* synth = app.add_subcommand("synthesize", "build a synthetic hazy/clean dataset");
    add_common_options(synth, synth_st);
    add_key_option(synth, synth_st, "--clean-source", "clean_source",
                   "image directory or 'procedural' (default procedural)");
    add_key_option(synth, synth_st, "--n-train", "n_train", "training samples (default 64)");
    add_key_option(synth, synth_st, "--n-val", "n_val", "validation samples (default 16)");
    add_key_option(synth, synth_st, "--n-test", "n_test", "test samples (default 16)");
    add_key_option(synth, synth_st, "--patch-size", "patch_size", "patch size (default 64)");
    add_key_option(synth, synth_st, "--beta-lo", "beta_lo", "min scattering beta (default 0.4)");
    add_key_option(synth, synth_st, "--beta-hi", "beta_hi", "max scattering beta (default 1.6)");
    add_key_option(synth, synth_st, "--a-lo", "a_lo", "min atmospheric light (default 0.7)");
    add_key_option(synth, synth_st, "--a-hi", "a_hi", "max atmospheric light (default 1.0)");
    add_key_option(synth, synth_st, "--depth-kinds", "depth_kinds",
                   "subset of ramp,radial,smooth_noise (default all)");
    add_key_option(synth, synth_st, "--d-max", "d_max", "max synthetic depth (default 5)");

    CLI::App* train_cmd = app.add_subcommand("train", "train the K-estimation network");
    add_common_options(train_cmd, train_st);
    add_loss_options(train_cmd, train_st);
    add_train_options(train_cmd, train_st);

    std::string dehaze_ckpt, dehaze_in, dehaze_out;
    CLI::App* dehaze_cmd = app.add_subcommand("dehaze", "restore one image with a checkpoint");
    dehaze_cmd->add_option("checkpoint", dehaze_ckpt, "trained checkpoint")->required();
    dehaze_cmd->add_option("input", dehaze_in, "hazy input image")->required();
    dehaze_cmd->add_option("output", dehaze_out, "restored output image")->required();

    std::string eval_ckpt, eval_manifest, eval_csv;
    CLI::App* eval_cmd = app.add_subcommand("eval", "score a checkpoint on a manifest");
    add_common_options(eval_cmd, eval_st);
    eval_cmd->add_option("--checkpoint", eval_ckpt, "trained checkpoint")->required();
    eval_cmd->add_option("--manifest", eval_manifest, "manifest to evaluate")->required();
    eval_cmd->add_option("--csv", eval_csv, "report path (default <out>/eval.csv)");

    std::string gc_kind;
    std::uint64_t gc_seed = 1;
    int gc_size = 21, gc_pairs = 5;
    CLI::App* gc_cmd = app.add_subcommand(
        "gradcheck", "finite-difference self-test (suite sigmas: SSIM 1, MS-SSIM 0.5,1,2)");
    gc_cmd->add_option("loss", gc_kind, "loss kind to check")->required();
    gc_cmd->add_option("--seed", gc_seed, "RNG seed (default 1)");
    gc_cmd->add_option("--size", gc_size, "probe image size (default 21)");
    gc_cmd->add_option("--pairs", gc_pairs, "random pairs for the loss suite (default 5)");

    std::string sweep_alphas = "0.1,0.3,0.5,0.7,0.9";
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "fine-tuning runs over alpha mix weights");
    add_common_options(sweep_cmd, sweep_st);
    add_loss_options(sweep_cmd, sweep_st);
    add_train_options(sweep_cmd, sweep_st);
    sweep_cmd->add_option("--alphas", sweep_alphas,
                          "comma list of mix weights (default 0.1,0.3,0.5,0.7,0.9)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return run_synthesize(synth_st);
        if (train_cmd->parsed()) return run_train(train_st);
        if (dehaze_cmd->parsed()) return run_dehaze(dehaze_ckpt, dehaze_in, dehaze_out);
        if (eval_cmd->parsed()) return run_eval(eval_st, eval_ckpt, eval_manifest, eval_csv);
        if (gc_cmd->parsed()) return run_gradcheck(gc_kind, gc_seed, gc_size, gc_pairs);
        if (sweep_cmd->parsed()) return run_sweep(sweep_st, sweep_alphas);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
