#pragma once

// Flat key=value run configuration shared by the CLI subcommands. Lines are
// `key = value`, '#' starts a comment, unknown keys are rejected. Every key
// has the documented default; command-line flags override file values.
//
//   loss = L2|L1|SSIM|MSSSIM|MSSSIM_L2|MSSSIM_L1      (default L2)
//   alpha = 0.1            sigma_g = 5      sigmas = 0.5,1,2,4,8
//   c1 = 0.01              c2 = 0.03
//   paper_grad_scaling = true                luminance_only = false
//   base_lr = 0.01         batch_size = 8    momentum = 0.9
//   weight_decay = 0.0001  clip_norm = 0.1   clip_mode = norm|value
//   epochs = 50            seed = 0          threads = 1
//   init_std = 0.01
//   fine_tune_init = <checkpoint path>  (enables fine-tuning)
//   fine_tune_lr = 0.002   fine_tune_batch_size = 16
//   clean_source = procedural | <dir>   patch_size = 64   d_max = 5
//   n_train = 64           n_val = 16        n_test = 16
//   beta_lo = 0.4          beta_hi = 1.6     a_lo = 0.7    a_hi = 1.0
//   depth_kinds = ramp,radial,smooth_noise
//   train_manifest = <path>             val_manifest = <path>
//   out = <dir>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "padnet/dataset.hpp"
#include "padnet/losses.hpp"
#include "padnet/trainer.hpp"

namespace padnet {

struct RunConfig {
    LossSpec loss;
    TrainConfig train;
    DatasetSpec dataset;
    std::string train_manifest;
    std::string val_manifest;
    std::string out_dir = "out";
    std::string fine_tune_init;  // moved into train.fine_tune by finalize()

    // Re-validates every constituent constraint and wires cross references.
    void finalize() {
        if (!fine_tune_init.empty()) {
            FineTuneConfig ft;
            if (train.fine_tune) ft = *train.fine_tune;
            ft.init_checkpoint = fine_tune_init;
            train.fine_tune = ft;
        }
        train.loss = loss;
        train.out_dir = out_dir;
        dataset.seed = train.seed;
        loss.validate();
        train.validate();
        dataset.validate();
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (...) {
        throw std::invalid_argument("config key '" + key + "': not a number: '" + value + "'");
    }
}

inline long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        long v = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (...) {
        throw std::invalid_argument("config key '" + key + "': not an integer: '" + value + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw std::invalid_argument("config key '" + key + "': not a boolean: '" + value + "'");
}

inline std::vector<std::string> split_commas(const std::string& value) {
    std::vector<std::string> parts;
    std::istringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

}  // namespace detail

// Applies one key=value pair; throws naming the key on anything invalid.
inline void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    using detail::parse_bool;
    using detail::parse_double;
    using detail::parse_int;

    if (key == "loss") cfg.loss.kind = loss_kind_from_string(value);
    else if (key == "alpha") cfg.loss.alpha = parse_double(key, value);
    else if (key == "sigma_g") cfg.loss.sigma_g = parse_double(key, value);
    else if (key == "sigmas") {
        cfg.loss.sigmas.clear();
        for (const std::string& s : detail::split_commas(value))
            cfg.loss.sigmas.push_back(parse_double(key, s));
    } else if (key == "c1") cfg.loss.c1 = parse_double(key, value);
    else if (key == "c2") cfg.loss.c2 = parse_double(key, value);
    else if (key == "paper_grad_scaling") cfg.loss.paper_grad_scaling = parse_bool(key, value);
    else if (key == "luminance_only") cfg.loss.luminance_only = parse_bool(key, value);
    else if (key == "base_lr") cfg.train.base_lr = parse_double(key, value);
    else if (key == "batch_size") cfg.train.batch_size = int(parse_int(key, value));
    else if (key == "momentum") cfg.train.momentum = parse_double(key, value);
    else if (key == "weight_decay") cfg.train.weight_decay = parse_double(key, value);
    else if (key == "clip_norm") cfg.train.clip_norm = parse_double(key, value);
    else if (key == "clip_mode") {
        if (value == "norm") cfg.train.clip_mode = ClipMode::Norm;
        else if (value == "value") cfg.train.clip_mode = ClipMode::Value;
        else throw std::invalid_argument("config key 'clip_mode': expected norm or value");
    } else if (key == "epochs") cfg.train.epochs = int(parse_int(key, value));
    else if (key == "seed") {
        cfg.train.seed = std::uint64_t(parse_int(key, value));
        cfg.dataset.seed = cfg.train.seed;
    } else if (key == "threads") cfg.train.threads = int(parse_int(key, value));
    else if (key == "init_std") cfg.train.init_std = parse_double(key, value);
    else if (key == "fine_tune_init") cfg.fine_tune_init = value;
    else if (key == "fine_tune_lr") {
        if (!cfg.train.fine_tune) cfg.train.fine_tune = FineTuneConfig{};
        cfg.train.fine_tune->lr = parse_double(key, value);
    } else if (key == "fine_tune_batch_size") {
        if (!cfg.train.fine_tune) cfg.train.fine_tune = FineTuneConfig{};
        cfg.train.fine_tune->batch_size = int(parse_int(key, value));
    } else if (key == "clean_source") cfg.dataset.clean_source = value;
    else if (key == "patch_size") cfg.dataset.patch_size = int(parse_int(key, value));
    else if (key == "d_max") cfg.dataset.d_max = parse_double(key, value);
    else if (key == "n_train") cfg.dataset.n_train = int(parse_int(key, value));
    else if (key == "n_val") cfg.dataset.n_val = int(parse_int(key, value));
    else if (key == "n_test") cfg.dataset.n_test = int(parse_int(key, value));
    else if (key == "beta_lo") cfg.dataset.beta_lo = parse_double(key, value);
    else if (key == "beta_hi") cfg.dataset.beta_hi = parse_double(key, value);
    else if (key == "a_lo") cfg.dataset.a_lo = parse_double(key, value);
    else if (key == "a_hi") cfg.dataset.a_hi = parse_double(key, value);
    else if (key == "depth_kinds") {
        cfg.dataset.depth_kinds.clear();
        for (const std::string& s : detail::split_commas(value))
            cfg.dataset.depth_kinds.push_back(depth_kind_from_string(s));
    } else if (key == "train_manifest") cfg.train_manifest = value;
    else if (key == "val_manifest") cfg.val_manifest = value;
    else if (key == "out") cfg.out_dir = value;
    else throw std::invalid_argument("unknown config key '" + key + "'");
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                        " is not key = value");
        std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        apply_config_key(cfg, key, value);
    }
    return cfg;
}

}  // namespace padnet
