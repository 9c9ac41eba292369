#pragma once

#include <optional>
#include <string>

#include "dcfl/clustergan.hpp"
#include "dcfl/data.hpp"
#include "dcfl/divisive.hpp"
#include "dcfl/fedsim.hpp"
#include "dcfl/hypcluster.hpp"

namespace dcfl::config {

struct DatasetConfig {
    std::string path;
    std::string format = "labeled";        // "labeled" | "matrix"
    std::string layout = "samples";        // "samples" | "per_client"
    std::string normalization = "dataset"; // "dataset" | "per_series"
    int seasonal_period = 24;              // baseline feature extraction
    // per_client layout only:
    int train_len = 1344;
    int gan_sample_len = 168;
};

struct OverwriteEventConfig {
    bool enabled = false;
    int round = 50;  // Phase 2 global round before which the event fires
};

struct ExperimentConfig {
    DatasetConfig dataset;
    int n_clients = 30;
    int initial_k = 2;
    gan::LatentConfig latent;
    fed::Phase1Config phase1;
    int phase1_rerun_rounds = 25000;
    hyp::Phase2Config phase2;
    divisive::DivisiveConfig divisive_cfg;
    data::ForecastSpec forecast;
    data::SplitSpec split;
    OverwriteEventConfig overwrite;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    int workers = 1;

    divisive::DynamicConfig dynamic_config() const;
    void validate() const;
};

// Named defaults. "paper": the published round counts and hyperparameters.
// "desk": reduced rounds for laptop-scale runs.
ExperimentConfig preset(const std::string& name);

// Strict parse: unknown keys are rejected. Values present in the file
// override the preset named by "preset" (default "desk").
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

}  // namespace dcfl::config
