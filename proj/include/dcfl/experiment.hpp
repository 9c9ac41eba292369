#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dcfl/config.hpp"

namespace dcfl::experiment {

struct RunSummary {
    std::string kind;  // "dynamic" | "baseline"
    std::uint64_t seed = 0;
    int final_k = 0;
    std::optional<double> sample_purity;  // Phase 1 / baseline clustering purity
    std::optional<double> client_purity;
    double weighted_test_mse = 0.0;
    double weighted_train_loss = 0.0;
    std::optional<int> overwrite_client;
    std::optional<int> overwrite_class;

    std::string to_json() const;
    static RunSummary from_json_file(const std::string& path);
};

// Executes the dynamic three-phase pipeline; writes summary.json,
// metrics.jsonl and assignments.json under cfg.out_dir.
RunSummary run_dynamic(const config::ExperimentConfig& cfg);

// Feature-extraction + agglomerative clustering + per-cluster training
// without calibration; same artifact schema.
RunSummary run_baseline(const config::ExperimentConfig& cfg);

struct GenParams {
    int n = 0;        // samples or clients, kind-dependent default when 0
    int length = 0;   // series length, kind-dependent default when 0
    int classes = 3;  // classes / archetypes
    double noise = 0.05;
    std::uint64_t seed = 1;
};

// kinds: "handover" (per-client pool shape 149 x 1392), "toy" (labeled
// sinusoid classes), "power" (two-class daily-demand shape, 1096 x 24).
void generate_dataset(const std::string& kind, const std::string& out_path,
                      const GenParams& params);

// Mean/std of purity and test MSE per run kind plus the percentage
// improvement of dynamic over baseline.
std::string build_report(const std::vector<std::string>& run_dirs);

}  // namespace dcfl::experiment
