#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "dcfl/clustergan.hpp"
#include "dcfl/data.hpp"
#include "dcfl/fedsim.hpp"
#include "dcfl/hypcluster.hpp"

namespace dcfl::divisive {

struct ClusterLossStats {
    struct Entry {
        double mean_loss = 0.0;
        double var_loss = 0.0;  // population variance
        int member_count = 0;
    };
    std::map<int, Entry> per_cluster;
};

struct DivisiveConfig {
    int max_rounds = 1;   // I
    int split_arity = 2;  // n
    double var_threshold = 1e-6;
    double mean_threshold = 1e-2;
    bool global_recalibration = false;

    void validate() const;
};

struct DynamicConfig {
    DivisiveConfig divisive;
    gan::LatentConfig latent;  // K = initial cluster count
    fed::Phase1Config phase1;
    int phase1_rerun_rounds = 25000;  // reduced rounds after a split
    hyp::Phase2Config phase2;
};

struct SplitEvent {
    int divisive_round = 0;
    int parent_cluster = 0;
    std::vector<int> child_clusters;
};

struct DynamicResult {
    hyp::ClusterRegistry registry;
    gan::GanTriple triple;                  // initial Phase 1 models
    std::map<int, int> phase1_assignments;  // initial Phase 1 outcome
    std::vector<SplitEvent> splits;
    std::optional<int> halted_round;  // set when both thresholds cleared
};

// Population mean and variance of member losses, per cluster.
ClusterLossStats cluster_loss_stats(const std::map<int, double>& losses,
                                    const hyp::ClusterRegistry& reg);

// Highest variance above the variance threshold; failing that, highest mean
// above the mean threshold; failing both, nothing (stop). Ties toward the
// smallest cluster id.
std::optional<int> select_cluster(const ClusterLossStats& stats, const DivisiveConfig& cfg);

// The full three-phase pipeline. The hook fires before each Phase 2 training
// round of the first divisive round only (environment events); the observer
// fires after every Phase 2 round of every divisive round.
DynamicResult run_dynamic_clustering(data::ClientPool& pool, const DynamicConfig& cfg,
                                     std::uint64_t seed,
                                     const hyp::RoundObserver& observer = nullptr,
                                     const hyp::RoundHook& hook = nullptr);

}  // namespace dcfl::divisive
