#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "dcfl/data.hpp"
#include "dcfl/network.hpp"
#include "dcfl/optimizer.hpp"

namespace dcfl::hyp {

struct ClusterRegistry {
    std::map<int, int> assignment;       // client id -> cluster id
    std::map<int, nn::ParamSet> models;  // cluster id -> forecaster params
    int next_cluster_id = 1;             // ids are allocated monotonically, never reused

    int live_cluster_count() const { return static_cast<int>(models.size()); }
    std::vector<int> cluster_ids() const;
    std::vector<int> members(int cluster_id) const;
    void validate() const;
};

struct Phase2Config {
    int hyp_rounds = 1;      // h
    int train_rounds = 100;  // l
    int local_epochs = 2;    // E2
    double ratio = 1.0;      // r'
    std::set<int> calibration_round_indices = {40, 80};
    int batch_size = 7;
    int lstm_units = 8;
    nn::OptimizerState opt_template;
    int workers = 1;

    void validate() const;
};

// Mean MSE of the model over the given (input, target) pairs.
double forecast_loss(const nn::ParamSet& model, const std::vector<data::ForecastPair>& pairs);

// Fresh forecaster models, one per distinct cluster id in `assignments`,
// each initialized from its own derived seed.
ClusterRegistry init_registry(const std::map<int, int>& assignments,
                              const data::ClientPool& pool, int lstm_units,
                              std::uint64_t seed);

// One federated training round: sample clients, each trains its own cluster's
// model E2 steps locally, server averages per cluster. Clusters with no
// participant keep their model unchanged. Never touches the assignment map.
ClusterRegistry train_cluster_round(const ClusterRegistry& reg, const data::ClientPool& pool,
                                    const std::vector<int>& client_ids,
                                    const Phase2Config& cfg, std::uint64_t seed, int round);

// Reassign every client to its lowest-loss cluster model, evaluated on the
// client's training split. Ties keep the incumbent cluster. Never mutates
// any model.
ClusterRegistry calibrate(const ClusterRegistry& reg, const data::ClientPool& pool,
                          const std::vector<int>& client_ids, int workers = 1);

// Per-round observer: (global round index, registry, weighted train loss).
using RoundObserver =
    std::function<void(int round, const ClusterRegistry& reg, double weighted_loss)>;
// Pre-round hook; may mutate the pool (environment events).
using RoundHook = std::function<void(int round, data::ClientPool& pool)>;

ClusterRegistry run_phase2(ClusterRegistry reg, data::ClientPool& pool,
                           const std::vector<int>& client_ids, const Phase2Config& cfg,
                           std::uint64_t seed, const RoundObserver& observer = nullptr,
                           const RoundHook& hook = nullptr);

// Each listed client's loss on its own cluster's model (training split).
std::map<int, double> client_losses(const ClusterRegistry& reg, const data::ClientPool& pool,
                                    const std::vector<int>& client_ids, int workers = 1);

// Weighted mean training loss across clusters, weights = member counts.
double weighted_train_loss(const ClusterRegistry& reg, const data::ClientPool& pool,
                           const std::vector<int>& client_ids, int workers = 1);

}  // namespace dcfl::hyp
