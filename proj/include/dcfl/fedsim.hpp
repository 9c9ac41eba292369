#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "dcfl/clustergan.hpp"
#include "dcfl/data.hpp"
#include "dcfl/network.hpp"
#include "dcfl/optimizer.hpp"

namespace dcfl::fed {

struct Phase1Config {
    int rounds = 50000;
    double ratio = 1.0;      // client sampling ratio r
    int local_epochs = 1;    // E1
    int batch_size = 32;
    std::vector<int> hidden = {64, 64};
    nn::OptimizerState opt_template;
    int workers = 1;
};

struct Phase1Result {
    gan::GanTriple triple;
    std::map<int, int> assignments;  // client id -> 1-based cluster id
};

// m = max(floor(n * ratio), 1) ids drawn uniformly without replacement,
// returned in ascending id order.
std::vector<int> sample_clients(const std::vector<int>& client_ids, double ratio, Rng& rng);

// Elementwise weighted mean, weights proportional to sample counts.
nn::ParamSet fedavg(const std::vector<nn::ParamSet>& param_sets,
                    const std::vector<std::size_t>& weights);

// Mode; ties broken toward the smallest id.
int majority_cluster_id(const std::vector<int>& ids);

// Federated ClusterGAN training over the given clients followed by per-client
// majority cluster inference.
Phase1Result run_phase1(const data::ClientPool& pool, const std::vector<int>& client_ids,
                        const gan::LatentConfig& latent, const Phase1Config& cfg,
                        std::uint64_t seed);

// Per-sample inferred cluster ids for every listed client, for purity scoring.
std::map<int, std::vector<int>> infer_sample_ids(const nn::ParamSet& encoder,
                                                 const data::ClientPool& pool,
                                                 const std::vector<int>& client_ids,
                                                 const gan::LatentConfig& latent);

std::vector<int> all_client_ids(const data::ClientPool& pool);

}  // namespace dcfl::fed
