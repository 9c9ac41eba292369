#include "dcfl/hypcluster.hpp"

#include <algorithm>
#include <string>

#include "dcfl/errors.hpp"
#include "dcfl/fedsim.hpp"
#include "dcfl/losses.hpp"
#include "dcfl/parallel.hpp"

namespace dcfl::hyp {

std::vector<int> ClusterRegistry::cluster_ids() const {
    std::vector<int> ids;
    for (const auto& [id, _] : models) ids.push_back(id);
    return ids;
}

std::vector<int> ClusterRegistry::members(int cluster_id) const {
    std::vector<int> out;
    for (const auto& [cid, kid] : assignment)
        if (kid == cluster_id) out.push_back(cid);
    return out;
}

void ClusterRegistry::validate() const {
    for (const auto& [cid, kid] : assignment)
        if (!models.count(kid))
            throw StructuralError("registry: client " + std::to_string(cid) +
                                  " assigned to cluster " + std::to_string(kid) +
                                  " which has no model");
}

void Phase2Config::validate() const {
    if (hyp_rounds < 1 || train_rounds < 1 || local_epochs < 1)
        throw StructuralError("phase2 config: h, l, E2 must be >= 1");
    for (int i : calibration_round_indices)
        if (i < 1 || i > train_rounds)
            throw StructuralError("phase2 config: calibration index " + std::to_string(i) +
                                  " outside [1, l]");
}

double forecast_loss(const nn::ParamSet& model, const std::vector<data::ForecastPair>& pairs) {
    if (pairs.empty()) throw StructuralError("forecast_loss: no pairs");
    double s = 0.0;
    for (const auto& p : pairs)
        s += nn::mse_loss(nn::forward(model, p.input), p.target);
    return s / static_cast<double>(pairs.size());
}

ClusterRegistry init_registry(const std::map<int, int>& assignments,
                              const data::ClientPool& pool, int lstm_units,
                              std::uint64_t seed) {
    if (assignments.empty()) throw StructuralError("init_registry: empty assignments");
    // forecaster shape comes from the pool's (input, target) pair widths
    const auto& any_client = pool.client_by_id(assignments.begin()->first);
    if (any_client.fc_train.empty())
        throw StructuralError("init_registry: client has no forecast pairs");
    const int n_in = static_cast<int>(any_client.fc_train.front().input.size());
    const int n_out = static_cast<int>(any_client.fc_train.front().target.size());

    ClusterRegistry reg;
    reg.assignment = assignments;
    for (const auto& [cid, kid] : assignments) {
        (void)cid;
        if (!reg.models.count(kid)) {
            Rng rng = Rng::derive(seed, "cluster-model-init", kid);
            reg.models[kid] =
                nn::init_params(nn::lstm_forecaster(n_in, lstm_units, n_out), rng);
            reg.next_cluster_id = std::max(reg.next_cluster_id, kid + 1);
        }
    }
    return reg;
}

namespace {

nn::ParamSet local_train(const nn::ParamSet& model, const data::Client& client,
                         const Phase2Config& cfg, Rng& rng) {
    nn::ParamSet cur = model;
    nn::OptimizerState opt = cfg.opt_template;
    const int n = static_cast<int>(client.fc_train.size());
    const int B = std::max(1, std::min(cfg.batch_size, n));
    for (int step = 0; step < cfg.local_epochs; ++step) {
        nn::Gradients grads;
        grads.values.assign(cur.values.size(), 0.0);
        for (int b = 0; b < B; ++b) {
            const auto& pair = client.fc_train[rng.uniform_int(0, n - 1)];
            const auto pred = nn::forward(cur, pair.input);
            const auto up = nn::mse_grad(pred, pair.target);
            const auto back = nn::backward(cur, pair.input, up);
            for (std::size_t i = 0; i < grads.values.size(); ++i)
                grads.values[i] += back.param_grads.values[i] / B;
        }
        cur = nn::optimizer_step(opt, cur, grads);
    }
    return cur;
}

}  // namespace

ClusterRegistry train_cluster_round(const ClusterRegistry& reg, const data::ClientPool& pool,
                                    const std::vector<int>& client_ids,
                                    const Phase2Config& cfg, std::uint64_t seed, int round) {
    reg.validate();
    Rng sample_rng = Rng::derive(seed, "phase2-sample", round);
    const auto sampled = fed::sample_clients(client_ids, cfg.ratio, sample_rng);
    for (int id : sampled)
        if (!reg.assignment.count(id))
            throw StructuralError("train_cluster_round: client " + std::to_string(id) +
                                  " has no cluster assignment");

    std::vector<nn::ParamSet> locals(sampled.size());
    std::vector<std::size_t> weights(sampled.size());
    parallel_for(sampled.size(), cfg.workers, [&](std::size_t i) {
        const auto& client = pool.client_by_id(sampled[i]);
        const int kid = reg.assignment.at(sampled[i]);
        Rng rng = Rng::derive(seed, "phase2-local",
                              static_cast<std::uint64_t>(round) * 1000003ull +
                                  static_cast<std::uint64_t>(client.id));
        try {
            locals[i] = local_train(reg.models.at(kid), client, cfg, rng);
        } catch (const NumericError& err) {
            throw NumericError("phase2 round " + std::to_string(round) + " client " +
                               std::to_string(client.id) + " cluster " +
                               std::to_string(kid) + ": " + err.what());
        }
        weights[i] = client.fc_train.size();
    });

    ClusterRegistry out = reg;
    for (int kid : reg.cluster_ids()) {
        std::vector<nn::ParamSet> parts;
        std::vector<std::size_t> w;
        for (std::size_t i = 0; i < sampled.size(); ++i)
            if (reg.assignment.at(sampled[i]) == kid) {
                parts.push_back(locals[i]);
                w.push_back(weights[i]);
            }
        if (!parts.empty()) out.models[kid] = fed::fedavg(parts, w);
        // no participant: model stays bitwise unchanged
    }
    return out;
}

ClusterRegistry calibrate(const ClusterRegistry& reg, const data::ClientPool& pool,
                          const std::vector<int>& client_ids, int workers) {
    reg.validate();
    const auto kids = reg.cluster_ids();
    if (kids.size() <= 1) return reg;

    std::vector<int> new_assignment(client_ids.size());
    parallel_for(client_ids.size(), workers, [&](std::size_t i) {
        const auto& client = pool.client_by_id(client_ids[i]);
        const int incumbent = reg.assignment.at(client_ids[i]);
        int best = -1;
        double best_loss = 0.0;
        for (int kid : kids) {
            const double loss = forecast_loss(reg.models.at(kid), client.fc_train);
            if (best < 0 || loss < best_loss ||
                (loss == best_loss && kid == incumbent && best != incumbent)) {
                best = kid;
                best_loss = loss;
            }
        }
        new_assignment[i] = best;
    });

    ClusterRegistry out = reg;
    for (std::size_t i = 0; i < client_ids.size(); ++i)
        out.assignment[client_ids[i]] = new_assignment[i];
    return out;
}

ClusterRegistry run_phase2(ClusterRegistry reg, data::ClientPool& pool,
                           const std::vector<int>& client_ids, const Phase2Config& cfg,
                           std::uint64_t seed, const RoundObserver& observer,
                           const RoundHook& hook) {
    cfg.validate();
    reg.validate();
    int global_round = 0;
    for (int h = 1; h <= cfg.hyp_rounds; ++h) {
        for (int l = 1; l <= cfg.train_rounds; ++l) {
            ++global_round;
            if (hook) hook(global_round, pool);
            reg = train_cluster_round(reg, pool, client_ids, cfg, seed, global_round);
            if (cfg.calibration_round_indices.count(l))
                reg = calibrate(reg, pool, client_ids, cfg.workers);
            if (observer)
                observer(global_round, reg,
                         weighted_train_loss(reg, pool, client_ids, cfg.workers));
        }
    }
    return reg;
}

std::map<int, double> client_losses(const ClusterRegistry& reg, const data::ClientPool& pool,
                                    const std::vector<int>& client_ids, int workers) {
    std::vector<double> losses(client_ids.size());
    parallel_for(client_ids.size(), workers, [&](std::size_t i) {
        const auto& client = pool.client_by_id(client_ids[i]);
        losses[i] = forecast_loss(reg.models.at(reg.assignment.at(client_ids[i])),
                                  client.fc_train);
    });
    std::map<int, double> out;
    for (std::size_t i = 0; i < client_ids.size(); ++i) out[client_ids[i]] = losses[i];
    return out;
}

double weighted_train_loss(const ClusterRegistry& reg, const data::ClientPool& pool,
                           const std::vector<int>& client_ids, int workers) {
    const auto losses = client_losses(reg, pool, client_ids, workers);
    std::map<int, double> cluster_sum;
    std::map<int, int> cluster_n;
    for (const auto& [cid, loss] : losses) {
        const int kid = reg.assignment.at(cid);
        cluster_sum[kid] += loss;
        ++cluster_n[kid];
    }
    double acc = 0.0;
    int total = 0;
    for (const auto& [kid, n] : cluster_n) total += n;
    for (const auto& [kid, n] : cluster_n)
        acc += (static_cast<double>(n) / total) * (cluster_sum[kid] / n);
    return acc;
}

}  // namespace dcfl::hyp
