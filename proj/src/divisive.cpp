#include "dcfl/divisive.hpp"

#include <algorithm>
#include <string>

#include "dcfl/errors.hpp"

namespace dcfl::divisive {

void DivisiveConfig::validate() const {
    if (max_rounds < 1) throw StructuralError("divisive config: max_rounds must be >= 1");
    if (split_arity < 2) throw StructuralError("divisive config: split_arity must be >= 2");
    if (var_threshold < 0.0 || mean_threshold < 0.0)
        throw StructuralError("divisive config: thresholds must be non-negative");
}

ClusterLossStats cluster_loss_stats(const std::map<int, double>& losses,
                                    const hyp::ClusterRegistry& reg) {
    std::map<int, std::vector<double>> grouped;
    for (const auto& [cid, loss] : losses)
        grouped[reg.assignment.at(cid)].push_back(loss);

    ClusterLossStats stats;
    for (const auto& [kid, vals] : grouped) {
        ClusterLossStats::Entry e;
        e.member_count = static_cast<int>(vals.size());
        for (double v : vals) e.mean_loss += v;
        e.mean_loss /= e.member_count;
        for (double v : vals) {
            const double d = v - e.mean_loss;
            e.var_loss += d * d;
        }
        e.var_loss /= e.member_count;
        stats.per_cluster[kid] = e;
    }
    return stats;
}

std::optional<int> select_cluster(const ClusterLossStats& stats, const DivisiveConfig& cfg) {
    if (stats.per_cluster.empty()) throw StructuralError("select_cluster: empty stats");
    std::optional<int> best;
    double best_var = 0.0;
    for (const auto& [kid, e] : stats.per_cluster)
        if (e.var_loss > cfg.var_threshold && (!best || e.var_loss > best_var)) {
            best = kid;
            best_var = e.var_loss;
        }
    if (best) return best;
    double best_mean = 0.0;
    for (const auto& [kid, e] : stats.per_cluster)
        if (e.mean_loss > cfg.mean_threshold && (!best || e.mean_loss > best_mean)) {
            best = kid;
            best_mean = e.mean_loss;
        }
    return best;
}

namespace {

// Drop clusters that have a model but no members (ids stay retired).
void compact(hyp::ClusterRegistry& reg) {
    for (auto it = reg.models.begin(); it != reg.models.end();) {
        if (reg.members(it->first).empty())
            it = reg.models.erase(it);
        else
            ++it;
    }
}

}  // namespace

DynamicResult run_dynamic_clustering(data::ClientPool& pool, const DynamicConfig& cfg,
                                     std::uint64_t seed,
                                     const hyp::RoundObserver& observer,
                                     const hyp::RoundHook& hook) {
    cfg.divisive.validate();
    const auto all_ids = fed::all_client_ids(pool);

    DynamicResult res;

    // Divisive round 1: Phases 1 and 2 over all clients with the initial k.
    auto p1 = fed::run_phase1(pool, all_ids, cfg.latent, cfg.phase1,
                              Rng::derive(seed, "divisive-phase1", 1).next_u64());
    res.triple = p1.triple;
    res.phase1_assignments = p1.assignments;

    res.registry = hyp::init_registry(p1.assignments, pool, cfg.phase2.lstm_units,
                                      Rng::derive(seed, "divisive-models", 1).next_u64());
    res.registry = hyp::run_phase2(res.registry, pool, all_ids, cfg.phase2,
                                   Rng::derive(seed, "divisive-phase2", 1).next_u64(),
                                   observer, hook);

    for (int round = 2; round <= cfg.divisive.max_rounds; ++round) {
        compact(res.registry);
        const auto losses =
            hyp::client_losses(res.registry, pool, all_ids, cfg.phase2.workers);
        const auto stats = cluster_loss_stats(losses, res.registry);
        const auto sel = select_cluster(stats, cfg.divisive);
        if (!sel) {
            res.halted_round = round;
            break;
        }

        const auto members = res.registry.members(*sel);
        gan::LatentConfig sub_latent = cfg.latent;
        sub_latent.K = cfg.divisive.split_arity;
        fed::Phase1Config sub_p1 = cfg.phase1;
        sub_p1.rounds = cfg.phase1_rerun_rounds;

        auto sub = fed::run_phase1(pool, members, sub_latent, sub_p1,
                                   Rng::derive(seed, "divisive-phase1", round).next_u64());

        // retire the parent id, allocate fresh ids for the sub-clusters
        SplitEvent ev;
        ev.divisive_round = round;
        ev.parent_cluster = *sel;
        std::map<int, int> sub_to_global;
        for (int k = 1; k <= cfg.divisive.split_arity; ++k)
            sub_to_global[k] = res.registry.next_cluster_id++;
        for (const auto& [_, gid] : sub_to_global) ev.child_clusters.push_back(gid);
        res.splits.push_back(ev);

        res.registry.models.erase(*sel);
        std::map<int, int> sub_assignments;
        for (int cid : members)
            sub_assignments[cid] = sub_to_global.at(sub.assignments.at(cid));

        // scoped Phase 2 over the split's own registry, then merge back
        auto sub_reg =
            hyp::init_registry(sub_assignments, pool, cfg.phase2.lstm_units,
                               Rng::derive(seed, "divisive-models", round).next_u64());
        data::ClientPool& p = pool;
        sub_reg = hyp::run_phase2(sub_reg, p, members, cfg.phase2,
                                  Rng::derive(seed, "divisive-phase2", round).next_u64(),
                                  observer, nullptr);

        for (const auto& [cid, kid] : sub_reg.assignment) res.registry.assignment[cid] = kid;
        for (const auto& [kid, model] : sub_reg.models) res.registry.models[kid] = model;
        res.registry.next_cluster_id =
            std::max(res.registry.next_cluster_id, sub_reg.next_cluster_id);

        if (cfg.divisive.global_recalibration)
            res.registry = hyp::calibrate(res.registry, pool, all_ids, cfg.phase2.workers);
    }
    compact(res.registry);
    return res;
}

}  // namespace dcfl::divisive
