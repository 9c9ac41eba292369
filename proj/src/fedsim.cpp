#include "dcfl/fedsim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dcfl/errors.hpp"
#include "dcfl/parallel.hpp"

namespace dcfl::fed {

std::vector<int> all_client_ids(const data::ClientPool& pool) {
    std::vector<int> ids;
    ids.reserve(pool.clients.size());
    for (const auto& c : pool.clients) ids.push_back(c.id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<int> sample_clients(const std::vector<int>& client_ids, double ratio, Rng& rng) {
    if (client_ids.empty()) throw StructuralError("sample_clients: empty pool");
    const int n = static_cast<int>(client_ids.size());
    const int m = std::max(static_cast<int>(std::floor(n * ratio)), 1);
    std::vector<int> ids = client_ids;
    std::sort(ids.begin(), ids.end());
    if (m >= n) return ids;
    // partial Fisher-Yates
    for (int i = 0; i < m; ++i) {
        const int j = rng.uniform_int(i, n - 1);
        std::swap(ids[i], ids[j]);
    }
    ids.resize(m);
    std::sort(ids.begin(), ids.end());
    return ids;
}

nn::ParamSet fedavg(const std::vector<nn::ParamSet>& param_sets,
                    const std::vector<std::size_t>& weights) {
    if (param_sets.empty()) throw StructuralError("fedavg: no participants");
    if (param_sets.size() != weights.size())
        throw StructuralError("fedavg: weight count mismatch");
    const auto& first = param_sets.front();
    double total = 0.0;
    for (std::size_t w : weights) {
        if (w == 0) throw StructuralError("fedavg: zero weight");
        total += static_cast<double>(w);
    }
    nn::ParamSet out;
    out.arch = first.arch;
    out.values.assign(first.values.size(), 0.0);
    for (std::size_t p = 0; p < param_sets.size(); ++p) {
        if (param_sets[p].arch != first.arch ||
            param_sets[p].values.size() != first.values.size())
            throw StructuralError("fedavg: shape mismatch at participant " +
                                  std::to_string(p));
        const double w = static_cast<double>(weights[p]) / total;
        for (std::size_t i = 0; i < out.values.size(); ++i)
            out.values[i] += w * param_sets[p].values[i];
    }
    return out;
}

int majority_cluster_id(const std::vector<int>& ids) {
    if (ids.empty()) throw StructuralError("majority_cluster_id: empty");
    std::map<int, int> counts;
    for (int id : ids) ++counts[id];
    int best_id = counts.begin()->first;
    int best_n = counts.begin()->second;
    for (const auto& [id, n] : counts)
        if (n > best_n) {  // map iteration is ascending, ties keep smaller id
            best_id = id;
            best_n = n;
        }
    return best_id;
}

Phase1Result run_phase1(const data::ClientPool& pool, const std::vector<int>& client_ids,
                        const gan::LatentConfig& latent, const Phase1Config& cfg,
                        std::uint64_t seed) {
    if (client_ids.empty()) throw StructuralError("run_phase1: no clients");
    for (int id : client_ids)
        if (pool.client_by_id(id).gan_train.empty())
            throw StructuralError("run_phase1: client " + std::to_string(id) +
                                  " has no training samples");

    const int data_dim =
        static_cast<int>(pool.client_by_id(client_ids.front()).gan_train.front().values.size());

    Rng init_rng = Rng::derive(seed, "phase1-init");
    gan::GanTriple triple = gan::init_triple(latent, data_dim, cfg.hidden, init_rng);

    for (int round = 1; round <= cfg.rounds; ++round) {
        Rng sample_rng = Rng::derive(seed, "phase1-sample", round);
        const auto sampled = sample_clients(client_ids, cfg.ratio, sample_rng);

        std::vector<gan::GanTriple> locals(sampled.size());
        std::vector<std::size_t> weights(sampled.size());
        parallel_for(sampled.size(), cfg.workers, [&](std::size_t i) {
            const auto& client = pool.client_by_id(sampled[i]);
            Rng rng = Rng::derive(seed, "phase1-local",
                                  static_cast<std::uint64_t>(round) * 1000003ull +
                                      static_cast<std::uint64_t>(client.id));
            gan::GanOptState opt{cfg.opt_template, cfg.opt_template, cfg.opt_template};
            gan::GanTriple local = triple;
            try {
                for (int e = 0; e < cfg.local_epochs; ++e)
                    local = gan::local_gan_step(local, client.gan_train, latent, opt, rng,
                                                cfg.batch_size);
            } catch (const NumericError& err) {
                throw NumericError("phase1 round " + std::to_string(round) + " client " +
                                   std::to_string(client.id) + ": " + err.what());
            }
            locals[i] = std::move(local);
            weights[i] = client.gan_train.size();
        });

        std::vector<nn::ParamSet> gs, es, ds;
        for (auto& l : locals) {
            gs.push_back(std::move(l.generator));
            es.push_back(std::move(l.encoder));
            ds.push_back(std::move(l.discriminator));
        }
        triple.generator = fedavg(gs, weights);
        triple.encoder = fedavg(es, weights);
        triple.discriminator = fedavg(ds, weights);
    }

    Phase1Result res;
    res.triple = std::move(triple);
    const auto per_sample = infer_sample_ids(res.triple.encoder, pool, client_ids, latent);
    for (const auto& [cid, ids] : per_sample)
        res.assignments[cid] = majority_cluster_id(ids);
    return res;
}

std::map<int, std::vector<int>> infer_sample_ids(const nn::ParamSet& encoder,
                                                 const data::ClientPool& pool,
                                                 const std::vector<int>& client_ids,
                                                 const gan::LatentConfig& latent) {
    std::map<int, std::vector<int>> out;
    for (int id : client_ids) {
        const auto& client = pool.client_by_id(id);
        std::vector<int> ids;
        ids.reserve(client.gan_train.size());
        for (const auto& s : client.gan_train)
            ids.push_back(gan::infer_cluster(encoder, s, latent));
        out[id] = std::move(ids);
    }
    return out;
}

}  // namespace dcfl::fed
