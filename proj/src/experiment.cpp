#include "dcfl/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dcfl/baseline.hpp"
#include "dcfl/errors.hpp"
#include "dcfl/metrics.hpp"
#include "dcfl/parallel.hpp"
#include "json.hpp"

namespace dcfl::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

data::ClientPool build_pool(const config::ExperimentConfig& cfg) {
    const bool labeled = cfg.dataset.format == "labeled";
    auto samples = data::load_dataset(cfg.dataset.path, labeled);
    const auto mode = cfg.dataset.normalization == "dataset"
                          ? data::NormalizeMode::dataset_minmax
                          : data::NormalizeMode::per_series_minmax;
    samples = data::normalize(samples, mode);

    if (cfg.dataset.layout == "samples")
        return data::partition_non_iid(samples, cfg.n_clients, cfg.split, cfg.forecast,
                                       cfg.seed);
    return data::build_per_client_pool(samples, cfg.dataset.train_len,
                                       cfg.dataset.gan_sample_len, cfg.forecast, cfg.seed);
}

bool pool_has_labels(const data::ClientPool& pool) {
    for (const auto& c : pool.clients)
        if (!c.label) return false;
    return true;
}

// sample key = client id * 1e6 + per-client sample index
int sample_key(int client_id, int idx) { return client_id * 1000000 + idx; }

std::map<int, int> sample_labels(const data::ClientPool& pool) {
    std::map<int, int> labels;
    for (const auto& c : pool.clients)
        for (std::size_t i = 0; i < c.gan_train.size(); ++i)
            labels[sample_key(c.id, static_cast<int>(i))] =
                c.gan_train[i].label.value_or(c.label.value_or(0));
    return labels;
}

std::map<int, int> client_labels(const data::ClientPool& pool) {
    std::map<int, int> labels;
    for (const auto& c : pool.clients) labels[c.id] = c.label.value_or(0);
    return labels;
}

struct ClusterEval {
    std::map<int, double> test_loss;
    std::map<int, double> train_loss;
    std::map<int, int> member_counts;
};

ClusterEval evaluate_clusters(const hyp::ClusterRegistry& reg, const data::ClientPool& pool,
                              int workers) {
    ClusterEval ev;
    const auto ids = fed::all_client_ids(pool);
    std::vector<double> test_losses(ids.size()), train_losses(ids.size());
    parallel_for(ids.size(), workers, [&](std::size_t i) {
        const auto& client = pool.client_by_id(ids[i]);
        const auto& model = reg.models.at(reg.assignment.at(ids[i]));
        test_losses[i] = hyp::forecast_loss(model, client.fc_test);
        train_losses[i] = hyp::forecast_loss(model, client.fc_train);
    });
    std::map<int, double> test_sum, train_sum;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const int kid = reg.assignment.at(ids[i]);
        test_sum[kid] += test_losses[i];
        train_sum[kid] += train_losses[i];
        ++ev.member_counts[kid];
    }
    for (const auto& [kid, n] : ev.member_counts) {
        ev.test_loss[kid] = test_sum[kid] / n;
        ev.train_loss[kid] = train_sum[kid] / n;
    }
    return ev;
}

void write_artifacts(const config::ExperimentConfig& cfg, const RunSummary& summary,
                     const metrics::RunLog& log, const hyp::ClusterRegistry& reg,
                     const std::map<int, int>& phase1_assignments) {
    fs::create_directories(cfg.out_dir);
    {
        std::ofstream out(fs::path(cfg.out_dir) / "summary.json");
        out << summary.to_json() << '\n';
    }
    log.save_jsonl((fs::path(cfg.out_dir) / "metrics.jsonl").string());
    {
        json j;
        json p1 = json::object();
        for (const auto& [cid, kid] : phase1_assignments) p1[std::to_string(cid)] = kid;
        j["phase1"] = p1;
        json fin = json::object();
        for (const auto& [cid, kid] : reg.assignment) fin[std::to_string(cid)] = kid;
        j["final"] = fin;
        std::ofstream out(fs::path(cfg.out_dir) / "assignments.json");
        out << j.dump(2) << '\n';
    }
}

}  // namespace

std::string RunSummary::to_json() const {
    json j;
    j["kind"] = kind;
    j["seed"] = seed;
    j["final_k"] = final_k;
    if (sample_purity) j["sample_purity"] = *sample_purity;
    if (client_purity) j["client_purity"] = *client_purity;
    j["weighted_test_mse"] = weighted_test_mse;
    j["weighted_train_loss"] = weighted_train_loss;
    if (overwrite_client) j["overwrite_client"] = *overwrite_client;
    if (overwrite_class) j["overwrite_class"] = *overwrite_class;
    return j.dump(2);
}

RunSummary RunSummary::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StructuralError("summary: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw StructuralError(std::string("summary: parse error: ") + e.what());
    }
    RunSummary s;
    s.kind = j.at("kind").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.final_k = j.at("final_k").get<int>();
    if (j.contains("sample_purity")) s.sample_purity = j.at("sample_purity").get<double>();
    if (j.contains("client_purity")) s.client_purity = j.at("client_purity").get<double>();
    s.weighted_test_mse = j.at("weighted_test_mse").get<double>();
    s.weighted_train_loss = j.at("weighted_train_loss").get<double>();
    if (j.contains("overwrite_client"))
        s.overwrite_client = j.at("overwrite_client").get<int>();
    if (j.contains("overwrite_class")) s.overwrite_class = j.at("overwrite_class").get<int>();
    return s;
}

RunSummary run_dynamic(const config::ExperimentConfig& cfg) {
    cfg.validate();
    auto pool = build_pool(cfg);
    const auto dyn = cfg.dynamic_config();

    metrics::RunLog log;
    int divisive_round = 0;
    int last_round = 0;
    hyp::RoundObserver observer = [&](int round, const hyp::ClusterRegistry& reg,
                                      double loss) {
        if (round <= last_round) ++divisive_round;
        if (divisive_round == 0) divisive_round = 1;
        last_round = round;
        metrics::MetricsRecord rec;
        rec.divisive_round = divisive_round;
        rec.phase = "phase2";
        rec.global_round = round;
        rec.weighted_loss = loss;
        rec.assignment_snapshot = metrics::assignment_hash(reg.assignment);
        log.record(std::move(rec));
    };

    std::optional<data::OverwriteEvent> event;
    hyp::RoundHook hook = nullptr;
    if (cfg.overwrite.enabled) {
        hook = [&cfg, &event](int round, data::ClientPool& p) {
            if (round == cfg.overwrite.round && !event) {
                Rng rng = Rng::derive(cfg.seed, "overwrite-event");
                event = data::apply_overwrite_event(p, rng);
            }
        };
    }

    auto res = divisive::run_dynamic_clustering(pool, dyn, cfg.seed, observer, hook);

    RunSummary summary;
    summary.kind = "dynamic";
    summary.seed = cfg.seed;
    summary.final_k = res.registry.live_cluster_count();
    if (event) {
        summary.overwrite_client = event->client_id;
        summary.overwrite_class = event->new_class;
    }

    if (pool_has_labels(pool)) {
        // Phase 1 sample-level purity under the initial encoder
        gan::LatentConfig latent = dyn.latent;
        std::map<int, int> assign;
        const auto per_sample = fed::infer_sample_ids(res.triple.encoder, pool,
                                                      fed::all_client_ids(pool), latent);
        for (const auto& [cid, ids] : per_sample)
            for (std::size_t i = 0; i < ids.size(); ++i)
                assign[sample_key(cid, static_cast<int>(i))] = ids[i];
        summary.sample_purity = metrics::purity(assign, sample_labels(pool));
        summary.client_purity =
            metrics::purity(res.registry.assignment, client_labels(pool));
    }

    const auto ev = evaluate_clusters(res.registry, pool, cfg.workers);
    summary.weighted_test_mse = metrics::weighted_forecast_loss(ev.test_loss, ev.member_counts);
    summary.weighted_train_loss =
        metrics::weighted_forecast_loss(ev.train_loss, ev.member_counts);

    write_artifacts(cfg, summary, log, res.registry, res.phase1_assignments);
    return summary;
}

RunSummary run_baseline(const config::ExperimentConfig& cfg) {
    cfg.validate();
    auto pool = build_pool(cfg);
    const auto ids = fed::all_client_ids(pool);

    // per-sample features, clustered on the server
    std::vector<baseline::FeatureVector> feats;
    std::vector<int> feat_keys;
    for (int id : ids) {
        const auto& c = pool.client_by_id(id);
        for (std::size_t i = 0; i < c.gan_train.size(); ++i) {
            feats.push_back(
                baseline::extract_features(c.gan_train[i], cfg.dataset.seasonal_period));
            feat_keys.push_back(sample_key(id, static_cast<int>(i)));
        }
    }
    const auto clusters = baseline::agglomerative_cluster(feats, cfg.initial_k);

    std::map<int, int> assign;
    std::map<int, std::vector<int>> per_client_ids;
    for (std::size_t i = 0; i < feats.size(); ++i) {
        assign[feat_keys[i]] = clusters[i];
        per_client_ids[feat_keys[i] / 1000000].push_back(clusters[i]);
    }

    std::map<int, int> client_assign;
    for (const auto& [cid, cl] : per_client_ids)
        client_assign[cid] = fed::majority_cluster_id(cl);

    RunSummary summary;
    summary.kind = "baseline";
    summary.seed = cfg.seed;
    if (pool_has_labels(pool)) {
        summary.sample_purity = metrics::purity(assign, sample_labels(pool));
        summary.client_purity = metrics::purity(client_assign, client_labels(pool));
    }

    // per-cluster training, no calibration
    hyp::Phase2Config p2 = cfg.phase2;
    p2.calibration_round_indices.clear();
    p2.workers = cfg.workers;
    auto reg = hyp::init_registry(client_assign, pool, p2.lstm_units,
                                  Rng::derive(cfg.seed, "baseline-models").next_u64());

    metrics::RunLog log;
    hyp::RoundObserver observer = [&](int round, const hyp::ClusterRegistry& r, double loss) {
        metrics::MetricsRecord rec;
        rec.divisive_round = 1;
        rec.phase = "phase2";
        rec.global_round = round;
        rec.weighted_loss = loss;
        rec.assignment_snapshot = metrics::assignment_hash(r.assignment);
        log.record(std::move(rec));
    };
    reg = hyp::run_phase2(reg, pool, ids, p2,
                          Rng::derive(cfg.seed, "baseline-phase2").next_u64(), observer);

    summary.final_k = reg.live_cluster_count();
    const auto ev = evaluate_clusters(reg, pool, cfg.workers);
    summary.weighted_test_mse = metrics::weighted_forecast_loss(ev.test_loss, ev.member_counts);
    summary.weighted_train_loss =
        metrics::weighted_forecast_loss(ev.train_loss, ev.member_counts);

    write_artifacts(cfg, summary, log, reg, client_assign);
    return summary;
}

void generate_dataset(const std::string& kind, const std::string& out_path,
                      const GenParams& params) {
    Rng rng = Rng::derive(params.seed, "gen-data-" + kind);
    std::vector<data::TimeSeriesSample> samples;
    if (kind == "handover") {
        const int n = params.n > 0 ? params.n : 149;
        const int len = params.length > 0 ? params.length : 1392;
        samples = data::synth_handover(n, len, params.classes, params.noise, rng);
    } else if (kind == "toy") {
        const int n = params.n > 0 ? params.n : 90;
        const int len = params.length > 0 ? params.length : 24;
        samples = data::synth_sinusoid_classes(n, len, params.classes, params.noise, rng);
    } else if (kind == "power") {
        const int n = params.n > 0 ? params.n : 1096;
        const int len = params.length > 0 ? params.length : 24;
        samples = data::synth_power_demand(n, len, rng);
    } else {
        throw StructuralError("gen-data: unknown kind '" + kind + "'");
    }
    const auto parent = fs::path(out_path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    data::save_dataset(out_path, samples, /*labeled=*/true);
}

std::string build_report(const std::vector<std::string>& run_dirs) {
    if (run_dirs.empty()) throw StructuralError("report: no run directories");
    std::vector<RunSummary> dynamic_runs, baseline_runs;
    for (const auto& dir : run_dirs) {
        auto s = RunSummary::from_json_file((fs::path(dir) / "summary.json").string());
        (s.kind == "dynamic" ? dynamic_runs : baseline_runs).push_back(std::move(s));
    }

    auto mean_std = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= v.size();
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return std::make_pair(m, std::sqrt(s / v.size()));
    };
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6f", v);
        return std::string(buf);
    };

    std::ostringstream out;
    out << "kind      runs  purity(mean)  purity(std)  test_mse(mean)  test_mse(std)\n";
    auto emit = [&](const char* name, const std::vector<RunSummary>& runs) {
        if (runs.empty()) return;
        std::vector<double> pur, mse;
        for (const auto& r : runs) {
            if (r.sample_purity) pur.push_back(*r.sample_purity);
            mse.push_back(r.weighted_test_mse);
        }
        out << name << "  " << runs.size() << "  ";
        if (!pur.empty()) {
            auto [pm, ps] = mean_std(pur);
            out << fmt(pm) << "  " << (runs.size() > 1 ? fmt(ps) : std::string("-")) << "  ";
        } else {
            out << "-  -  ";
        }
        auto [mm, ms] = mean_std(mse);
        out << fmt(mm) << "  " << (runs.size() > 1 ? fmt(ms) : std::string("-")) << "\n";
    };
    emit("dynamic ", dynamic_runs);
    emit("baseline", baseline_runs);

    if (!dynamic_runs.empty() && !baseline_runs.empty()) {
        std::vector<double> dyn, base;
        for (const auto& r : dynamic_runs) dyn.push_back(r.weighted_test_mse);
        for (const auto& r : baseline_runs) base.push_back(r.weighted_test_mse);
        const double dm = mean_std(dyn).first;
        const double bm = mean_std(base).first;
        if (bm != 0.0)
            out << "improvement_pct " << fmt((bm - dm) / bm * 100.0) << "\n";
    }
    return out.str();
}

}  // namespace dcfl::experiment
