#include "dcfl/config.hpp"

#include <fstream>
#include <sstream>

#include "dcfl/errors.hpp"
#include "json.hpp"

namespace dcfl::config {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) {
                ok = true;
                break;
            }
        if (!ok) throw StructuralError("config: unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

nn::OptimizerState parse_optimizer(const json& j, const std::string& where,
                                   nn::OptimizerState base) {
    check_keys(j, where,
               {"kind", "learning_rate", "rmsprop_decay", "rmsprop_epsilon", "l2"});
    if (j.contains("kind")) {
        const std::string k = j.at("kind").get<std::string>();
        if (k == "sgd")
            base.kind = nn::OptimizerKind::sgd;
        else if (k == "rmsprop")
            base.kind = nn::OptimizerKind::rmsprop;
        else
            throw StructuralError("config: unknown optimizer kind '" + k + "' in " + where);
    }
    get_if(j, "learning_rate", base.learning_rate);
    get_if(j, "rmsprop_decay", base.rmsprop_decay);
    get_if(j, "rmsprop_epsilon", base.rmsprop_epsilon);
    get_if(j, "l2", base.l2_coefficient);
    if (base.learning_rate < 0.0)
        throw StructuralError("config: learning_rate must be non-negative in " + where);
    if (base.rmsprop_decay <= 0.0 || base.rmsprop_decay >= 1.0)
        throw StructuralError("config: rmsprop_decay must lie in (0,1) in " + where);
    if (base.l2_coefficient < 0.0)
        throw StructuralError("config: l2 must be non-negative in " + where);
    return base;
}

}  // namespace

divisive::DynamicConfig ExperimentConfig::dynamic_config() const {
    divisive::DynamicConfig d;
    d.divisive = divisive_cfg;
    d.latent = latent;
    d.latent.K = initial_k;
    d.phase1 = phase1;
    d.phase1.workers = workers;
    d.phase1_rerun_rounds = phase1_rerun_rounds;
    d.phase2 = phase2;
    d.phase2.workers = workers;
    return d;
}

void ExperimentConfig::validate() const {
    if (n_clients < 1) throw StructuralError("config: n_clients must be positive");
    if (initial_k < 1) throw StructuralError("config: initial_k must be positive");
    if (phase1.rounds < 0) throw StructuralError("config: phase1 rounds must be >= 0");
    if (workers < 1) throw StructuralError("config: workers must be >= 1");
    if (dataset.format != "labeled" && dataset.format != "matrix")
        throw StructuralError("config: dataset.format must be 'labeled' or 'matrix'");
    if (dataset.layout != "samples" && dataset.layout != "per_client")
        throw StructuralError("config: dataset.layout must be 'samples' or 'per_client'");
    if (dataset.normalization != "dataset" && dataset.normalization != "per_series")
        throw StructuralError(
            "config: dataset.normalization must be 'dataset' or 'per_series'");
    gan::LatentConfig l = latent;
    l.K = initial_k;
    l.validate();
    hyp::Phase2Config p2 = phase2;
    p2.validate();
    divisive_cfg.validate();
    split.validate();
}

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig c;
    c.phase2.opt_template.kind = nn::OptimizerKind::rmsprop;
    c.phase2.opt_template.learning_rate = 0.001;
    c.phase2.opt_template.l2_coefficient = 0.0005;
    c.phase1.opt_template.kind = nn::OptimizerKind::rmsprop;
    c.phase1.opt_template.learning_rate = 0.001;

    if (name == "paper") {
        c.phase1.rounds = 50000;
        c.phase1_rerun_rounds = 25000;
        c.phase2.train_rounds = 100;
        c.phase2.local_epochs = 2;
        c.phase2.calibration_round_indices = {40, 80};
        c.phase2.batch_size = 7;
        c.phase2.lstm_units = 8;
        c.divisive_cfg.max_rounds = 1;
        c.divisive_cfg.var_threshold = 1e-6;
        c.divisive_cfg.mean_threshold = 1e-2;
    } else if (name == "desk") {
        c.phase1.rounds = 2000;
        c.phase1_rerun_rounds = 1000;
        c.phase2.train_rounds = 40;
        c.phase2.local_epochs = 2;
        c.phase2.calibration_round_indices = {16, 32};
        c.phase2.batch_size = 7;
        c.phase2.lstm_units = 8;
        c.divisive_cfg.max_rounds = 1;
        c.divisive_cfg.var_threshold = 1e-6;
        c.divisive_cfg.mean_threshold = 1e-2;
        c.latent.d_n = 10;
    } else {
        throw StructuralError("config: unknown preset '" + name + "'");
    }
    return c;
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw StructuralError(std::string("config: parse error: ") + e.what());
    }

    check_keys(j, "root",
               {"preset", "dataset", "n_clients", "initial_k", "latent", "phase1",
                "phase2", "divisive", "forecast", "split", "overwrite_event", "seed",
                "out_dir", "workers"});

    std::string preset_name = "desk";
    get_if(j, "preset", preset_name);
    ExperimentConfig c = preset(preset_name);

    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        check_keys(d, "dataset",
                   {"path", "format", "layout", "normalization", "seasonal_period",
                    "train_len", "gan_sample_len"});
        get_if(d, "path", c.dataset.path);
        get_if(d, "format", c.dataset.format);
        get_if(d, "layout", c.dataset.layout);
        get_if(d, "normalization", c.dataset.normalization);
        get_if(d, "seasonal_period", c.dataset.seasonal_period);
        get_if(d, "train_len", c.dataset.train_len);
        get_if(d, "gan_sample_len", c.dataset.gan_sample_len);
    }
    get_if(j, "n_clients", c.n_clients);
    get_if(j, "initial_k", c.initial_k);

    if (j.contains("latent")) {
        const auto& l = j.at("latent");
        check_keys(l, "latent", {"d_n", "sigma", "beta_n", "beta_c", "quality", "clip"});
        get_if(l, "d_n", c.latent.d_n);
        get_if(l, "sigma", c.latent.sigma);
        get_if(l, "beta_n", c.latent.beta_n);
        get_if(l, "beta_c", c.latent.beta_c);
        get_if(l, "clip", c.latent.clip);
        if (l.contains("quality")) {
            const std::string q = l.at("quality").get<std::string>();
            if (q == "vanilla")
                c.latent.quality = gan::GanQuality::vanilla;
            else if (q == "wasserstein")
                c.latent.quality = gan::GanQuality::wasserstein;
            else
                throw StructuralError("config: latent.quality must be 'vanilla' or "
                                      "'wasserstein'");
        }
    }

    if (j.contains("phase1")) {
        const auto& p = j.at("phase1");
        check_keys(p, "phase1",
                   {"rounds", "rerun_rounds", "ratio", "local_epochs", "batch_size",
                    "hidden", "optimizer"});
        get_if(p, "rounds", c.phase1.rounds);
        get_if(p, "rerun_rounds", c.phase1_rerun_rounds);
        get_if(p, "ratio", c.phase1.ratio);
        get_if(p, "local_epochs", c.phase1.local_epochs);
        get_if(p, "batch_size", c.phase1.batch_size);
        get_if(p, "hidden", c.phase1.hidden);
        if (p.contains("optimizer"))
            c.phase1.opt_template =
                parse_optimizer(p.at("optimizer"), "phase1.optimizer", c.phase1.opt_template);
    }

    if (j.contains("phase2")) {
        const auto& p = j.at("phase2");
        check_keys(p, "phase2",
                   {"hyp_rounds", "train_rounds", "local_epochs", "ratio",
                    "calibration_rounds", "batch_size", "lstm_units", "optimizer"});
        get_if(p, "hyp_rounds", c.phase2.hyp_rounds);
        get_if(p, "train_rounds", c.phase2.train_rounds);
        get_if(p, "local_epochs", c.phase2.local_epochs);
        get_if(p, "ratio", c.phase2.ratio);
        if (p.contains("calibration_rounds")) {
            c.phase2.calibration_round_indices.clear();
            for (int r : p.at("calibration_rounds").get<std::vector<int>>())
                c.phase2.calibration_round_indices.insert(r);
        }
        get_if(p, "batch_size", c.phase2.batch_size);
        get_if(p, "lstm_units", c.phase2.lstm_units);
        if (p.contains("optimizer"))
            c.phase2.opt_template =
                parse_optimizer(p.at("optimizer"), "phase2.optimizer", c.phase2.opt_template);
    }

    if (j.contains("divisive")) {
        const auto& d = j.at("divisive");
        check_keys(d, "divisive",
                   {"max_rounds", "split_arity", "var_threshold", "mean_threshold",
                    "global_recalibration"});
        get_if(d, "max_rounds", c.divisive_cfg.max_rounds);
        get_if(d, "split_arity", c.divisive_cfg.split_arity);
        get_if(d, "var_threshold", c.divisive_cfg.var_threshold);
        get_if(d, "mean_threshold", c.divisive_cfg.mean_threshold);
        get_if(d, "global_recalibration", c.divisive_cfg.global_recalibration);
    }

    if (j.contains("forecast")) {
        const auto& f = j.at("forecast");
        check_keys(f, "forecast", {"input_frac", "window_len", "window_shift"});
        get_if(f, "input_frac", c.forecast.input_frac);
        if (f.contains("window_len")) {
            const int w = f.at("window_len").get<int>();
            if (w > 0) c.forecast.window_len = w;
        }
        get_if(f, "window_shift", c.forecast.window_shift);
    }

    if (j.contains("split")) {
        const auto& s = j.at("split");
        check_keys(s, "split", {"train_frac", "overwrite_frac", "test_frac"});
        get_if(s, "train_frac", c.split.train_frac);
        get_if(s, "overwrite_frac", c.split.overwrite_frac);
        get_if(s, "test_frac", c.split.test_frac);
    }

    if (j.contains("overwrite_event")) {
        const auto& o = j.at("overwrite_event");
        check_keys(o, "overwrite_event", {"enabled", "round"});
        get_if(o, "enabled", c.overwrite.enabled);
        get_if(o, "round", c.overwrite.round);
    }

    get_if(j, "seed", c.seed);
    get_if(j, "out_dir", c.out_dir);
    get_if(j, "workers", c.workers);

    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StructuralError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace dcfl::config
