#include "dcfl/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "dcfl/errors.hpp"

namespace dcfl::data {

void SplitSpec::validate() const {
    if (std::abs(train_frac + overwrite_frac + test_frac - 1.0) > 1e-9)
        throw StructuralError("split fractions must sum to 1");
    if (train_frac <= 0.0 || overwrite_frac < 0.0 || test_frac < 0.0)
        throw StructuralError("split fractions out of range");
}

std::size_t ClientPool::total_gan_samples() const {
    std::size_t n = 0;
    for (const auto& c : clients) n += c.gan_train.size();
    return n;
}

const Client& ClientPool::client_by_id(int id) const {
    for (const auto& c : clients)
        if (c.id == id) return c;
    throw StructuralError("unknown client id " + std::to_string(id));
}

Client& ClientPool::client_by_id(int id) {
    return const_cast<Client&>(static_cast<const ClientPool&>(*this).client_by_id(id));
}

std::vector<TimeSeriesSample> load_dataset(const std::string& path, bool labeled) {
    std::ifstream in(path);
    if (!in) throw StructuralError("cannot open dataset file: " + path);

    std::vector<TimeSeriesSample> out;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
        std::stringstream ss(line);
        std::string field;
        TimeSeriesSample s;
        bool first = true;
        while (std::getline(ss, field, delim)) {
            std::size_t pos = 0;
            double v;
            try {
                v = std::stod(field, &pos);
            } catch (const std::exception&) {
                throw StructuralError("non-numeric field at line " + std::to_string(lineno));
            }
            if (pos != field.size())
                throw StructuralError("non-numeric field at line " + std::to_string(lineno));
            if (first && labeled) {
                s.label = static_cast<int>(std::llround(v));
            } else {
                s.values.push_back(v);
            }
            first = false;
        }
        if (s.values.empty())
            throw StructuralError("empty series at line " + std::to_string(lineno));
        if (width == 0) width = s.values.size();
        if (s.values.size() != width)
            throw StructuralError("ragged row at line " + std::to_string(lineno) +
                                  ": expected " + std::to_string(width) + " values");
        out.push_back(std::move(s));
    }
    if (out.empty()) throw StructuralError("empty dataset file: " + path);
    return out;
}

void save_dataset(const std::string& path, const std::vector<TimeSeriesSample>& samples,
                  bool labeled) {
    std::ofstream out(path);
    if (!out) throw StructuralError("cannot write dataset file: " + path);
    char buf[64];
    for (const auto& s : samples) {
        bool first = true;
        if (labeled) {
            out << s.label.value_or(0);
            first = false;
        }
        for (double v : s.values) {
            if (!first) out << ',';
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << buf;
            first = false;
        }
        out << '\n';
    }
}

std::vector<TimeSeriesSample> normalize(std::vector<TimeSeriesSample> samples,
                                        NormalizeMode mode) {
    if (samples.empty()) throw StructuralError("normalize: no samples");
    auto scale = [](std::vector<double>& v, double lo, double hi) {
        if (hi <= lo) {
            std::fill(v.begin(), v.end(), 0.5);  // constant series convention
            return;
        }
        const double span = hi - lo;
        for (double& x : v) x = (x - lo) / span;
    };
    if (mode == NormalizeMode::dataset_minmax) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& s : samples)
            for (double v : s.values) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        for (auto& s : samples) scale(s.values, lo, hi);
    } else {
        for (auto& s : samples) {
            const auto [mn, mx] = std::minmax_element(s.values.begin(), s.values.end());
            scale(s.values, *mn, *mx);
        }
    }
    return samples;
}

std::vector<TimeSeriesSample> window_augment(const TimeSeriesSample& series, int window_len,
                                             int shift) {
    const int len = static_cast<int>(series.values.size());
    if (window_len <= 0 || shift <= 0)
        throw StructuralError("window_augment: window_len and shift must be positive");
    if (window_len > len)
        throw StructuralError("window_augment: window longer than series");
    std::vector<TimeSeriesSample> out;
    for (int start = 0; start + window_len <= len; start += shift) {
        TimeSeriesSample w;
        w.values.assign(series.values.begin() + start,
                        series.values.begin() + start + window_len);
        w.label = series.label;
        w.origin_client = series.origin_client;
        out.push_back(std::move(w));
    }
    return out;
}

std::vector<ForecastPair> forecast_pairs(const std::vector<TimeSeriesSample>& samples,
                                         const ForecastSpec& spec) {
    std::vector<ForecastPair> out;
    for (const auto& s : samples) {
        std::vector<TimeSeriesSample> units;
        if (spec.window_len) {
            if (*spec.window_len > static_cast<int>(s.values.size())) continue;
            units = window_augment(s, *spec.window_len, spec.window_shift);
        } else {
            units.push_back(s);
        }
        for (const auto& u : units) {
            const int len = static_cast<int>(u.values.size());
            const int n_in = static_cast<int>(std::floor(spec.input_frac * len));
            if (n_in < 1 || n_in >= len)
                throw StructuralError("forecast_pairs: degenerate input/target split");
            ForecastPair p;
            p.input.assign(u.values.begin(), u.values.begin() + n_in);
            p.target.assign(u.values.begin() + n_in, u.values.end());
            out.push_back(std::move(p));
        }
    }
    return out;
}

void rebuild_forecast_pairs(ClientPool& pool) {
    for (auto& c : pool.clients) {
        c.fc_train = forecast_pairs(c.train, pool.forecast);
        c.fc_test = forecast_pairs(c.test, pool.forecast);
    }
}

ClientPool partition_non_iid(const std::vector<TimeSeriesSample>& samples, int n_clients,
                             const SplitSpec& split, const ForecastSpec& forecast,
                             std::uint64_t root_seed) {
    split.validate();
    if (samples.empty()) throw StructuralError("partition_non_iid: no samples");

    std::map<int, std::vector<TimeSeriesSample>> by_class;
    for (const auto& s : samples) {
        if (!s.label) throw StructuralError("partition_non_iid: unlabeled sample");
        by_class[*s.label].push_back(s);
    }
    const int n_classes = static_cast<int>(by_class.size());
    if (n_clients < n_classes)
        throw StructuralError("partition_non_iid: fewer clients than classes");

    std::vector<int> classes;
    for (const auto& [cls, _] : by_class) classes.push_back(cls);

    ClientPool pool;
    pool.forecast = forecast;
    pool.split = split;
    pool.clients.resize(n_clients);
    for (int i = 0; i < n_clients; ++i) {
        pool.clients[i].id = i;
        pool.clients[i].label = classes[i % n_classes];
        pool.clients[i].seed = Rng::derive(root_seed, "client-seed", i).next_u64();
    }

    // samples of class k go round-robin to the clients assigned class k
    for (int k = 0; k < n_classes; ++k) {
        std::vector<int> owners;
        for (int i = 0; i < n_clients; ++i)
            if (i % n_classes == k) owners.push_back(i);
        auto& pile = by_class[classes[k]];
        // deterministic shuffle so split partitions are not input-order biased
        Rng rng = Rng::derive(root_seed, "partition-shuffle", k);
        std::shuffle(pile.begin(), pile.end(), rng.engine());

        std::vector<std::vector<TimeSeriesSample>> dealt(owners.size());
        for (std::size_t i = 0; i < pile.size(); ++i)
            dealt[i % owners.size()].push_back(pile[i]);

        for (std::size_t oi = 0; oi < owners.size(); ++oi) {
            Client& c = pool.clients[owners[oi]];
            auto& mine = dealt[oi];
            const int n = static_cast<int>(mine.size());
            const int n_train = static_cast<int>(std::floor(split.train_frac * n));
            const int n_ow = static_cast<int>(std::floor(split.overwrite_frac * n));
            if (n == 0 || n_train == 0)
                throw StructuralError("partition_non_iid: class " +
                                      std::to_string(classes[k]) +
                                      " has too few samples for client " +
                                      std::to_string(c.id));
            for (int i = 0; i < n; ++i) {
                mine[i].origin_client = c.id;
                if (i < n_train)
                    c.train.push_back(mine[i]);
                else if (i < n_train + n_ow)
                    pool.overwrite_store[classes[k]].push_back(mine[i]);
                else
                    c.test.push_back(mine[i]);
            }
            c.gan_train = c.train;
        }
    }
    rebuild_forecast_pairs(pool);
    return pool;
}

ClientPool build_per_client_pool(const std::vector<TimeSeriesSample>& series,
                                 int train_len, int gan_sample_len,
                                 const ForecastSpec& forecast, std::uint64_t root_seed) {
    if (series.empty()) throw StructuralError("build_per_client_pool: no series");
    ClientPool pool;
    pool.forecast = forecast;
    pool.clients.resize(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        Client& c = pool.clients[i];
        c.id = static_cast<int>(i);
        c.label = series[i].label;
        c.seed = Rng::derive(root_seed, "client-seed", i).next_u64();
        const auto& v = series[i].values;
        if (train_len <= 0 || train_len >= static_cast<int>(v.size()))
            throw StructuralError("build_per_client_pool: bad train_len");
        TimeSeriesSample tr, te;
        tr.values.assign(v.begin(), v.begin() + train_len);
        te.values.assign(v.begin() + train_len, v.end());
        tr.label = te.label = series[i].label;
        tr.origin_client = te.origin_client = c.id;
        c.train.push_back(tr);
        c.test.push_back(te);
        if (gan_sample_len > 0) {
            c.gan_train = window_augment(tr, gan_sample_len, gan_sample_len);
        } else {
            c.gan_train = c.train;
        }
    }
    rebuild_forecast_pairs(pool);
    // test series shorter than the window still need pairs: split directly
    for (auto& c : pool.clients) {
        if (c.fc_test.empty() && pool.forecast.window_len) {
            ForecastSpec direct = pool.forecast;
            direct.window_len.reset();
            c.fc_test = forecast_pairs(c.test, direct);
        }
    }
    return pool;
}

OverwriteEvent apply_overwrite_event(ClientPool& pool, Rng& rng) {
    if (pool.overwrite_store.empty())
        throw StructuralError("apply_overwrite_event: empty overwrite store");
    const int ci = rng.uniform_int(0, static_cast<int>(pool.clients.size()) - 1);
    const int ki = rng.uniform_int(0, static_cast<int>(pool.overwrite_store.size()) - 1);
    auto it = pool.overwrite_store.begin();
    std::advance(it, ki);
    const int new_class = it->first;
    const auto& store = it->second;

    Client& c = pool.clients[ci];
    const double tf = pool.split.train_frac;
    const double ts = pool.split.test_frac;
    const int n = static_cast<int>(store.size());
    const int n_train =
        std::max(1, static_cast<int>(std::floor(n * tf / std::max(tf + ts, 1e-12))));
    c.train.clear();
    c.test.clear();
    for (int i = 0; i < n; ++i) {
        TimeSeriesSample s = store[i];
        s.origin_client = c.id;
        if (i < n_train)
            c.train.push_back(std::move(s));
        else
            c.test.push_back(std::move(s));
    }
    if (c.test.empty()) c.test.push_back(c.train.back());
    c.label = new_class;
    c.gan_train = c.train;
    c.fc_train = forecast_pairs(c.train, pool.forecast);
    c.fc_test = forecast_pairs(c.test, pool.forecast);
    return {c.id, new_class};
}

std::vector<TimeSeriesSample> synth_handover(int n_clients, int length, int n_archetypes,
                                             double noise, Rng& rng) {
    using std::numbers::pi;
    std::vector<TimeSeriesSample> out(n_clients);
    for (int c = 0; c < n_clients; ++c) {
        const int a = c % n_archetypes;
        // archetypes differ in cycle length: normalization erases amplitude
        // contrasts and forecasters can neutralize pure phase shifts
        const double period = 24.0 / (a + 1);
        TimeSeriesSample s;
        s.label = a;
        s.origin_client = c;
        s.values.resize(length);
        for (int t = 0; t < length; ++t) {
            double v = 2.0 + 0.8 * std::sin(2.0 * pi * t / period) +
                       0.3 * std::sin(2.0 * pi * t / 168.0);
            if (noise > 0.0) v += rng.normal(0.0, noise);
            s.values[t] = v;
        }
        out[c] = std::move(s);
    }
    return out;
}

std::vector<TimeSeriesSample> synth_sinusoid_classes(int n_samples, int length, int n_classes,
                                                     double noise, Rng& rng) {
    using std::numbers::pi;
    std::vector<TimeSeriesSample> out(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        const int cls = i % n_classes;
        const double freq = 1.0 + 2.0 * cls;  // distinct frequencies per class
        const double phase = rng.uniform(-0.4, 0.4);  // mild jitter, class-coherent
        TimeSeriesSample s;
        s.label = cls;
        s.values.resize(length);
        for (int t = 0; t < length; ++t) {
            double v = std::sin(2.0 * pi * freq * t / length + phase);
            if (noise > 0.0) v += rng.normal(0.0, noise);
            s.values[t] = v;
        }
        out[i] = std::move(s);
    }
    return out;
}

std::vector<TimeSeriesSample> synth_power_demand(int n_samples, int length, Rng& rng) {
    using std::numbers::pi;
    std::vector<TimeSeriesSample> out(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        const int cls = i % 2;
        const double amp_a = rng.uniform(0.4, 1.6);
        const double amp_b = rng.uniform(0.4, 1.6);
        const double level = rng.uniform(0.65, 1.35);
        const double jitter = rng.uniform(-0.75, 0.75);
        const double width = rng.uniform(2.4, 6.0);
        const double mix = rng.uniform(0.6, 0.9);
        TimeSeriesSample s;
        s.label = cls;
        s.values.resize(length);
        for (int t = 0; t < length; ++t) {
            const double hour = t + jitter;
            double v;
            if (cls == 0) {
                // two peaks: morning and evening
                v = level + amp_a * std::exp(-0.5 * std::pow((hour - 8.0) / 2.5, 2)) +
                    amp_b * std::exp(-0.5 * std::pow((hour - 19.0) / 2.5, 2));
            } else {
                // single broad midday peak, level/spread randomized so summary
                // statistics overlap the two-peak class
                v = level + mix * (amp_a + amp_b) *
                                std::exp(-0.5 * std::pow((hour - 13.0) / width, 2));
            }
            v += rng.normal(0.0, 0.15);
            s.values[t] = v;
        }
        out[i] = std::move(s);
    }
    return out;
}

}  // namespace dcfl::data
