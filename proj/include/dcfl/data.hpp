#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dcfl/rng.hpp"

namespace dcfl::data {

struct TimeSeriesSample {
    std::vector<double> values;
    std::optional<int> label;
    std::optional<int> origin_client;

    bool operator==(const TimeSeriesSample&) const = default;
};

struct SplitSpec {
    double train_frac = 0.7;
    double overwrite_frac = 0.2;
    double test_frac = 0.1;

    void validate() const;  // fractions sum to 1
};

enum class NormalizeMode { dataset_minmax, per_series_minmax };

// How a client's series become LSTM (input, target) pairs. When window_len is
// set, each series is first cut into shifted windows; each window (or series)
// is then split at floor(input_frac * len).
struct ForecastSpec {
    double input_frac = 0.7;
    std::optional<int> window_len;
    int window_shift = 1;
};

struct ForecastPair {
    std::vector<double> input;
    std::vector<double> target;
};

struct Client {
    int id = 0;
    std::uint64_t seed = 0;
    std::optional<int> label;                   // ground truth, scoring only
    std::vector<TimeSeriesSample> train;
    std::vector<TimeSeriesSample> test;
    std::vector<TimeSeriesSample> gan_train;    // Phase 1 samples
    std::vector<ForecastPair> fc_train;
    std::vector<ForecastPair> fc_test;
};

struct ClientPool {
    std::vector<Client> clients;
    // class -> held-out samples for the overwrite event
    std::map<int, std::vector<TimeSeriesSample>> overwrite_store;
    ForecastSpec forecast;
    SplitSpec split;

    std::size_t total_gan_samples() const;
    const Client& client_by_id(int id) const;
    Client& client_by_id(int id);
};

struct OverwriteEvent {
    int client_id = 0;
    int new_class = 0;
};

// Delimiter-separated text, one series per line; comma or tab autodetected.
// labeled: integer class label in the first field.
std::vector<TimeSeriesSample> load_dataset(const std::string& path, bool labeled);
void save_dataset(const std::string& path, const std::vector<TimeSeriesSample>& samples,
                  bool labeled);

std::vector<TimeSeriesSample> normalize(std::vector<TimeSeriesSample> samples,
                                        NormalizeMode mode);

// One class per client; classes dealt round-robin over clients, samples dealt
// round-robin within a class's clients. Per-client 70/20/10 split.
ClientPool partition_non_iid(const std::vector<TimeSeriesSample>& samples, int n_clients,
                             const SplitSpec& split, const ForecastSpec& forecast,
                             std::uint64_t root_seed);

// One client per series: train = values[0..train_len), test = the remainder
// (handover layout). Phase 1 samples are gan_sample_len-step slices of the
// training range.
ClientPool build_per_client_pool(const std::vector<TimeSeriesSample>& series,
                                 int train_len, int gan_sample_len,
                                 const ForecastSpec& forecast, std::uint64_t root_seed);

OverwriteEvent apply_overwrite_event(ClientPool& pool, Rng& rng);

std::vector<TimeSeriesSample> window_augment(const TimeSeriesSample& series, int window_len,
                                             int shift);

std::vector<ForecastPair> forecast_pairs(const std::vector<TimeSeriesSample>& samples,
                                         const ForecastSpec& spec);
void rebuild_forecast_pairs(ClientPool& pool);

// Synthetic stand-ins ------------------------------------------------------

// Hourly series with daily and weekly structure drawn from n_archetypes
// curve families; the archetype id is recorded as the label (scoring only).
std::vector<TimeSeriesSample> synth_handover(int n_clients, int length, int n_archetypes,
                                             double noise, Rng& rng);

// Labeled sinusoid classes with distinct frequencies.
std::vector<TimeSeriesSample> synth_sinusoid_classes(int n_samples, int length, int n_classes,
                                                     double noise, Rng& rng);

// Two-class daily-demand-shaped twin of the Italy power demand layout
// (defaults: 1096 samples of length 24).
std::vector<TimeSeriesSample> synth_power_demand(int n_samples, int length, Rng& rng);

}  // namespace dcfl::data
