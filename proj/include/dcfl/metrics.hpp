#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dcfl::metrics {

// Fraction of samples lying in the majority class of their cluster.
double purity(const std::map<int, int>& assignments, const std::map<int, int>& labels);

// sum_i (count_i / sum(counts)) * loss_i
double weighted_forecast_loss(const std::map<int, double>& per_cluster_loss,
                              const std::map<int, int>& member_counts);

// FNV-1a over (client id, cluster id) pairs in ascending client order.
std::uint64_t assignment_hash(const std::map<int, int>& assignment);

struct MetricsRecord {
    int divisive_round = 0;
    std::string phase;  // "phase1" | "phase2" | "phase3"
    int global_round = 0;
    std::map<int, double> per_cluster_losses;
    double weighted_loss = 0.0;
    std::uint64_t assignment_snapshot = 0;
    std::optional<double> purity;

    std::string to_json() const;
    static MetricsRecord from_json(const std::string& line);

    bool operator==(const MetricsRecord&) const = default;
};

// Append-only per-round log; round indices must be monotone within a
// (divisive round, phase) pair.
class RunLog {
public:
    void record(MetricsRecord rec);
    const std::vector<MetricsRecord>& records() const { return records_; }

    void save_jsonl(const std::string& path) const;
    static RunLog load_jsonl(const std::string& path);

private:
    std::vector<MetricsRecord> records_;
    std::map<std::pair<int, std::string>, int> last_round_;
};

}  // namespace dcfl::metrics
