#include "dcfl/metrics.hpp"

#include <algorithm>
#include <fstream>

#include "dcfl/errors.hpp"
#include "json.hpp"

namespace dcfl::metrics {

double purity(const std::map<int, int>& assignments, const std::map<int, int>& labels) {
    if (assignments.empty()) throw StructuralError("purity: empty assignments");
    if (assignments.size() != labels.size())
        throw StructuralError("purity: assignment/label domains differ");
    // cluster -> class -> count
    std::map<int, std::map<int, int>> table;
    for (const auto& [key, cluster] : assignments) {
        auto it = labels.find(key);
        if (it == labels.end())
            throw StructuralError("purity: sample " + std::to_string(key) + " has no label");
        ++table[cluster][it->second];
    }
    long long majority_total = 0;
    for (const auto& [cluster, per_class] : table) {
        int mx = 0;
        for (const auto& [cls, n] : per_class) mx = std::max(mx, n);
        majority_total += mx;
    }
    return static_cast<double>(majority_total) / static_cast<double>(assignments.size());
}

double weighted_forecast_loss(const std::map<int, double>& per_cluster_loss,
                              const std::map<int, int>& member_counts) {
    if (per_cluster_loss.empty())
        throw StructuralError("weighted_forecast_loss: empty input");
    if (per_cluster_loss.size() != member_counts.size())
        throw StructuralError("weighted_forecast_loss: key sets differ");
    double total = 0.0;
    for (const auto& [kid, n] : member_counts) {
        if (!per_cluster_loss.count(kid))
            throw StructuralError("weighted_forecast_loss: missing loss for cluster " +
                                  std::to_string(kid));
        if (n <= 0) throw StructuralError("weighted_forecast_loss: non-positive count");
        total += n;
    }
    double acc = 0.0;
    for (const auto& [kid, n] : member_counts)
        acc += (static_cast<double>(n) / total) * per_cluster_loss.at(kid);
    return acc;
}

std::uint64_t assignment_hash(const std::map<int, int>& assignment) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    for (const auto& [cid, kid] : assignment) {
        mix(static_cast<std::uint64_t>(cid));
        mix(static_cast<std::uint64_t>(kid));
    }
    return h;
}

std::string MetricsRecord::to_json() const {
    nlohmann::json j;
    j["divisive_round"] = divisive_round;
    j["phase"] = phase;
    j["global_round"] = global_round;
    nlohmann::json losses = nlohmann::json::object();
    for (const auto& [kid, loss] : per_cluster_losses) losses[std::to_string(kid)] = loss;
    j["per_cluster_losses"] = losses;
    j["weighted_loss"] = weighted_loss;
    j["assignment_snapshot"] = assignment_snapshot;
    if (purity) j["purity"] = *purity;
    return j.dump();
}

MetricsRecord MetricsRecord::from_json(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw StructuralError(std::string("metrics record parse error: ") + e.what());
    }
    MetricsRecord r;
    r.divisive_round = j.at("divisive_round").get<int>();
    r.phase = j.at("phase").get<std::string>();
    r.global_round = j.at("global_round").get<int>();
    for (const auto& [k, v] : j.at("per_cluster_losses").items())
        r.per_cluster_losses[std::stoi(k)] = v.get<double>();
    r.weighted_loss = j.at("weighted_loss").get<double>();
    r.assignment_snapshot = j.at("assignment_snapshot").get<std::uint64_t>();
    if (j.contains("purity")) r.purity = j.at("purity").get<double>();
    return r;
}

void RunLog::record(MetricsRecord rec) {
    const auto key = std::make_pair(rec.divisive_round, rec.phase);
    auto it = last_round_.find(key);
    if (it != last_round_.end() && rec.global_round <= it->second)
        throw StructuralError("run log: out-of-order round " +
                              std::to_string(rec.global_round) + " in phase " + rec.phase);
    last_round_[key] = rec.global_round;
    records_.push_back(std::move(rec));
}

void RunLog::save_jsonl(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw StructuralError("run log: cannot write " + path);
    for (const auto& r : records_) out << r.to_json() << '\n';
}

RunLog RunLog::load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StructuralError("run log: cannot open " + path);
    RunLog log;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        log.record(MetricsRecord::from_json(line));
    }
    return log;
}

}  // namespace dcfl::metrics
