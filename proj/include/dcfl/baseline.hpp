#pragma once

#include <array>
#include <vector>

#include "dcfl/data.hpp"

namespace dcfl::baseline {

// Fixed order: mean, std, lag-1 autocorrelation, trend strength,
// seasonal strength, spectral entropy.
using FeatureVector = std::array<double, 6>;

FeatureVector extract_features(const data::TimeSeriesSample& series, int seasonal_period);

// Bottom-up Ward-linkage merging until K clusters remain. Features are
// z-score standardized per coordinate before linkage. Returns 1-based
// cluster ids ordered by each final cluster's smallest member index.
std::vector<int> agglomerative_cluster(const std::vector<FeatureVector>& features, int K);

}  // namespace dcfl::baseline
