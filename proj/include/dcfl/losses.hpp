#pragma once

#include <vector>

namespace dcfl::nn {

// (1/m) * sum (y_i - yhat_i)^2
double mse_loss(const std::vector<double>& predicted, const std::vector<double>& target);
// d(mse)/d(predicted)
std::vector<double> mse_grad(const std::vector<double>& predicted,
                             const std::vector<double>& target);

std::vector<double> softmax(const std::vector<double>& logits);

// -sum target_i * log(max(predicted_i, 1e-12))
double cross_entropy_loss(const std::vector<double>& predicted_distribution,
                          const std::vector<double>& one_hot_target);

// gradient of cross_entropy(softmax(logits), target) w.r.t. logits
std::vector<double> softmax_cross_entropy_grad(const std::vector<double>& logits,
                                               const std::vector<double>& one_hot_target);

inline constexpr double kProbFloor = 1e-12;

}  // namespace dcfl::nn
