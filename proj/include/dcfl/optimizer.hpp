#pragma once

#include <vector>

#include "dcfl/network.hpp"

namespace dcfl::nn {

enum class OptimizerKind { sgd, rmsprop };

struct OptimizerState {
    OptimizerKind kind = OptimizerKind::sgd;
    double learning_rate = 0.001;
    double rmsprop_decay = 0.9;
    double rmsprop_epsilon = 1e-8;
    double l2_coefficient = 0.0;
    std::vector<double> accumulators;  // rmsprop running averages, lazily sized
};

// SGD:     p <- p - lr * (g + l2*p)
// RMSProp: v <- d*v + (1-d)*g^2;  p <- p - lr * (g + l2*p) / sqrt(v + eps)
ParamSet optimizer_step(OptimizerState& state, const ParamSet& params, const Gradients& grads);

}  // namespace dcfl::nn
