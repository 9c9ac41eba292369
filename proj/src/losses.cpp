#include "dcfl/losses.hpp"

#include <algorithm>
#include <cmath>

#include "dcfl/errors.hpp"

namespace dcfl::nn {

double mse_loss(const std::vector<double>& predicted, const std::vector<double>& target) {
    if (predicted.empty()) throw StructuralError("mse_loss: empty input");
    if (predicted.size() != target.size())
        throw StructuralError("mse_loss: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double d = target[i] - predicted[i];
        s += d * d;
    }
    return s / static_cast<double>(predicted.size());
}

std::vector<double> mse_grad(const std::vector<double>& predicted,
                             const std::vector<double>& target) {
    if (predicted.empty()) throw StructuralError("mse_grad: empty input");
    if (predicted.size() != target.size())
        throw StructuralError("mse_grad: length mismatch");
    std::vector<double> g(predicted.size());
    const double scale = 2.0 / static_cast<double>(predicted.size());
    for (std::size_t i = 0; i < predicted.size(); ++i)
        g[i] = scale * (predicted[i] - target[i]);
    return g;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        z += p[i];
    }
    for (double& v : p) v /= z;
    return p;
}

double cross_entropy_loss(const std::vector<double>& predicted_distribution,
                          const std::vector<double>& one_hot_target) {
    if (predicted_distribution.size() != one_hot_target.size())
        throw StructuralError("cross_entropy_loss: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < one_hot_target.size(); ++i)
        if (one_hot_target[i] != 0.0)
            s -= one_hot_target[i] * std::log(std::max(predicted_distribution[i], kProbFloor));
    return s;
}

std::vector<double> softmax_cross_entropy_grad(const std::vector<double>& logits,
                                               const std::vector<double>& one_hot_target) {
    if (logits.size() != one_hot_target.size())
        throw StructuralError("softmax_cross_entropy_grad: length mismatch");
    std::vector<double> g = softmax(logits);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= one_hot_target[i];
    return g;
}

}  // namespace dcfl::nn
