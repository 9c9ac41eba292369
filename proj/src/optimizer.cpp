#include "dcfl/optimizer.hpp"

#include <cmath>
#include <string>

#include "dcfl/errors.hpp"

namespace dcfl::nn {

ParamSet optimizer_step(OptimizerState& state, const ParamSet& params, const Gradients& grads) {
    if (grads.values.size() != params.values.size())
        throw StructuralError("optimizer_step: gradient/parameter shape mismatch");
    for (std::size_t i = 0; i < grads.values.size(); ++i)
        if (!std::isfinite(grads.values[i]))
            throw NumericError("optimizer_step: non-finite gradient at index " +
                               std::to_string(i));

    ParamSet out = params;
    const double lr = state.learning_rate;
    const double l2 = state.l2_coefficient;

    if (state.kind == OptimizerKind::sgd) {
        for (std::size_t i = 0; i < out.values.size(); ++i)
            out.values[i] -= lr * (grads.values[i] + l2 * out.values[i]);
        return out;
    }

    if (state.accumulators.size() != params.values.size())
        state.accumulators.assign(params.values.size(), 0.0);
    const double d = state.rmsprop_decay;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const double g = grads.values[i];
        double& v = state.accumulators[i];
        v = d * v + (1.0 - d) * g * g;
        out.values[i] -= lr * (g + l2 * out.values[i]) / std::sqrt(v + state.rmsprop_epsilon);
    }
    return out;
}

}  // namespace dcfl::nn
