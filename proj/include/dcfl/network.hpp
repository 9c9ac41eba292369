#pragma once

#include <cstddef>
#include <vector>

#include "dcfl/rng.hpp"

namespace dcfl::nn {

enum class Activation { linear, relu, tanh_fn, sigmoid };

struct LayerSpec {
    enum class Kind { dense, lstm };
    Kind kind = Kind::dense;
    int in = 0;   // dense: input width; lstm: feature width per time step
    int out = 0;  // dense: output width; lstm: hidden units
    Activation act = Activation::linear;  // ignored for lstm

    bool operator==(const LayerSpec&) const = default;
};

// Feed-forward chain. An lstm layer consumes its incoming vector as a
// sequence of `in`-wide steps and emits the final hidden state.
struct Architecture {
    int input_len = 0;
    std::vector<LayerSpec> layers;

    int output_len() const;
    std::size_t param_count() const;
    // Throws StructuralError when layer widths do not chain.
    void validate() const;

    bool operator==(const Architecture&) const = default;
};

struct ParamSet {
    Architecture arch;
    std::vector<double> values;

    bool operator==(const ParamSet&) const = default;
};

struct Gradients {
    std::vector<double> values;
};

struct BackwardResult {
    Gradients param_grads;
    std::vector<double> input_grad;
};

// Builders
Architecture mlp(int input, const std::vector<int>& hidden, int output,
                 Activation hidden_act = Activation::relu,
                 Activation output_act = Activation::linear);
Architecture lstm_forecaster(int input_len, int units, int horizon);

// Uniform [-sqrt(6/(fan_in+fan_out)), +...], zero biases, LSTM forget bias 1.
ParamSet init_params(const Architecture& arch, Rng& rng);

std::vector<double> forward(const ParamSet& params, const std::vector<double>& input);

// Exact analytic gradients of a scalar loss with respect to every parameter,
// given d(loss)/d(output). Also returns d(loss)/d(input) so composite
// objectives can chain networks.
BackwardResult backward(const ParamSet& params, const std::vector<double>& input,
                        const std::vector<double>& upstream_loss_grad);

}  // namespace dcfl::nn
