#include "dcfl/network.hpp"

#include <cmath>
#include <string>

#include "dcfl/errors.hpp"

namespace dcfl::nn {

namespace {

std::size_t layer_param_count(const LayerSpec& l) {
    if (l.kind == LayerSpec::Kind::dense)
        return static_cast<std::size_t>(l.out) * l.in + l.out;
    // lstm: Wx[4H x in] + Wh[4H x H] + b[4H], gate order i,f,g,o
    const std::size_t h = static_cast<std::size_t>(l.out);
    return 4 * h * l.in + 4 * h * h + 4 * h;
}

int layer_output_len(const LayerSpec& l) { return l.out; }

int layer_input_len(const LayerSpec& l, int incoming) {
    if (l.kind == LayerSpec::Kind::dense) return l.in;
    (void)incoming;
    return l.in;  // per-step width; total incoming must be a multiple
}

double activate(Activation a, double x) {
    switch (a) {
        case Activation::linear: return x;
        case Activation::relu: return x > 0.0 ? x : 0.0;
        case Activation::tanh_fn: return std::tanh(x);
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
    }
    return x;
}

// derivative expressed through pre-activation z and activation value y
double activate_grad(Activation a, double z, double y) {
    switch (a) {
        case Activation::linear: return 1.0;
        case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::tanh_fn: return 1.0 - y * y;
        case Activation::sigmoid: return y * (1.0 - y);
    }
    return 1.0;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LayerCache {
    std::vector<double> input;
    std::vector<double> preact;  // dense
    std::vector<double> output;
    // lstm per-step values, each steps*H
    std::vector<double> gi, gf, gg, go, cell, hidden;
    int steps = 0;
};

std::vector<double> run_forward(const ParamSet& params, const std::vector<double>& input,
                                std::vector<LayerCache>* tape) {
    const Architecture& arch = params.arch;
    arch.validate();
    if (static_cast<int>(input.size()) != arch.input_len)
        throw StructuralError("forward: input length " + std::to_string(input.size()) +
                              " does not match architecture input width " +
                              std::to_string(arch.input_len));
    if (params.values.size() != arch.param_count())
        throw StructuralError("forward: parameter vector length mismatch");

    std::vector<double> cur = input;
    std::size_t off = 0;
    if (tape) tape->resize(arch.layers.size());

    for (std::size_t li = 0; li < arch.layers.size(); ++li) {
        const LayerSpec& l = arch.layers[li];
        LayerCache* cache = tape ? &(*tape)[li] : nullptr;
        if (cache) cache->input = cur;

        if (l.kind == LayerSpec::Kind::dense) {
            const double* W = params.values.data() + off;
            const double* b = W + static_cast<std::size_t>(l.out) * l.in;
            std::vector<double> z(l.out), y(l.out);
            for (int o = 0; o < l.out; ++o) {
                double s = b[o];
                const double* row = W + static_cast<std::size_t>(o) * l.in;
                for (int i = 0; i < l.in; ++i) s += row[i] * cur[i];
                z[o] = s;
                y[o] = activate(l.act, s);
            }
            if (cache) {
                cache->preact = z;
                cache->output = y;
            }
            cur = std::move(y);
        } else {
            const int H = l.out;
            const int steps = static_cast<int>(cur.size()) / l.in;
            const double* Wx = params.values.data() + off;
            const double* Wh = Wx + static_cast<std::size_t>(4) * H * l.in;
            const double* b = Wh + static_cast<std::size_t>(4) * H * H;

            std::vector<double> h(H, 0.0), c(H, 0.0);
            if (cache) {
                cache->steps = steps;
                cache->gi.assign(static_cast<std::size_t>(steps) * H, 0.0);
                cache->gf = cache->gi;
                cache->gg = cache->gi;
                cache->go = cache->gi;
                cache->cell = cache->gi;
                cache->hidden = cache->gi;
            }
            std::vector<double> a(4 * H);
            for (int t = 0; t < steps; ++t) {
                const double* x = cur.data() + static_cast<std::size_t>(t) * l.in;
                for (int j = 0; j < 4 * H; ++j) {
                    double s = b[j];
                    const double* wx = Wx + static_cast<std::size_t>(j) * l.in;
                    for (int i = 0; i < l.in; ++i) s += wx[i] * x[i];
                    const double* wh = Wh + static_cast<std::size_t>(j) * H;
                    for (int i = 0; i < H; ++i) s += wh[i] * h[i];
                    a[j] = s;
                }
                for (int j = 0; j < H; ++j) {
                    const double gi = sigmoid(a[j]);
                    const double gf = sigmoid(a[H + j]);
                    const double gg = std::tanh(a[2 * H + j]);
                    const double go = sigmoid(a[3 * H + j]);
                    const double cc = gf * c[j] + gi * gg;
                    c[j] = cc;
                    h[j] = go * std::tanh(cc);
                    if (cache) {
                        const std::size_t k = static_cast<std::size_t>(t) * H + j;
                        cache->gi[k] = gi;
                        cache->gf[k] = gf;
                        cache->gg[k] = gg;
                        cache->go[k] = go;
                        cache->cell[k] = cc;
                        cache->hidden[k] = h[j];
                    }
                }
            }
            if (cache) cache->output = h;
            cur = std::move(h);
        }
        off += layer_param_count(l);
    }
    return cur;
}

}  // namespace

int Architecture::output_len() const {
    if (layers.empty()) return input_len;
    return layer_output_len(layers.back());
}

std::size_t Architecture::param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += layer_param_count(l);
    return n;
}

void Architecture::validate() const {
    if (input_len <= 0) throw StructuralError("architecture: input_len must be positive");
    int w = input_len;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& l = layers[i];
        if (l.in <= 0 || l.out <= 0)
            throw StructuralError("architecture: layer " + std::to_string(i) +
                                  " has non-positive width");
        if (l.kind == LayerSpec::Kind::dense) {
            if (l.in != w)
                throw StructuralError("architecture: layer " + std::to_string(i) +
                                      " expects input width " + std::to_string(l.in) +
                                      " but receives " + std::to_string(w));
        } else {
            if (w % l.in != 0)
                throw StructuralError("architecture: lstm layer " + std::to_string(i) +
                                      " step width " + std::to_string(l.in) +
                                      " does not divide incoming width " + std::to_string(w));
        }
        w = layer_output_len(l);
    }
}

Architecture mlp(int input, const std::vector<int>& hidden, int output,
                 Activation hidden_act, Activation output_act) {
    Architecture a;
    a.input_len = input;
    int w = input;
    for (int h : hidden) {
        a.layers.push_back({LayerSpec::Kind::dense, w, h, hidden_act});
        w = h;
    }
    a.layers.push_back({LayerSpec::Kind::dense, w, output, output_act});
    a.validate();
    return a;
}

Architecture lstm_forecaster(int input_len, int units, int horizon) {
    Architecture a;
    a.input_len = input_len;
    a.layers.push_back({LayerSpec::Kind::lstm, 1, units, Activation::linear});
    a.layers.push_back({LayerSpec::Kind::dense, units, horizon, Activation::linear});
    a.validate();
    return a;
}

ParamSet init_params(const Architecture& arch, Rng& rng) {
    arch.validate();
    ParamSet p;
    p.arch = arch;
    p.values.assign(arch.param_count(), 0.0);
    std::size_t off = 0;
    for (const auto& l : arch.layers) {
        if (l.kind == LayerSpec::Kind::dense) {
            const double bound = std::sqrt(6.0 / (l.in + l.out));
            for (std::size_t k = 0; k < static_cast<std::size_t>(l.out) * l.in; ++k)
                p.values[off + k] = rng.uniform(-bound, bound);
            // biases stay zero
        } else {
            const int H = l.out;
            const double bx = std::sqrt(6.0 / (l.in + H));
            const double bh = std::sqrt(6.0 / (H + H));
            std::size_t k = off;
            for (std::size_t i = 0; i < static_cast<std::size_t>(4) * H * l.in; ++i)
                p.values[k++] = rng.uniform(-bx, bx);
            for (std::size_t i = 0; i < static_cast<std::size_t>(4) * H * H; ++i)
                p.values[k++] = rng.uniform(-bh, bh);
            // biases zero, except forget gate at 1
            for (int j = 0; j < H; ++j) p.values[k + H + j] = 1.0;
        }
        off += layer_param_count(l);
    }
    return p;
}

std::vector<double> forward(const ParamSet& params, const std::vector<double>& input) {
    return run_forward(params, input, nullptr);
}

BackwardResult backward(const ParamSet& params, const std::vector<double>& input,
                        const std::vector<double>& upstream_loss_grad) {
    std::vector<LayerCache> tape;
    run_forward(params, input, &tape);

    const Architecture& arch = params.arch;
    if (static_cast<int>(upstream_loss_grad.size()) != arch.output_len())
        throw StructuralError("backward: upstream gradient length mismatch");

    BackwardResult res;
    res.param_grads.values.assign(params.values.size(), 0.0);

    // parameter offsets per layer
    std::vector<std::size_t> offs(arch.layers.size());
    std::size_t off = 0;
    for (std::size_t i = 0; i < arch.layers.size(); ++i) {
        offs[i] = off;
        off += layer_param_count(arch.layers[i]);
    }

    std::vector<double> up = upstream_loss_grad;
    for (int li = static_cast<int>(arch.layers.size()) - 1; li >= 0; --li) {
        const LayerSpec& l = arch.layers[li];
        const LayerCache& cache = tape[li];
        double* gW = res.param_grads.values.data() + offs[li];

        if (l.kind == LayerSpec::Kind::dense) {
            const double* W = params.values.data() + offs[li];
            double* gb = gW + static_cast<std::size_t>(l.out) * l.in;
            std::vector<double> down(l.in, 0.0);
            for (int o = 0; o < l.out; ++o) {
                const double dz =
                    up[o] * activate_grad(l.act, cache.preact[o], cache.output[o]);
                gb[o] += dz;
                const double* row = W + static_cast<std::size_t>(o) * l.in;
                double* grow = gW + static_cast<std::size_t>(o) * l.in;
                for (int i = 0; i < l.in; ++i) {
                    grow[i] += dz * cache.input[i];
                    down[i] += dz * row[i];
                }
            }
            up = std::move(down);
        } else {
            const int H = l.out;
            const int steps = cache.steps;
            const double* Wx = params.values.data() + offs[li];
            const double* Wh = Wx + static_cast<std::size_t>(4) * H * l.in;
            double* gWx = gW;
            double* gWh = gW + static_cast<std::size_t>(4) * H * l.in;
            double* gb = gWh + static_cast<std::size_t>(4) * H * H;

            std::vector<double> dh = up;  // gradient w.r.t. final hidden
            std::vector<double> dc(H, 0.0);
            std::vector<double> down(cache.input.size(), 0.0);
            std::vector<double> da(4 * H);

            for (int t = steps - 1; t >= 0; --t) {
                const double* x = cache.input.data() + static_cast<std::size_t>(t) * l.in;
                const std::size_t base = static_cast<std::size_t>(t) * H;
                for (int j = 0; j < H; ++j) {
                    const double gi = cache.gi[base + j];
                    const double gf = cache.gf[base + j];
                    const double gg = cache.gg[base + j];
                    const double go = cache.go[base + j];
                    const double cc = cache.cell[base + j];
                    const double tc = std::tanh(cc);
                    const double c_prev = t > 0 ? cache.cell[base - H + j] : 0.0;

                    double dcj = dc[j] + dh[j] * go * (1.0 - tc * tc);
                    const double doj = dh[j] * tc;
                    const double dij = dcj * gg;
                    const double dgj = dcj * gi;
                    const double dfj = dcj * c_prev;
                    dc[j] = dcj * gf;

                    da[j] = dij * gi * (1.0 - gi);
                    da[H + j] = dfj * gf * (1.0 - gf);
                    da[2 * H + j] = dgj * (1.0 - gg * gg);
                    da[3 * H + j] = doj * go * (1.0 - go);
                }
                const double* h_prev =
                    t > 0 ? cache.hidden.data() + base - H : nullptr;
                std::vector<double> dh_prev(H, 0.0);
                for (int j = 0; j < 4 * H; ++j) {
                    const double d = da[j];
                    double* gx = gWx + static_cast<std::size_t>(j) * l.in;
                    for (int i = 0; i < l.in; ++i) gx[i] += d * x[i];
                    double* gh = gWh + static_cast<std::size_t>(j) * H;
                    const double* wh = Wh + static_cast<std::size_t>(j) * H;
                    if (h_prev) {
                        for (int i = 0; i < H; ++i) {
                            gh[i] += d * h_prev[i];
                            dh_prev[i] += d * wh[i];
                        }
                    }
                    gb[j] += d;
                    const double* wx = Wx + static_cast<std::size_t>(j) * l.in;
                    double* dx = down.data() + static_cast<std::size_t>(t) * l.in;
                    for (int i = 0; i < l.in; ++i) dx[i] += d * wx[i];
                }
                dh = std::move(dh_prev);
            }
            up = std::move(down);
        }
    }
    res.input_grad = std::move(up);
    return res;
}

}  // namespace dcfl::nn
