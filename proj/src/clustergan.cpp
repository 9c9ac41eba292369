#include "dcfl/clustergan.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dcfl/errors.hpp"
#include "dcfl/losses.hpp"

namespace dcfl::gan {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double safe_log(double x) { return std::log(std::max(x, nn::kProbFloor)); }

void add_into(std::vector<double>& acc, const std::vector<double>& g) {
    if (acc.empty()) acc.assign(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
}

void check_batch(const GanTriple& triple, const std::vector<std::vector<double>>& real_batch,
                 const std::vector<LatentCode>& latent_batch, const LatentConfig& cfg) {
    cfg.validate();
    if (real_batch.empty() || latent_batch.empty())
        throw StructuralError("clustergan: empty batch");
    const int data_dim = triple.generator.arch.output_len();
    for (const auto& x : real_batch)
        if (static_cast<int>(x.size()) != data_dim)
            throw StructuralError("clustergan: real sample length " +
                                  std::to_string(x.size()) + " != generator output width " +
                                  std::to_string(data_dim));
    if (triple.encoder.arch.output_len() != cfg.latent_dim())
        throw StructuralError("clustergan: encoder output width != d_n + K");
    if (triple.generator.arch.input_len != cfg.latent_dim())
        throw StructuralError("clustergan: generator input width != d_n + K");
}

// Reconstruction terms and their upstream gradient on the encoder output.
struct ReconEval {
    double recon_n = 0.0;
    double recon_c = 0.0;
    std::vector<double> e_upstream;  // scaled by beta weights and 1/B
};

ReconEval recon_terms(const std::vector<double>& e_out, const LatentCode& z,
                      const LatentConfig& cfg, double inv_batch) {
    ReconEval r;
    r.e_upstream.assign(e_out.size(), 0.0);
    for (int i = 0; i < cfg.d_n; ++i) {
        const double d = e_out[i] - z.z_n[i];
        r.recon_n += d * d;
        r.e_upstream[i] = cfg.beta_n * 2.0 * d * inv_batch;
    }
    std::vector<double> logits(e_out.begin() + cfg.d_n, e_out.end());
    r.recon_c = nn::cross_entropy_loss(nn::softmax(logits), z.z_c);
    const auto ce_grad = nn::softmax_cross_entropy_grad(logits, z.z_c);
    for (int k = 0; k < cfg.K; ++k)
        r.e_upstream[cfg.d_n + k] = cfg.beta_c * ce_grad[k] * inv_batch;
    return r;
}

}  // namespace

void LatentConfig::validate() const {
    if (K < 1) throw StructuralError("latent config: K must be >= 1");
    if (d_n < 1) throw StructuralError("latent config: d_n must be >= 1");
    if (sigma <= 0.0) throw StructuralError("latent config: sigma must be positive");
    if (beta_n < 0.0 || beta_c < 0.0)
        throw StructuralError("latent config: beta weights must be non-negative");
}

std::vector<double> LatentCode::flat() const {
    std::vector<double> z = z_n;
    z.insert(z.end(), z_c.begin(), z_c.end());
    return z;
}

int LatentCode::cluster() const {
    for (std::size_t k = 0; k < z_c.size(); ++k)
        if (z_c[k] == 1.0) return static_cast<int>(k) + 1;
    throw StructuralError("latent code: no hot entry");
}

LatentCode sample_latent(const LatentConfig& cfg, Rng& rng) {
    cfg.validate();
    LatentCode z;
    z.z_n.resize(cfg.d_n);
    for (double& v : z.z_n) v = rng.normal(0.0, cfg.sigma);
    z.z_c.assign(cfg.K, 0.0);
    z.z_c[rng.uniform_int(1, cfg.K) - 1] = 1.0;
    return z;
}

GanTriple init_triple(const LatentConfig& cfg, int data_dim, const std::vector<int>& hidden,
                      Rng& rng) {
    cfg.validate();
    GanTriple t;
    t.generator = nn::init_params(
        nn::mlp(cfg.latent_dim(), hidden, data_dim, nn::Activation::relu), rng);
    t.encoder = nn::init_params(
        nn::mlp(data_dim, hidden, cfg.latent_dim(), nn::Activation::relu), rng);
    t.discriminator =
        nn::init_params(nn::mlp(data_dim, hidden, 1, nn::Activation::relu), rng);
    return t;
}

GanLosses clustergan_losses(const GanTriple& triple,
                            const std::vector<std::vector<double>>& real_batch,
                            const std::vector<LatentCode>& latent_batch,
                            const LatentConfig& cfg) {
    check_batch(triple, real_batch, latent_batch, cfg);
    const double inv_r = 1.0 / real_batch.size();
    const double inv_z = 1.0 / latent_batch.size();

    GanLosses L;
    double real_term = 0.0;
    for (const auto& x : real_batch) {
        const double u = nn::forward(triple.discriminator, x)[0];
        real_term += cfg.quality == GanQuality::vanilla ? safe_log(sigmoid(u)) : u;
    }
    real_term *= inv_r;

    double fake_term = 0.0;  // E q(1 - D(G(z))) side, discriminator view
    double gen_term = 0.0;   // non-saturating generator side
    for (const auto& z : latent_batch) {
        const auto x_g = nn::forward(triple.generator, z.flat());
        const double u = nn::forward(triple.discriminator, x_g)[0];
        if (cfg.quality == GanQuality::vanilla) {
            fake_term += safe_log(1.0 - sigmoid(u));
            gen_term += -safe_log(sigmoid(u));
        } else {
            fake_term += 1.0 - u;
            gen_term += -u;
        }
        const auto e_out = nn::forward(triple.encoder, x_g);
        const auto r = recon_terms(e_out, z, cfg, inv_z);
        L.recon_n += r.recon_n * inv_z;
        L.recon_c += r.recon_c * inv_z;
    }
    fake_term *= inv_z;
    gen_term *= inv_z;

    // discriminator maximizes (real_term + fake_term); d_loss is its negation
    L.d_loss = -(real_term + fake_term);
    L.g_e_loss = gen_term + cfg.beta_n * L.recon_n + cfg.beta_c * L.recon_c;
    return L;
}

ObjectiveGrads objective_grads(const GanTriple& triple,
                               const std::vector<std::vector<double>>& real_batch,
                               const std::vector<LatentCode>& latent_batch,
                               const LatentConfig& cfg) {
    check_batch(triple, real_batch, latent_batch, cfg);
    const double inv_r = 1.0 / real_batch.size();
    const double inv_z = 1.0 / latent_batch.size();
    const bool vanilla = cfg.quality == GanQuality::vanilla;

    ObjectiveGrads out;
    std::vector<double> gG, gE, gD;

    for (const auto& x : real_batch) {
        const double u = nn::forward(triple.discriminator, x)[0];
        double du;
        if (vanilla) {
            out.value += safe_log(sigmoid(u)) * inv_r;
            du = (1.0 - sigmoid(u)) * inv_r;
        } else {
            out.value += u * inv_r;
            du = inv_r;
        }
        add_into(gD, nn::backward(triple.discriminator, x, {du}).param_grads.values);
    }

    for (const auto& z : latent_batch) {
        const auto zf = z.flat();
        const auto x_g = nn::forward(triple.generator, zf);
        const double u = nn::forward(triple.discriminator, x_g)[0];
        double du;
        if (vanilla) {
            out.value += safe_log(1.0 - sigmoid(u)) * inv_z;
            du = -sigmoid(u) * inv_z;
        } else {
            out.value += (1.0 - u) * inv_z;
            du = -inv_z;
        }
        auto d_back = nn::backward(triple.discriminator, x_g, {du});
        add_into(gD, d_back.param_grads.values);
        std::vector<double> dx = std::move(d_back.input_grad);

        const auto e_out = nn::forward(triple.encoder, x_g);
        const auto r = recon_terms(e_out, z, cfg, inv_z);
        out.value += (cfg.beta_n * r.recon_n + cfg.beta_c * r.recon_c) * inv_z;
        auto e_back = nn::backward(triple.encoder, x_g, r.e_upstream);
        add_into(gE, e_back.param_grads.values);
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += e_back.input_grad[i];

        add_into(gG, nn::backward(triple.generator, zf, dx).param_grads.values);
    }

    if (gG.empty()) gG.assign(triple.generator.values.size(), 0.0);
    if (gE.empty()) gE.assign(triple.encoder.values.size(), 0.0);
    out.generator.values = std::move(gG);
    out.encoder.values = std::move(gE);
    out.discriminator.values = std::move(gD);
    return out;
}

GanTriple local_gan_step(const GanTriple& triple,
                         const std::vector<data::TimeSeriesSample>& samples,
                         const LatentConfig& cfg, GanOptState& opt, Rng& rng,
                         int batch_size) {
    if (samples.empty()) throw StructuralError("local_gan_step: no local data");
    cfg.validate();
    const int B = std::max(1, std::min<int>(batch_size, static_cast<int>(samples.size())));
    const bool vanilla = cfg.quality == GanQuality::vanilla;

    auto draw_real = [&]() {
        std::vector<std::vector<double>> batch(B);
        for (int i = 0; i < B; ++i)
            batch[i] = samples[rng.uniform_int(0, static_cast<int>(samples.size()) - 1)].values;
        return batch;
    };
    auto draw_latent = [&]() {
        std::vector<LatentCode> batch(B);
        for (int i = 0; i < B; ++i) batch[i] = sample_latent(cfg, rng);
        return batch;
    };

    GanTriple cur = triple;

    // (a) discriminator step
    {
        const auto real_batch = draw_real();
        const auto latent_batch = draw_latent();
        const double inv_r = 1.0 / real_batch.size();
        const double inv_z = 1.0 / latent_batch.size();
        std::vector<double> gD;
        for (const auto& x : real_batch) {
            const double u = nn::forward(cur.discriminator, x)[0];
            const double du = vanilla ? -(1.0 - sigmoid(u)) * inv_r : -inv_r;
            add_into(gD, nn::backward(cur.discriminator, x, {du}).param_grads.values);
        }
        for (const auto& z : latent_batch) {
            const auto x_g = nn::forward(cur.generator, z.flat());
            const double u = nn::forward(cur.discriminator, x_g)[0];
            const double du = vanilla ? sigmoid(u) * inv_z : inv_z;
            add_into(gD, nn::backward(cur.discriminator, x_g, {du}).param_grads.values);
        }
        cur.discriminator =
            nn::optimizer_step(opt.discriminator, cur.discriminator, {std::move(gD)});
        if (cfg.quality == GanQuality::wasserstein) {
            for (double& w : cur.discriminator.values)
                w = std::clamp(w, -cfg.clip, cfg.clip);
        }
    }

    // (b) generator + encoder step against the updated discriminator
    {
        const auto latent_batch = draw_latent();
        const double inv_z = 1.0 / latent_batch.size();
        std::vector<double> gG, gE;
        for (const auto& z : latent_batch) {
            const auto zf = z.flat();
            const auto x_g = nn::forward(cur.generator, zf);
            const double u = nn::forward(cur.discriminator, x_g)[0];
            // non-saturating adversarial upstream
            const double du = vanilla ? -(1.0 - sigmoid(u)) * inv_z : -inv_z;
            auto d_back = nn::backward(cur.discriminator, x_g, {du});
            std::vector<double> dx = std::move(d_back.input_grad);

            const auto e_out = nn::forward(cur.encoder, x_g);
            const auto r = recon_terms(e_out, z, cfg, inv_z);
            auto e_back = nn::backward(cur.encoder, x_g, r.e_upstream);
            add_into(gE, e_back.param_grads.values);
            for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += e_back.input_grad[i];
            add_into(gG, nn::backward(cur.generator, zf, dx).param_grads.values);
        }
        cur.generator = nn::optimizer_step(opt.generator, cur.generator, {std::move(gG)});
        cur.encoder = nn::optimizer_step(opt.encoder, cur.encoder, {std::move(gE)});
    }
    return cur;
}

int infer_cluster(const nn::ParamSet& encoder, const data::TimeSeriesSample& sample,
                  const LatentConfig& cfg) {
    const auto e_out = nn::forward(encoder, sample.values);
    int best = 0;
    for (int k = 1; k < cfg.K; ++k)
        if (e_out[cfg.d_n + k] > e_out[cfg.d_n + best]) best = k;
    return best + 1;
}

}  // namespace dcfl::gan
