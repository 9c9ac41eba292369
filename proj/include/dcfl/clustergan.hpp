#pragma once

#include <vector>

#include "dcfl/data.hpp"
#include "dcfl/network.hpp"
#include "dcfl/optimizer.hpp"
#include "dcfl/rng.hpp"

namespace dcfl::gan {

enum class GanQuality { vanilla, wasserstein };

struct LatentConfig {
    int K = 2;            // cluster count
    int d_n = 30;         // noise dimension
    double sigma = 0.10;  // noise std-dev
    double beta_n = 10.0;
    double beta_c = 10.0;
    GanQuality quality = GanQuality::vanilla;
    double clip = 0.01;  // wasserstein weight clipping bound

    int latent_dim() const { return d_n + K; }
    void validate() const;
};

struct GanTriple {
    nn::ParamSet generator;
    nn::ParamSet encoder;
    nn::ParamSet discriminator;
};

struct LatentCode {
    std::vector<double> z_n;  // length d_n
    std::vector<double> z_c;  // one-hot, length K

    std::vector<double> flat() const;
    int cluster() const;  // 1-based index of the hot entry
};

struct GanLosses {
    double d_loss = 0.0;
    double g_e_loss = 0.0;
    double recon_n = 0.0;
    double recon_c = 0.0;
};

struct GanOptState {
    nn::OptimizerState generator;
    nn::OptimizerState encoder;
    nn::OptimizerState discriminator;
};

// Gradients of the literal joint min-max objective value with respect to all
// three parameter sets; used by verification callers.
struct ObjectiveGrads {
    double value = 0.0;
    nn::Gradients generator;
    nn::Gradients encoder;
    nn::Gradients discriminator;
};

LatentCode sample_latent(const LatentConfig& cfg, Rng& rng);

// G: latent -> data, E: data -> latent (noise block + cluster logits),
// D: data -> one linear score.
GanTriple init_triple(const LatentConfig& cfg, int data_dim, const std::vector<int>& hidden,
                      Rng& rng);

GanLosses clustergan_losses(const GanTriple& triple,
                            const std::vector<std::vector<double>>& real_batch,
                            const std::vector<LatentCode>& latent_batch,
                            const LatentConfig& cfg);

ObjectiveGrads objective_grads(const GanTriple& triple,
                               const std::vector<std::vector<double>>& real_batch,
                               const std::vector<LatentCode>& latent_batch,
                               const LatentConfig& cfg);

// One alternating update: discriminator step, then generator+encoder step,
// each on fresh latent draws. Weight clipping in wasserstein mode.
GanTriple local_gan_step(const GanTriple& triple,
                         const std::vector<data::TimeSeriesSample>& samples,
                         const LatentConfig& cfg, GanOptState& opt, Rng& rng,
                         int batch_size);

// 1-based cluster id: argmax of the encoder's cluster block, ties toward the
// smallest index.
int infer_cluster(const nn::ParamSet& encoder, const data::TimeSeriesSample& sample,
                  const LatentConfig& cfg);

}  // namespace dcfl::gan
