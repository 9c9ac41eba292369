// Compares the serial reference client fan-out against the OpenMP kernel on a
// Phase-1-sized workload and checks that both produce identical aggregates.
#include <chrono>
#include <cstdio>
#include <vector>

#include "dcfl/clustergan.hpp"
#include "dcfl/data.hpp"
#include "dcfl/fedsim.hpp"
#include "dcfl/parallel.hpp"

using namespace dcfl;

namespace {

double run_rounds(const data::ClientPool& pool, const gan::LatentConfig& latent,
                  fed::Phase1Config cfg, std::vector<double>& fingerprint) {
    const auto ids = fed::all_client_ids(pool);
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = fed::run_phase1(pool, ids, latent, cfg, 42);
    const auto t1 = std::chrono::steady_clock::now();
    fingerprint = res.triple.encoder.values;
    return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main() {
    Rng rng(7);
    auto samples = data::synth_sinusoid_classes(120, 24, 3, 0.05, rng);
    samples = data::normalize(samples, data::NormalizeMode::dataset_minmax);
    auto pool = data::partition_non_iid(samples, 12, {}, {}, 7);

    gan::LatentConfig latent;
    latent.K = 3;
    latent.d_n = 10;

    fed::Phase1Config cfg;
    cfg.rounds = 30;
    cfg.batch_size = 16;
    cfg.hidden = {32, 32};
    cfg.opt_template.kind = nn::OptimizerKind::rmsprop;

    std::vector<double> serial_fp, parallel_fp;
    cfg.workers = 1;
    const double serial_s = run_rounds(pool, latent, cfg, serial_fp);
    cfg.workers = 4;
    const double parallel_s = run_rounds(pool, latent, cfg, parallel_fp);

    std::printf("serial:   %.3f s\n", serial_s);
    std::printf("parallel: %.3f s (4 workers)\n", parallel_s);
    std::printf("speedup:  %.2fx\n", serial_s / parallel_s);
    std::printf("bitwise identical aggregates: %s\n",
                serial_fp == parallel_fp ? "yes" : "NO");
    return serial_fp == parallel_fp ? 0 : 1;
}
