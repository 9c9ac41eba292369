#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace dcfl {

// Deterministic stream splitting: every client, phase and sub-step derives
// its own generator from (root seed, label), so the execution order of
// parallel workers cannot change any drawn number.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Derive an independent child stream keyed by a label and an index.
    // Uses splitmix64 finalization over a FNV-1a hash of the label.
    static Rng derive(std::uint64_t root, std::string_view label, std::uint64_t index = 0) {
        std::uint64_t h = 1469598103934665603ull;
        for (char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        std::uint64_t x = root ^ h ^ (index * 0x9e3779b97f4a7c15ull);
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        x = x ^ (x >> 31);
        return Rng(x);
    }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    // inclusive bounds
    int uniform_int(int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(engine_);
    }

    double normal(double mean, double stddev) {
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }

    std::uint64_t next_u64() { return engine_(); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace dcfl
