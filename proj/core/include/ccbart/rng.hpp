#pragma once

#include <cstdint>
#include <random>

namespace ccbart {

// splitmix64, used to derive independent child seeds.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic RNG handle. Single-owner: never share one instance between
// threads; derive substreams instead.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix_seed(seed)) {}

    // child RNG with a stream index folded into the seed
    Rng substream(std::uint64_t idx) const {
        return Rng(mix_seed(seed_ ^ mix_seed(idx + 1)));
    }

    std::uint64_t seed() const { return seed_; }

    // uniform on the open interval (0,1)
    double uniform() {
        double u;
        do {
            u = std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
        } while (u <= 0.0 || u >= 1.0);
        return u;
    }

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    double gamma(double shape, double scale) {
        return std::gamma_distribution<double>(shape, scale)(engine_);
    }

    double exponential() { return std::exponential_distribution<double>(1.0)(engine_); }

    std::size_t uniform_index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace ccbart
