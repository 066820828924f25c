#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ivproc {

/// SplitMix64 mixing step. Used to derive independent child seeds from a
/// master seed so that replications can run in parallel yet stay
/// reproducible regardless of scheduling.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return mix_seed(master ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

/// Seeded random source with explicit sampling code for every
/// distribution we use. std::mt19937_64 has a portable bit stream, and by
/// avoiding std::*_distribution the draws are identical across standard
/// library implementations, which keeps simulation output bit-reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0, 1), never returning an exact endpoint.
    double uniform_open() {
        return (static_cast<double>(engine_() >> 12) + 0.5) * 0x1.0p-52;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via the Marsaglia polar method.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u = 0.0, v = 0.0, s = 0.0;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double factor = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * factor;
        have_spare_ = true;
        return u * factor;
    }

    /// Exponential with the given rate; strictly positive.
    double exponential(double rate) { return -std::log(uniform_open()) / rate; }

    /// Uniform integer in [0, bound).
    std::uint64_t uniform_index(std::uint64_t bound) {
        // modulo bias is irrelevant at the bounds used here (graph sizes)
        return engine_() % bound;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace ivproc
