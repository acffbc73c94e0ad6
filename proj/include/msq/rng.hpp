#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace msq {

// Independent substream of pseudo-random numbers: (seed, stream) pairs are
// hashed apart, so replications and purposes (arrivals vs. job sampling)
// never share state.  mt19937_64 seeded with a single word is fully
// specified, so runs are bit-reproducible everywhere.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : engine_(mix(seed + 0x9e3779b97f4a7c15ULL * (stream + 1))) {}

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

    // Index drawn according to `probs` (assumed to sum to 1).
    std::size_t pick(const std::vector<double>& probs) {
        double u = uniform01();
        double cum = 0.0;
        for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
            cum += probs[k];
            if (u < cum) return k;
        }
        return probs.size() - 1;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
};

}  // namespace msq
