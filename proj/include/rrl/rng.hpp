#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "rrl/errors.hpp"

namespace rrl {

// Deterministic random source. Every random draw in a run flows through an
// Rng seeded from the run manifest; no wall-clock entropy anywhere.
//
// The normal variate is generated from two uniforms per draw (no cached
// spare), so the stream position is fully captured by the engine state and
// checkpoints can serialize it as text.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    // uniform in [0, 1), 53-bit resolution
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal, Box-Muller
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    // uniform integer in [0, n), rejection sampled so every index is exactly
    // equally likely
    std::size_t index(std::size_t n) {
        if (n == 0) throw Error("Rng::index: empty range");
        const std::uint64_t limit =
            std::numeric_limits<std::uint64_t>::max() -
            std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return static_cast<std::size_t>(x % n);
    }

    std::string state() const {
        std::ostringstream os;
        os << engine_;
        return os.str();
    }

    void restore(const std::string& s) {
        std::istringstream is(s);
        is >> engine_;
        if (is.fail()) throw Error("Rng::restore: malformed engine state");
    }

    bool operator==(const Rng& other) const { return engine_ == other.engine_; }

private:
    std::mt19937_64 engine_;
};

// Cheap integer mix for deriving independent stream seeds from one master
// seed (splitmix64 finalizer).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace rrl
