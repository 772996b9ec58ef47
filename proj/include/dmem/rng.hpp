#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dmem {

// Deterministic random source. Distributions are implemented here rather than
// taken from <random> so that sample sequences do not depend on the standard
// library vendor.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, bound), unbiased (rejection sampling).
    std::uint64_t below(std::uint64_t bound);

    // Standard normal via Box-Muller; the second variate is cached.
    double normal();

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent seed for a named stream ("init", "batching",
// "synthesis", "split") from a run's root seed.
std::uint64_t stream_seed(std::uint64_t root, std::string_view stream);

}  // namespace dmem
