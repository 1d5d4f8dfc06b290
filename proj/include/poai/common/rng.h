#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace poai {

// Seeded pseudo-random stream. Substreams are derived by hashing a label into
// the parent seed, so adding a new consumer never perturbs existing draws.
// Distributions are implemented here rather than with <random> adaptors,
// whose output is not specified across standard libraries.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view label);

    RngStream derive(std::string_view label) const;

    std::uint64_t next() { return engine_(); }
    double uniform01();
    // Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    bool bernoulli(double p);

    std::uint64_t seed() const { return seed_; }

private:
    explicit RngStream(std::uint64_t derivedSeed);

    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace poai
