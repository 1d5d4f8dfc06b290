#include "poai/common/rng.h"

#include <stdexcept>

#include "poai/common/crypto.h"

namespace poai {
namespace {

std::uint64_t mixLabel(std::uint64_t seed, std::string_view label) {
    Sha256 h;
    std::array<std::uint8_t, 8> s{};
    for (int i = 0; i < 8; ++i) s[i] = static_cast<std::uint8_t>(seed >> (56 - 8 * i));
    h.update(std::span<const std::uint8_t>(s)).update(label);
    const auto d = h.finish();
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | d[i];
    return v;
}

}  // namespace

RngStream::RngStream(std::uint64_t derivedSeed) : seed_(derivedSeed), engine_(derivedSeed) {}

RngStream::RngStream(std::uint64_t seed, std::string_view label)
    : RngStream(mixLabel(seed, label)) {}

RngStream RngStream::derive(std::string_view label) const {
    return RngStream(mixLabel(seed_, label));
}

double RngStream::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("RngStream::below: zero bound");
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
}

// Always consumes exactly one draw so the stream position does not depend on p.
bool RngStream::bernoulli(double p) {
    return uniform01() < p;
}

}  // namespace poai
