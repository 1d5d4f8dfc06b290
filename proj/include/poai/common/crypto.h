#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "poai/common/types.h"

namespace poai {

// 256-bit digest and deterministic Ed25519 signatures. Callers treat both as
// opaque primitives; nothing outside this header depends on the algorithms.
using Digest = std::array<std::uint8_t, 32>;
using PublicKey = std::array<std::uint8_t, 32>;
using Signature = std::array<std::uint8_t, 64>;

inline constexpr Digest kZeroDigest{};

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view text);

class Sha256 {
public:
    Sha256();
    Sha256& update(std::span<const std::uint8_t> data);
    Sha256& update(std::string_view text);
    Sha256& update(const Digest& d) { return update(std::span<const std::uint8_t>(d)); }
    Digest finish();

private:
    alignas(64) std::array<std::uint8_t, 128> state_{};
};

std::string toHex(std::span<const std::uint8_t> data);
std::optional<Bytes> fromHex(std::string_view hex);
std::optional<Digest> digestFromHex(std::string_view hex);

class KeyPair {
public:
    // Deterministic keypair; the same seed always yields the same keys.
    static KeyPair fromSeed(const Digest& seed);

    const PublicKey& publicKey() const { return public_; }
    Signature sign(std::span<const std::uint8_t> message) const;

private:
    PublicKey public_{};
    std::array<std::uint8_t, 64> secret_{};
};

bool verifySignature(const PublicKey& key, std::span<const std::uint8_t> message,
                     const Signature& sig);

}  // namespace poai
