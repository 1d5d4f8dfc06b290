#include "poai/common/crypto.h"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

namespace poai {
namespace {

void ensureSodium() {
    static const bool ready = [] { return sodium_init() >= 0; }();
    if (!ready) throw std::runtime_error("libsodium initialisation failed");
}

static_assert(sizeof(crypto_hash_sha256_state) <= 128);
static_assert(crypto_sign_PUBLICKEYBYTES == 32);
static_assert(crypto_sign_SECRETKEYBYTES == 64);
static_assert(crypto_sign_BYTES == 64);
static_assert(crypto_sign_SEEDBYTES == 32);

crypto_hash_sha256_state* asState(std::array<std::uint8_t, 128>& raw) {
    return reinterpret_cast<crypto_hash_sha256_state*>(raw.data());
}

}  // namespace

Digest sha256(std::span<const std::uint8_t> data) {
    ensureSodium();
    Digest out{};
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

Digest sha256(std::string_view text) {
    return sha256(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Sha256::Sha256() {
    ensureSodium();
    crypto_hash_sha256_init(asState(state_));
}

Sha256& Sha256::update(std::span<const std::uint8_t> data) {
    crypto_hash_sha256_update(asState(state_), data.data(), data.size());
    return *this;
}

Sha256& Sha256::update(std::string_view text) {
    return update(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Digest Sha256::finish() {
    Digest out{};
    crypto_hash_sha256_final(asState(state_), out.data());
    return out;
}

std::string toHex(std::span<const std::uint8_t> data) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string s;
    s.reserve(data.size() * 2);
    for (auto b : data) {
        s.push_back(kDigits[b >> 4]);
        s.push_back(kDigits[b & 0xF]);
    }
    return s;
}

std::optional<Bytes> fromHex(std::string_view hex) {
    if (hex.size() % 2 != 0) return std::nullopt;
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        const int hi = nibble(hex[i]);
        const int lo = nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

std::optional<Digest> digestFromHex(std::string_view hex) {
    auto bytes = fromHex(hex);
    if (!bytes || bytes->size() != 32) return std::nullopt;
    Digest d{};
    std::memcpy(d.data(), bytes->data(), 32);
    return d;
}

KeyPair KeyPair::fromSeed(const Digest& seed) {
    ensureSodium();
    KeyPair kp;
    crypto_sign_seed_keypair(kp.public_.data(), kp.secret_.data(), seed.data());
    return kp;
}

Signature KeyPair::sign(std::span<const std::uint8_t> message) const {
    Signature sig{};
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), secret_.data());
    return sig;
}

bool verifySignature(const PublicKey& key, std::span<const std::uint8_t> message,
                     const Signature& sig) {
    ensureSodium();
    return crypto_sign_verify_detached(sig.data(), message.data(), message.size(), key.data()) == 0;
}

}  // namespace poai
