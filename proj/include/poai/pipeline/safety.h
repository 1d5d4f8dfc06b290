#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "poai/common/crypto.h"
#include "poai/common/types.h"

namespace poai::pipeline {

struct DenyClass {
    std::string name;
    std::string label;  // reason text reported on a hit
    std::set<std::string> tokens;
};

struct SafetyPolicy {
    std::size_t maxBytes = 256;
    std::size_t maxTokens = 96;
    std::size_t maxDepth = 12;
    std::set<std::string> allowedIdentifiers;
    std::vector<DenyClass> deny;
};

// YAML policy; throws ProtocolError(MalformedConfig) with line numbers.
SafetyPolicy loadSafetyPolicy(std::string_view yamlText);
SafetyPolicy loadSafetyPolicyFile(const std::string& path);
// Same content as config/safety_policy.yaml.
const SafetyPolicy& defaultSafetyPolicy();
std::string_view defaultSafetyPolicyText();

struct Verdict {
    enum class Kind : std::uint8_t { Unchecked, Safe, Rejected };
    Kind kind = Kind::Unchecked;
    std::vector<std::string> reasons;

    bool safe() const { return kind == Kind::Safe; }
    static Verdict ok() { return {Kind::Safe, {}}; }
    static Verdict rejected(std::vector<std::string> reasons) { return {Kind::Rejected, std::move(reasons)}; }
    std::string toString() const;
};

struct PluginCode {
    std::string source;
    Digest codeHash{};
    DeedId author;
    PublicKey authorKey{};
    std::optional<Signature> signature;
    Verdict verdict;  // local judgement, never transmitted

    static PluginCode fromSource(std::string source);
    void sign(const DeedId& author, const KeyPair& key);

    Bytes encodeWire() const;
    // Throws DecodeError. The decoded code is Unchecked.
    static PluginCode decodeWire(std::span<const std::uint8_t> bytes);
};

Bytes pluginSigningMessage(const DeedId& author, const Digest& codeHash);

// Pure: the verdict depends only on the source bytes and the policy.
Verdict safetyCheck(const PluginCode& code, const SafetyPolicy& policy);
Verdict safetyCheck(std::string_view source, const SafetyPolicy& policy);

// Run at every hop that receives code: the digest must match the source, the
// key must be the expected author's, and the signature must verify.
Verdict hashSignRecheck(const PluginCode& code, const PublicKey& expectedAuthor, std::uint32_t hop);

}  // namespace poai::pipeline
