#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "poai/common/capability.h"
#include "poai/common/codec.h"
#include "poai/common/crypto.h"
#include "poai/common/job.h"

namespace poai::distribution {

// A worker's signed statement of what it offers for one job.
struct CapabilityCommitment {
    JobId job;
    DeedId deedId;
    Capability declared;
    Signature signature{};

    static CapabilityCommitment make(const JobId& job, const DeedId& worker, const Capability& cap,
                                     const KeyPair& key);
    bool verify(const PublicKey& key) const;

    void encode(ByteWriter& w) const;
    static CapabilityCommitment decode(ByteReader& r);
    friend bool operator==(const CapabilityCommitment&, const CapabilityCommitment&) = default;
};

Bytes commitmentMessage(const JobId& job, const DeedId& worker, const Capability& cap);

using KeyLookup = std::function<std::optional<PublicKey>(const DeedId&)>;

// Keeps commitments whose signature verifies under the worker's known key,
// at most one per (job, worker): the first valid one wins.
std::vector<CapabilityCommitment> verifiedCommitments(std::span<const CapabilityCommitment> candidates,
                                                      const KeyLookup& keys);

// Workers whose declared capability dominates the requirement, ranked by
// (capability score desc, deedId asc).
std::vector<CapabilityCommitment> mapSearch(const Capability& requirements,
                                            std::span<const CapabilityCommitment> candidates,
                                            const CapabilityWeights& weights = {});

}  // namespace poai::distribution
