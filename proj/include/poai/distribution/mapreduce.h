#pragma once

#include <optional>
#include <span>
#include <vector>

#include "poai/distribution/capability.h"
#include "poai/pipeline/spec.h"

namespace poai::distribution {

struct Shard {
    DeedId worker;
    pipeline::ParamMap shardSpec;
    friend bool operator==(const Shard&, const Shard&) = default;
};

// Published to the ledger as a JOB_ASSIGN entry before any work starts.
struct Assignment {
    JobId job;
    Digest specDigest{};
    std::vector<Shard> shards;
    std::uint64_t publishedAt = 0;  // ledger height at publication
    std::vector<CapabilityCommitment> commitments;  // of the assigned workers, in shard order

    Bytes encode() const;
    static Assignment decode(std::span<const std::uint8_t> bytes);
    std::optional<std::size_t> shardOf(const DeedId& worker) const;
    friend bool operator==(const Assignment&, const Assignment&) = default;
};

// The first nWorkers of the ranked list each get one shard. nullopt when the
// list is too short: the job stays PENDING and the caller retries later.
std::optional<Assignment> mapAssign(const JobId& job, std::uint32_t nWorkers, const pipeline::PipelineSpec& spec,
                                    std::span<const CapabilityCommitment> ranked, std::uint64_t ledgerHeight);

struct ShardResult {
    DeedId worker;
    Digest payloadDigest{};
    Bytes payload;
};

struct GatherOutcome {
    std::optional<Bytes> aggregate;  // set only when every shard delivered a verified result
    Digest aggregateDigest{};
    std::vector<DeedId> mismatched;  // payload did not match its digest; penalize
    std::vector<DeedId> missing;     // assigned workers without a verified result

    bool complete() const { return aggregate.has_value(); }
};

// Aggregate = verified shard payloads concatenated in shard order.
GatherOutcome reduceGather(const Assignment& assignment, std::span<const ShardResult> results);

}  // namespace poai::distribution
