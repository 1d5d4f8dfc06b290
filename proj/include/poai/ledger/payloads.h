#pragma once

// Canonical payloads for the entry kinds the ledger itself interprets:
// node specs (key directory), job status, challenges, reward records and
// pool events. Assignment and progress-proof payloads belong to the
// distribution layer and are opaque here.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "poai/common/capability.h"
#include "poai/common/codec.h"
#include "poai/common/crypto.h"
#include "poai/common/job.h"
#include "poai/common/token.h"

namespace poai::ledger {

struct NodeSpecPayload {
    DeedId deedId;
    PublicKey ownerKey{};
    Capability capability;
    std::string region;

    Bytes encode() const;
    static NodeSpecPayload decode(std::span<const std::uint8_t> bytes);
};

struct JobStatusPayload {
    JobId job;
    JobStatus status = JobStatus::InProgress;
    Digest resultDigest{};  // aggregate digest for DONE, zero otherwise
    std::string reason;

    Bytes encode() const;
    static JobStatusPayload decode(std::span<const std::uint8_t> bytes);
};

enum class ChallengeAction : std::uint8_t { Open = 0, Resolve = 1 };

struct JurorVote {
    DeedId juror;
    bool upheld = false;
    friend bool operator==(const JurorVote&, const JurorVote&) = default;
};

struct ChallengePayload {
    ChallengeAction action = ChallengeAction::Open;
    std::uint64_t challengeId = 0;
    JobId job;
    DeedId challenger;
    Token bond;
    std::uint64_t jurySeed = 0;
    std::vector<JurorVote> votes;  // Resolve only

    Bytes encode() const;
    static ChallengePayload decode(std::span<const std::uint8_t> bytes);
};

struct RewardRow {
    DeedId deedId;
    double share = 0.0;
    Token amount;
    double powerScore = 0.0;
    double aliveFraction = 0.0;
};

struct RewardRecordPayload {
    std::uint64_t epoch = 0;
    Token poolSnapshot;
    bool rolledOver = false;
    std::vector<RewardRow> rows;

    Bytes encode() const;
    static RewardRecordPayload decode(std::span<const std::uint8_t> bytes);
};

struct PoolEventPayload {
    std::string event;  // e.g. "fund", "review-release", "rollover"
    std::optional<JobId> job;
    Token amount;
    std::string detail;

    Bytes encode() const;
    static PoolEventPayload decode(std::span<const std::uint8_t> bytes);
};

}  // namespace poai::ledger
