#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "poai/common/job.h"
#include "poai/common/token.h"
#include "poai/ledger/entry.h"
#include "poai/ledger/payloads.h"

namespace poai::ledger {

struct SettleJobCommand {
    JobId job;
    JobStatus finalStatus = JobStatus::Done;
    friend bool operator==(const SettleJobCommand&, const SettleJobCommand&) = default;
};

struct CreditDeedCommand {
    DeedId deedId;
    Token amount;
    std::uint64_t epoch = 0;
    friend bool operator==(const CreditDeedCommand&, const CreditDeedCommand&) = default;
};

struct OpenChallengeCommand {
    std::uint64_t challengeId = 0;
    JobId job;
    DeedId challenger;
    Token bond;
    std::uint64_t jurySeed = 0;
    friend bool operator==(const OpenChallengeCommand&, const OpenChallengeCommand&) = default;
};

struct ResolveChallengeCommand {
    std::uint64_t challengeId = 0;
    std::vector<JurorVote> votes;
    friend bool operator==(const ResolveChallengeCommand&, const ResolveChallengeCommand&) = default;
};

using PoolCommand =
    std::variant<SettleJobCommand, CreditDeedCommand, OpenChallengeCommand, ResolveChallengeCommand>;

// Translates a committed private-ledger entry into public pool commands.
// Pure: JOB_STATUS DONE/CANCELLED -> settle, REWARD_RECORD -> one credit per
// positive amount, CHALLENGE -> open/resolve; every other kind (and any
// undecodable payload) -> nothing.
std::vector<PoolCommand> oracleMirror(const LedgerEntry& entry);

}  // namespace poai::ledger
