#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "poai/distribution/progress.h"
#include "poai/escrow/public_chain.h"
#include "poai/ledger/chain.h"
#include "poai/ledger/dump.h"
#include "poai/simnet/broker.h"
#include "poai/tokenomics/rewards.h"

namespace poai::simnet {

struct EpochRecord {
    std::uint64_t epoch = 0;
    SimTime at = 0;
    tokenomics::RewardAllocation allocation;
    escrow::PoolState pools;  // after the distribution
};

struct TimelineEvent {
    JobId job;
    SimTime at = 0;
    std::uint64_t height = 0;  // block carrying the event's entries, else the head at the time
    std::string event;
    std::string detail;
};

struct PenaltyRecord {
    SimTime at = 0;
    std::uint64_t epoch = 0;
    DeedId deedId;
    std::string reason;
    double delta = 0;
    double before = 0;
    double after = 0;
};

struct ProgressRecord {
    SimTime at = 0;
    JobId job;
    DeedId worker;
    std::uint64_t linkIndex = 0;
    distribution::ProgressStatus status = distribution::ProgressStatus::Ok;
};

struct SettlementRecord {
    SimTime at = 0;
    JobId job;
    JobStatus status = JobStatus::Done;
    Token escrowBefore, escrowAfter;
    Token rewardBefore, rewardAfter;
    Token lockedBefore, lockedAfter;
};

struct ChallengeRecord {
    std::uint64_t challengeId = 0;
    JobId job;
    DeedId challenger;
    Token bond;
    std::vector<DeedId> jury;
    escrow::ChallengeVerdict verdict = escrow::ChallengeVerdict::Pending;
    std::vector<ledger::JurorVote> votes;
    std::string refused;  // error text when the chain refused to open it
};

struct OracleRejection {
    SimTime at = 0;
    std::uint64_t height = 0;
    std::string command;
    std::string error;
};

struct JobRecord {
    std::size_t index = 0;
    std::optional<JobId> id;
    std::string outcome;  // funded, unfunded, refused, sender-offline
    std::vector<DeedId> workers;
    std::optional<Digest> aggregateDigest;
    std::optional<std::uint64_t> assignHeight;
    std::optional<JobStatus> finalStatus;
};

struct SimReport {
    std::string scenario;
    std::uint64_t seed = 0;
    bool seedOverridden = false;
    Digest configDigest{};
    Seconds epochSeconds = 0;
    std::uint64_t horizonEpochs = 0;

    std::vector<EpochRecord> epochs;
    std::vector<JobRecord> jobs;
    std::vector<TimelineEvent> timeline;
    std::vector<PenaltyRecord> penalties;
    std::vector<ProgressRecord> progress;
    std::vector<SettlementRecord> settlements;
    std::vector<ChallengeRecord> challenges;
    std::vector<OracleRejection> oracleRejections;
    std::vector<escrow::StatusTransition> transitions;

    BrokerAudit broker;
    std::uint64_t eventsProcessed = 0;
    SimTime lastEventAt = 0;
    std::uint64_t conservationChecks = 0;
    std::optional<std::string> conservationViolation;

    Token initialSupply;
    Token finalSupply;
    escrow::PoolState finalPools;
    Token settledTotal;
    Token rejectedBondsTotal;
    Token distributedTotal;
    Token refundedTotal;
    std::map<DeedId, Token> finalBalances;
    std::map<DeedId, Seconds> aliveSeconds;
    std::map<DeedId, std::map<std::uint64_t, Seconds>> aliveByEpoch;

    std::vector<ledger::LedgerBlock> blocks;

    const EpochRecord* epoch(std::uint64_t e) const;
    const JobRecord* job(const JobId& id) const;
};

enum class ReportFormat : std::uint8_t { Records, Summary };

// JSON lines; token amounts are exact decimal strings. Byte-identical for
// identical reports.
std::string renderReport(const SimReport& report, ReportFormat format);

ledger::LedgerDump ledgerDump(const SimReport& report);

}  // namespace poai::simnet
