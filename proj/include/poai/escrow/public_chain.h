#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "poai/common/crypto.h"
#include "poai/common/job.h"
#include "poai/common/token.h"
#include "poai/ledger/payloads.h"
#include "poai/tokenomics/node.h"

namespace poai::escrow {

struct LockedFund {
    JobId job;
    Token amount;
    SimTime unlockTime = 0;
};

struct ChallengeBond {
    std::uint64_t challengeId = 0;
    DeedId challenger;
    Token amount;
};

struct PoolState {
    Token escrowPool;
    Token rewardPool;
    std::vector<LockedFund> lockedFunds;
    std::vector<ChallengeBond> challengeBonds;

    Token lockedTotal() const;
    Token bondTotal() const;
    friend bool operator==(const PoolState& a, const PoolState& b);
};

struct Job {
    JobId id;
    DeedId sender;
    Token reward;
    Digest specDigest{};
    std::uint32_t nWorkers = 1;
    JobStatus status = JobStatus::InProgress;
    SimTime createdAt = 0;
    std::optional<std::uint64_t> settledEpoch;  // epoch in which the reward reached the reward pool
    std::vector<DeedId> workers;
};

enum class ChallengeVerdict : std::uint8_t { Pending, Upheld, Rejected };
const char* challengeVerdictName(ChallengeVerdict v);

struct Challenge {
    std::uint64_t challengeId = 0;
    JobId job;
    DeedId challenger;
    Token bond;
    std::vector<DeedId> juryIds;
    ChallengeVerdict verdict = ChallengeVerdict::Pending;
    std::vector<ledger::JurorVote> votes;
    SimTime openedAt = 0;
};

enum class ReviewVerdict : std::uint8_t { WorkValid, WorkInvalid };

struct StatusTransition {
    JobId job;
    JobStatus from;
    JobStatus to;
    SimTime at;
};

struct EscrowConfig {
    Seconds reviewLockSeconds = 86400;
    std::size_t jurySize = 3;
};

// Jury draw: eligible = active nodes minus the excluded ids, sorted; the
// first jurySize of a seeded Fisher-Yates shuffle. Deterministic in
// (eligible set, seed, challengeId).
std::vector<DeedId> drawJury(std::span<const DeedId> activeNodes, std::span<const DeedId> excluded,
                             std::size_t jurySize, std::uint64_t seed, std::uint64_t challengeId);

// In-process model of the public chain: node-deed balances, escrow and
// reward pools, review locks and challenge bonds. Every mutating call is
// atomic: it either applies completely or throws ProtocolError leaving the
// state untouched.
class PublicChain {
public:
    explicit PublicChain(tokenomics::DeedRegistry deeds, EscrowConfig cfg = {});

    // Debits the sender and funds the escrow pool. The job starts IN_PROGRESS
    // with sequence = the sender's updated job count.
    const Job& submitJob(const DeedId& sender, const Token& reward, const Digest& specDigest,
                         std::uint32_t nWorkers, SimTime now);

    void recordWorkers(const JobId& job, std::vector<DeedId> workers);

    // DONE: escrow -> reward pool, SETTLED. CANCELLED: escrow -> review lock
    // until now + reviewLockSeconds, LOCKED_FOR_REVIEW.
    const PoolState& settleJob(const JobId& job, JobStatus finalStatus, SimTime now, std::uint64_t epoch);

    // Releases a review lock. Without an explicit verdict the lock must have
    // expired and no challenge may be pending; the default is WORK_VALID.
    const PoolState& resolveReview(const JobId& job, std::optional<ReviewVerdict> verdict, SimTime now,
                                   std::uint64_t epoch);

    const Challenge& openChallenge(const DeedId& challenger, const JobId& job, const Token& bond,
                                   std::uint64_t challengeId, std::uint64_t rngSeed,
                                   std::span<const DeedId> activeNodes, SimTime now, std::uint64_t epoch);

    const Challenge& resolveChallenge(std::uint64_t challengeId, std::span<const ledger::JurorVote> votes,
                                      SimTime now, std::uint64_t epoch);

    // Moves the whole reward pool into distribution and returns the snapshot.
    Token beginDistribution();
    // Credits one allocation amount out of the in-flight distribution.
    void creditReward(const DeedId& deed, const Token& amount);
    // Returns whatever the allocation did not hand out to the reward pool.
    void endDistribution();

    const PoolState& pools() const { return pools_; }
    const tokenomics::DeedRegistry& deeds() const { return deeds_; }
    const Job& job(const JobId& id) const;
    bool hasJob(const JobId& id) const { return jobs_.contains(id); }
    const std::map<JobId, Job>& jobs() const { return jobs_; }
    // On-chain status slot; cleared once the job leaves IN_PROGRESS.
    std::optional<JobStatus> onchainStatus(const JobId& id) const;
    const Challenge& challenge(std::uint64_t id) const;
    const std::map<std::uint64_t, Challenge>& challenges() const { return challenges_; }
    std::uint64_t jobCount(const DeedId& sender) const;
    const std::vector<StatusTransition>& transitions() const { return transitions_; }

    const Token& distributionInFlight() const { return inFlight_; }
    // Sum of every place a token can be. Constant over the chain's lifetime.
    Token totalSupply() const;

    // Cumulative flows, for audits.
    const Token& settledIntoRewardPool() const { return settledTotal_; }
    const Token& rejectedBondsIntoRewardPool() const { return rejectedBondsTotal_; }
    const Token& distributedTotal() const { return distributedTotal_; }
    const Token& refundedTotal() const { return refundedTotal_; }

private:
    Job& mutJob(const JobId& id);
    void transition(Job& job, JobStatus to, SimTime now);
    std::vector<LockedFund>::iterator findLock(const JobId& id);
    bool pendingChallengeOn(const JobId& id) const;

    tokenomics::DeedRegistry deeds_;
    EscrowConfig cfg_;
    PoolState pools_;
    std::map<JobId, Job> jobs_;
    std::map<JobId, JobStatus> onchainStatus_;
    std::map<DeedId, std::uint64_t> jobCount_;
    std::map<std::uint64_t, Challenge> challenges_;
    std::vector<StatusTransition> transitions_;
    Token inFlight_;
    bool distributing_ = false;
    Token settledTotal_;
    Token rejectedBondsTotal_;
    Token distributedTotal_;
    Token refundedTotal_;
};

}  // namespace poai::escrow
