#include "poai/escrow/public_chain.h"

#include <algorithm>
#include <set>

#include "poai/common/error.h"
#include "poai/common/rng.h"

namespace poai::escrow {
namespace {

bool allowedTransition(JobStatus from, JobStatus to) {
    using S = JobStatus;
    switch (from) {
        case S::Pending: return to == S::InProgress;
        case S::InProgress: return to == S::Done || to == S::Cancelled;
        case S::Done: return to == S::Settled;
        case S::Cancelled: return to == S::LockedForReview;
        case S::LockedForReview: return to == S::Settled || to == S::Refunded;
        // Only reachable through an upheld challenge against a job whose
        // reward has not yet been distributed.
        case S::Settled: return to == S::Refunded;
        case S::Refunded: return false;
    }
    return false;
}

}  // namespace

Token PoolState::lockedTotal() const {
    Token sum;
    for (const auto& l : lockedFunds) sum += l.amount;
    return sum;
}

Token PoolState::bondTotal() const {
    Token sum;
    for (const auto& b : challengeBonds) sum += b.amount;
    return sum;
}

bool operator==(const PoolState& a, const PoolState& b) {
    if (a.escrowPool != b.escrowPool || a.rewardPool != b.rewardPool) return false;
    if (a.lockedFunds.size() != b.lockedFunds.size() || a.challengeBonds.size() != b.challengeBonds.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.lockedFunds.size(); ++i) {
        const auto& x = a.lockedFunds[i];
        const auto& y = b.lockedFunds[i];
        if (x.job != y.job || x.amount != y.amount || x.unlockTime != y.unlockTime) return false;
    }
    for (std::size_t i = 0; i < a.challengeBonds.size(); ++i) {
        const auto& x = a.challengeBonds[i];
        const auto& y = b.challengeBonds[i];
        if (x.challengeId != y.challengeId || x.challenger != y.challenger || x.amount != y.amount) return false;
    }
    return true;
}

const char* challengeVerdictName(ChallengeVerdict v) {
    switch (v) {
        case ChallengeVerdict::Pending: return "PENDING";
        case ChallengeVerdict::Upheld: return "UPHELD";
        case ChallengeVerdict::Rejected: return "REJECTED";
    }
    return "?";
}

std::vector<DeedId> drawJury(std::span<const DeedId> activeNodes, std::span<const DeedId> excluded,
                             std::size_t jurySize, std::uint64_t seed, std::uint64_t challengeId) {
    const std::set<DeedId> skip(excluded.begin(), excluded.end());
    std::set<DeedId> eligibleSet;
    for (const auto& id : activeNodes) {
        if (!skip.contains(id)) eligibleSet.insert(id);
    }
    std::vector<DeedId> eligible(eligibleSet.begin(), eligibleSet.end());
    if (eligible.size() < jurySize) {
        throw ProtocolError(Errc::NoEligibleJurors, std::to_string(eligible.size()) +
                                                        " eligible jurors, need " + std::to_string(jurySize));
    }
    RngStream rng(seed, "jury/" + std::to_string(challengeId));
    for (std::size_t i = 0; i < jurySize; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(eligible.size() - i));
        std::swap(eligible[i], eligible[j]);
    }
    eligible.resize(jurySize);
    return eligible;
}

PublicChain::PublicChain(tokenomics::DeedRegistry deeds, EscrowConfig cfg)
    : deeds_(std::move(deeds)), cfg_(cfg) {
    if (cfg_.reviewLockSeconds < 0) throw ProtocolError(Errc::InvalidArgument, "negative review lock");
    if (cfg_.jurySize == 0 || cfg_.jurySize % 2 == 0) {
        throw ProtocolError(Errc::InvalidArgument, "jury size must be odd");
    }
}

Job& PublicChain::mutJob(const JobId& id) {
    const auto it = jobs_.find(id);
    if (it == jobs_.end()) throw ProtocolError(Errc::UnknownJob, "unknown job " + id.toString());
    return it->second;
}

const Job& PublicChain::job(const JobId& id) const {
    const auto it = jobs_.find(id);
    if (it == jobs_.end()) throw ProtocolError(Errc::UnknownJob, "unknown job " + id.toString());
    return it->second;
}

std::optional<JobStatus> PublicChain::onchainStatus(const JobId& id) const {
    const auto it = onchainStatus_.find(id);
    if (it == onchainStatus_.end()) return std::nullopt;
    return it->second;
}

const Challenge& PublicChain::challenge(std::uint64_t id) const {
    const auto it = challenges_.find(id);
    if (it == challenges_.end()) {
        throw ProtocolError(Errc::UnknownChallenge, "unknown challenge " + std::to_string(id));
    }
    return it->second;
}

std::uint64_t PublicChain::jobCount(const DeedId& sender) const {
    const auto it = jobCount_.find(sender);
    return it == jobCount_.end() ? 0 : it->second;
}

void PublicChain::transition(Job& job, JobStatus to, SimTime now) {
    if (!allowedTransition(job.status, to)) {
        throw ProtocolError(Errc::InvalidTransition, job.id.toString() + ": " + jobStatusName(job.status) +
                                                         " -> " + jobStatusName(to) + " not allowed");
    }
    transitions_.push_back({job.id, job.status, to, now});
    job.status = to;
}

std::vector<LockedFund>::iterator PublicChain::findLock(const JobId& id) {
    return std::find_if(pools_.lockedFunds.begin(), pools_.lockedFunds.end(),
                        [&](const LockedFund& l) { return l.job == id; });
}

bool PublicChain::pendingChallengeOn(const JobId& id) const {
    return std::any_of(challenges_.begin(), challenges_.end(), [&](const auto& kv) {
        return kv.second.job == id && kv.second.verdict == ChallengeVerdict::Pending;
    });
}

const Job& PublicChain::submitJob(const DeedId& sender, const Token& reward, const Digest& specDigest,
                                  std::uint32_t nWorkers, SimTime now) {
    if (!(reward > Token{})) throw ProtocolError(Errc::InvalidArgument, "job reward must be positive");
    if (nWorkers == 0) throw ProtocolError(Errc::InvalidArgument, "job needs at least one worker");
    deeds_.debit(sender, reward);

    const std::uint64_t seq = ++jobCount_[sender];
    Job job;
    job.id = JobId{sender, seq};
    job.sender = sender;
    job.reward = reward;
    job.specDigest = specDigest;
    job.nWorkers = nWorkers;
    job.status = JobStatus::InProgress;
    job.createdAt = now;
    pools_.escrowPool += reward;
    onchainStatus_[job.id] = JobStatus::InProgress;
    const JobId id = job.id;
    return jobs_.emplace(id, std::move(job)).first->second;
}

void PublicChain::recordWorkers(const JobId& id, std::vector<DeedId> workers) {
    mutJob(id).workers = std::move(workers);
}

const PoolState& PublicChain::settleJob(const JobId& id, JobStatus finalStatus, SimTime now,
                                        std::uint64_t epoch) {
    auto& job = mutJob(id);
    if (job.status != JobStatus::InProgress) {
        throw ProtocolError(Errc::AlreadySettled, id.toString() + " already settled (" +
                                                      jobStatusName(job.status) + ")");
    }
    if (finalStatus != JobStatus::Done && finalStatus != JobStatus::Cancelled) {
        throw ProtocolError(Errc::InvalidArgument, "final status must be DONE or CANCELLED");
    }
    pools_.escrowPool -= job.reward;
    if (finalStatus == JobStatus::Done) {
        transition(job, JobStatus::Done, now);
        transition(job, JobStatus::Settled, now);
        pools_.rewardPool += job.reward;
        settledTotal_ += job.reward;
        job.settledEpoch = epoch;
    } else {
        transition(job, JobStatus::Cancelled, now);
        transition(job, JobStatus::LockedForReview, now);
        pools_.lockedFunds.push_back({id, job.reward, now + cfg_.reviewLockSeconds});
    }
    onchainStatus_.erase(id);
    return pools_;
}

const PoolState& PublicChain::resolveReview(const JobId& id, std::optional<ReviewVerdict> verdict, SimTime now,
                                            std::uint64_t epoch) {
    auto& job = mutJob(id);
    const auto lock = findLock(id);
    if (lock == pools_.lockedFunds.end()) {
        throw ProtocolError(Errc::UnknownJob, id.toString() + " has no locked funds");
    }
    if (!verdict) {
        if (now < lock->unlockTime) {
            throw ProtocolError(Errc::ReviewNotDue, id.toString() + " review lock runs until " +
                                                        std::to_string(lock->unlockTime));
        }
        if (pendingChallengeOn(id)) {
            throw ProtocolError(Errc::ReviewNotDue, id.toString() + " has a pending challenge");
        }
        verdict = ReviewVerdict::WorkValid;
    }
    const Token amount = lock->amount;
    if (*verdict == ReviewVerdict::WorkValid) {
        if (job.status != JobStatus::Settled) transition(job, JobStatus::Settled, now);
        pools_.rewardPool += amount;
        settledTotal_ += amount;
        job.settledEpoch = epoch;
    } else {
        transition(job, JobStatus::Refunded, now);
        deeds_.credit(job.sender, amount);
        refundedTotal_ += amount;
    }
    pools_.lockedFunds.erase(findLock(id));
    return pools_;
}

const Challenge& PublicChain::openChallenge(const DeedId& challenger, const JobId& id, const Token& bond,
                                            std::uint64_t challengeId, std::uint64_t rngSeed,
                                            std::span<const DeedId> activeNodes, SimTime now,
                                            std::uint64_t epoch) {
    auto& job = mutJob(id);
    if (challenges_.contains(challengeId)) {
        throw ProtocolError(Errc::InvalidArgument, "challenge id " + std::to_string(challengeId) + " reused");
    }
    if (!(bond > Token{})) throw ProtocolError(Errc::InvalidArgument, "challenge bond must be positive");
    if (deeds_.balance(challenger) < bond) {
        throw ProtocolError(Errc::InsufficientBalance, "challenger " + challenger + " cannot cover bond " +
                                                           bond.toString());
    }
    const bool locked = job.status == JobStatus::LockedForReview;
    const bool freshlySettled = job.status == JobStatus::Settled && job.settledEpoch == epoch &&
                                findLock(id) == pools_.lockedFunds.end();
    if (!locked && !freshlySettled) {
        throw ProtocolError(Errc::ChallengeNotAllowed, id.toString() + " is " + jobStatusName(job.status) +
                                                           "; challenges need a locked or freshly settled job");
    }
    if (pendingChallengeOn(id)) {
        throw ProtocolError(Errc::ChallengeNotAllowed, id.toString() + " already has a pending challenge");
    }
    if (freshlySettled && pools_.rewardPool < job.reward) {
        throw ProtocolError(Errc::ChallengeNotAllowed, id.toString() + " reward already distributed");
    }

    std::vector<DeedId> excluded{challenger, job.sender};
    excluded.insert(excluded.end(), job.workers.begin(), job.workers.end());
    Challenge c;
    c.challengeId = challengeId;
    c.job = id;
    c.challenger = challenger;
    c.bond = bond;
    c.juryIds = drawJury(activeNodes, excluded, cfg_.jurySize, rngSeed, challengeId);
    c.openedAt = now;

    deeds_.debit(challenger, bond);
    pools_.challengeBonds.push_back({challengeId, challenger, bond});
    if (freshlySettled) {
        // Freeze the disputed reward until the verdict.
        pools_.rewardPool -= job.reward;
        settledTotal_ -= job.reward;
        pools_.lockedFunds.push_back({id, job.reward, now + cfg_.reviewLockSeconds});
    }
    return challenges_.emplace(challengeId, std::move(c)).first->second;
}

const Challenge& PublicChain::resolveChallenge(std::uint64_t challengeId,
                                               std::span<const ledger::JurorVote> votes, SimTime now,
                                               std::uint64_t epoch) {
    const auto it = challenges_.find(challengeId);
    if (it == challenges_.end()) {
        throw ProtocolError(Errc::UnknownChallenge, "unknown challenge " + std::to_string(challengeId));
    }
    auto& c = it->second;
    if (c.verdict != ChallengeVerdict::Pending) {
        throw ProtocolError(Errc::InvalidTransition, "challenge " + std::to_string(challengeId) + " already decided");
    }
    if (votes.size() != c.juryIds.size()) {
        throw ProtocolError(Errc::BadVotes, std::to_string(votes.size()) + " votes for a jury of " +
                                                std::to_string(c.juryIds.size()));
    }
    std::set<DeedId> seen;
    std::size_t upheld = 0;
    for (const auto& v : votes) {
        if (std::find(c.juryIds.begin(), c.juryIds.end(), v.juror) == c.juryIds.end()) {
            throw ProtocolError(Errc::BadVotes, v.juror + " is not on the jury");
        }
        if (!seen.insert(v.juror).second) throw ProtocolError(Errc::BadVotes, "duplicate vote by " + v.juror);
        if (v.upheld) ++upheld;
    }
    const bool isUpheld = upheld * 2 > votes.size();

    const auto bondIt = std::find_if(pools_.challengeBonds.begin(), pools_.challengeBonds.end(),
                                     [&](const ChallengeBond& b) { return b.challengeId == challengeId; });
    const Token bond = bondIt->amount;
    pools_.challengeBonds.erase(bondIt);
    if (isUpheld) {
        deeds_.credit(c.challenger, bond);
    } else {
        pools_.rewardPool += bond;
        rejectedBondsTotal_ += bond;
    }
    c.verdict = isUpheld ? ChallengeVerdict::Upheld : ChallengeVerdict::Rejected;
    c.votes.assign(votes.begin(), votes.end());

    if (findLock(c.job) != pools_.lockedFunds.end()) {
        resolveReview(c.job, isUpheld ? ReviewVerdict::WorkInvalid : ReviewVerdict::WorkValid, now, epoch);
    }
    return c;
}

Token PublicChain::beginDistribution() {
    if (distributing_) throw ProtocolError(Errc::InvalidTransition, "distribution already in progress");
    distributing_ = true;
    inFlight_ = pools_.rewardPool;
    pools_.rewardPool = Token{};
    return inFlight_;
}

void PublicChain::creditReward(const DeedId& deed, const Token& amount) {
    if (amount > inFlight_) {
        throw ProtocolError(Errc::InsufficientBalance, "credit " + amount.toString() + " exceeds in-flight " +
                                                           inFlight_.toString());
    }
    deeds_.credit(deed, amount);
    inFlight_ -= amount;
    distributedTotal_ += amount;
}

void PublicChain::endDistribution() {
    pools_.rewardPool += inFlight_;
    inFlight_ = Token{};
    distributing_ = false;
}

Token PublicChain::totalSupply() const {
    return deeds_.totalBalance() + pools_.escrowPool + pools_.rewardPool + pools_.lockedTotal() +
           pools_.bondTotal() + inFlight_;
}

}  // namespace poai::escrow
