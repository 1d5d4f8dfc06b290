#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "poai/common/error.h"
#include "poai/common/rng.h"
#include "poai/escrow/public_chain.h"

using namespace poai;
using namespace poai::escrow;

namespace {

tokenomics::DeedRegistry registry(std::initializer_list<std::pair<const char*, int>> rows) {
    tokenomics::DeedRegistry reg;
    for (const auto& [id, bal] : rows) reg.add({id, {}, Token::whole(bal), 0});
    return reg;
}

PublicChain sevenNodes() {
    return PublicChain(registry({{"a", 100}, {"b", 100}, {"c", 100}, {"d", 100},
                                 {"e", 100}, {"f", 100}, {"g", 100}}));
}

const std::vector<DeedId> kActive{"a", "b", "c", "d", "e", "f", "g"};

Errc errcOf(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ProtocolError& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected ProtocolError";
    return Errc::InvalidArgument;
}

std::vector<ledger::JurorVote> votes(const Challenge& c, std::initializer_list<bool> upheld) {
    std::vector<ledger::JurorVote> out;
    auto it = upheld.begin();
    for (const auto& j : c.juryIds) out.push_back({j, *it++});
    return out;
}

}  // namespace

TEST(Submit, DebitsSenderAndFundsEscrow) {
    PublicChain chain(registry({{"s", 10}}));
    const auto& job = chain.submitJob("s", Token::whole(5), kZeroDigest, 1, 0);
    EXPECT_EQ(job.id, (JobId{"s", 1}));
    EXPECT_EQ(job.status, JobStatus::InProgress);
    EXPECT_EQ(chain.pools().escrowPool, Token::whole(5));
    EXPECT_EQ(chain.deeds().balance("s"), Token::whole(5));
    EXPECT_EQ(chain.jobCount("s"), 1u);
    EXPECT_EQ(chain.onchainStatus(job.id), JobStatus::InProgress);
}

TEST(Submit, ExactBalanceIsAccepted) {
    PublicChain chain(registry({{"s", 5}}));
    chain.submitJob("s", Token::whole(5), kZeroDigest, 1, 0);
    EXPECT_EQ(chain.deeds().balance("s"), Token{});
}

TEST(Submit, InsufficientBalanceChangesNothing) {
    PublicChain chain(registry({{"s", 4}}));
    const auto before = chain.pools();
    EXPECT_EQ(errcOf([&] { chain.submitJob("s", Token::whole(5), kZeroDigest, 1, 0); }),
              Errc::InsufficientBalance);
    EXPECT_EQ(chain.pools(), before);
    EXPECT_EQ(chain.jobCount("s"), 0u);
    EXPECT_EQ(chain.deeds().balance("s"), Token::whole(4));
}

TEST(Submit, ZeroRewardRejected) {
    PublicChain chain(registry({{"s", 4}}));
    EXPECT_EQ(errcOf([&] { chain.submitJob("s", Token{}, kZeroDigest, 1, 0); }), Errc::InvalidArgument);
}

TEST(Submit, SequenceFollowsJobCount) {
    PublicChain chain(registry({{"s", 10}, {"t", 10}}));
    EXPECT_EQ(chain.submitJob("s", Token::whole(1), kZeroDigest, 1, 0).id.sequence, 1u);
    EXPECT_EQ(chain.submitJob("t", Token::whole(1), kZeroDigest, 1, 0).id.sequence, 1u);
    EXPECT_EQ(chain.submitJob("s", Token::whole(1), kZeroDigest, 1, 0).id.sequence, 2u);
}

TEST(Settle, DoneMovesRewardToRewardPool) {
    PublicChain chain(registry({{"s", 10}}));
    const auto id = chain.submitJob("s", Token::whole(5), kZeroDigest, 1, 0).id;
    chain.settleJob(id, JobStatus::Done, 100, 1);
    EXPECT_EQ(chain.pools().escrowPool, Token{});
    EXPECT_EQ(chain.pools().rewardPool, Token::whole(5));
    EXPECT_EQ(chain.job(id).status, JobStatus::Settled);
    EXPECT_FALSE(chain.onchainStatus(id).has_value());
}

TEST(Settle, CancelledLocksForReview) {
    PublicChain chain(registry({{"s", 10}}));
    const auto id = chain.submitJob("s", Token::whole(5), kZeroDigest, 1, 0).id;
    chain.settleJob(id, JobStatus::Cancelled, 500, 1);
    ASSERT_EQ(chain.pools().lockedFunds.size(), 1u);
    EXPECT_EQ(chain.pools().lockedFunds[0].job, id);
    EXPECT_EQ(chain.pools().lockedFunds[0].amount, Token::whole(5));
    EXPECT_EQ(chain.pools().lockedFunds[0].unlockTime, 500 + 86400);
    EXPECT_EQ(chain.pools().escrowPool, Token{});
    EXPECT_EQ(chain.job(id).status, JobStatus::LockedForReview);
}

TEST(Settle, TwiceIsAnError) {
    PublicChain chain(registry({{"s", 10}}));
    const auto id = chain.submitJob("s", Token::whole(5), kZeroDigest, 1, 0).id;
    chain.settleJob(id, JobStatus::Done, 1, 1);
    const auto before = chain.pools();
    EXPECT_EQ(errcOf([&] { chain.settleJob(id, JobStatus::Done, 2, 1); }), Errc::AlreadySettled);
    EXPECT_EQ(errcOf([&] { chain.settleJob(id, JobStatus::Cancelled, 2, 1); }), Errc::AlreadySettled);
    EXPECT_EQ(chain.pools(), before);
}

TEST(Settle, RejectsNonFinalStatusAndUnknownJob) {
    PublicChain chain(registry({{"s", 10}}));
    const auto id = chain.submitJob("s", Token::whole(5), kZeroDigest, 1, 0).id;
    EXPECT_EQ(errcOf([&] { chain.settleJob(id, JobStatus::Refunded, 1, 1); }), Errc::InvalidArgument);
    EXPECT_EQ(errcOf([&] { chain.settleJob(JobId{"s", 9}, JobStatus::Done, 1, 1); }), Errc::UnknownJob);
}

TEST(Review, DefaultAtUnlockReleasesToRewardPool) {
    PublicChain chain(registry({{"s", 10}}));
    const auto id = chain.submitJob("s", Token::whole(5), kZeroDigest, 1, 0).id;
    chain.settleJob(id, JobStatus::Cancelled, 0, 1);
    chain.resolveReview(id, std::nullopt, 86400, 25);
    EXPECT_TRUE(chain.pools().lockedFunds.empty());
    EXPECT_EQ(chain.pools().rewardPool, Token::whole(5));
    EXPECT_EQ(chain.job(id).status, JobStatus::Settled);
}

TEST(Review, EarlyDefaultIsRejected) {
    PublicChain chain(registry({{"s", 10}}));
    const auto id = chain.submitJob("s", Token::whole(5), kZeroDigest, 1, 0).id;
    chain.settleJob(id, JobStatus::Cancelled, 0, 1);
    const auto before = chain.pools();
    EXPECT_EQ(errcOf([&] { chain.resolveReview(id, std::nullopt, 86399, 24); }), Errc::ReviewNotDue);
    EXPECT_EQ(chain.pools(), before);
}

TEST(Review, InvalidWorkRefundsSender) {
    PublicChain chain(registry({{"s", 10}}));
    const auto id = chain.submitJob("s", Token::whole(5), kZeroDigest, 1, 0).id;
    chain.settleJob(id, JobStatus::Cancelled, 0, 1);
    chain.resolveReview(id, ReviewVerdict::WorkInvalid, 10, 1);
    EXPECT_EQ(chain.deeds().balance("s"), Token::whole(10));
    EXPECT_EQ(chain.job(id).status, JobStatus::Refunded);
}

TEST(Review, UnknownJob) {
    PublicChain chain(registry({{"s", 10}}));
    EXPECT_EQ(errcOf([&] { chain.resolveReview(JobId{"s", 1}, std::nullopt, 0, 1); }), Errc::UnknownJob);
    const auto id = chain.submitJob("s", Token::whole(5), kZeroDigest, 1, 0).id;
    EXPECT_EQ(errcOf([&] { chain.resolveReview(id, std::nullopt, 1e6, 1); }), Errc::UnknownJob);
}

TEST(Jury, SameSeedSameJury) {
    const std::vector<DeedId> active{"n1", "n2", "n3", "n4", "n5"};
    const auto a = drawJury(active, {}, 3, 42, 1);
    const auto b = drawJury(active, {}, 3, 42, 1);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.size(), 3u);
    std::vector<DeedId> shuffled{"n4", "n2", "n5", "n1", "n3"};
    EXPECT_EQ(drawJury(shuffled, {}, 3, 42, 1), a);
}

TEST(Jury, SeedChangesSelection) {
    std::vector<DeedId> active;
    for (int i = 0; i < 12; ++i) active.push_back("n" + std::to_string(i));
    const auto base = drawJury(active, {}, 3, 1, 1);
    bool differs = false;
    for (std::uint64_t s = 2; s < 20 && !differs; ++s) differs = drawJury(active, {}, 3, s, 1) != base;
    EXPECT_TRUE(differs);
}

TEST(Jury, ExclusionsAndShortfall) {
    const std::vector<DeedId> active{"n1", "n2", "n3", "n4", "n5"};
    const std::vector<DeedId> excluded{"n1", "n2", "n3"};
    EXPECT_EQ(errcOf([&] { drawJury(active, excluded, 3, 7, 1); }), Errc::NoEligibleJurors);
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto jury = drawJury(active, std::vector<DeedId>{"n1", "n2"}, 3, s, 3);
        EXPECT_EQ((std::vector<DeedId>{"n3", "n4", "n5"}),
                  [&] { auto j = jury; std::sort(j.begin(), j.end()); return j; }());
    }
}

TEST(Challenge, BondNeedsBalance) {
    PublicChain chain(registry({{"s", 10}, {"z", 0}, {"a", 1}, {"b", 1}, {"c", 1}}));
    const auto id = chain.submitJob("s", Token::whole(5), kZeroDigest, 1, 0).id;
    chain.settleJob(id, JobStatus::Cancelled, 0, 1);
    const std::vector<DeedId> active{"s", "z", "a", "b", "c"};
    EXPECT_EQ(errcOf([&] { chain.openChallenge("z", id, Token::whole(1), 1, 9, active, 1, 1); }),
              Errc::InsufficientBalance);
    EXPECT_TRUE(chain.challenges().empty());
}

TEST(Challenge, TooFewJurorsLeavesStateUntouched) {
    PublicChain chain(registry({{"s", 10}, {"x", 10}, {"a", 1}, {"b", 1}}));
    const auto id = chain.submitJob("s", Token::whole(5), kZeroDigest, 1, 0).id;
    chain.settleJob(id, JobStatus::Cancelled, 0, 1);
    const auto before = chain.pools();
    const std::vector<DeedId> active{"s", "x", "a", "b"};
    EXPECT_EQ(errcOf([&] { chain.openChallenge("x", id, Token::whole(1), 1, 9, active, 1, 1); }),
              Errc::NoEligibleJurors);
    EXPECT_EQ(chain.pools(), before);
    EXPECT_EQ(chain.deeds().balance("x"), Token::whole(10));
}

TEST(Challenge, NotAllowedOnRunningOrOldSettledJob) {
    auto chain = sevenNodes();
    const auto id = chain.submitJob("a", Token::whole(5), kZeroDigest, 1, 0).id;
    EXPECT_EQ(errcOf([&] { chain.openChallenge("b", id, Token::whole(1), 1, 9, kActive, 1, 1); }),
              Errc::ChallengeNotAllowed);
    chain.settleJob(id, JobStatus::Done, 1, 1);
    EXPECT_EQ(errcOf([&] { chain.openChallenge("b", id, Token::whole(1), 1, 9, kActive, 5000, 2); }),
              Errc::ChallengeNotAllowed);
}

TEST(Challenge, JuryExcludesChallengerSenderAndWorkers) {
    auto chain = sevenNodes();
    const auto id = chain.submitJob("a", Token::whole(5), kZeroDigest, 2, 0).id;
    chain.recordWorkers(id, {"b", "c"});
    chain.settleJob(id, JobStatus::Cancelled, 0, 1);
    const auto& c = chain.openChallenge("d", id, Token::whole(1), 1, 9, kActive, 1, 1);
    auto jury = c.juryIds;
    std::sort(jury.begin(), jury.end());
    EXPECT_EQ(jury, (std::vector<DeedId>{"e", "f", "g"}));
}

TEST(Challenge, UpheldReturnsBondAndRefundsSender) {
    auto chain = sevenNodes();
    const auto id = chain.submitJob("a", Token::whole(20), kZeroDigest, 1, 0).id;
    chain.settleJob(id, JobStatus::Cancelled, 0, 1);
    const auto& c = chain.openChallenge("b", id, Token::whole(2), 1, 9, kActive, 1, 1);
    EXPECT_EQ(chain.deeds().balance("b"), Token::whole(98));
    EXPECT_EQ(chain.pools().bondTotal(), Token::whole(2));
    const auto v = votes(c, {true, true, false});
    const auto& done = chain.resolveChallenge(1, v, 10, 1);
    EXPECT_EQ(done.verdict, ChallengeVerdict::Upheld);
    EXPECT_EQ(chain.deeds().balance("b"), Token::whole(100));
    EXPECT_EQ(chain.deeds().balance("a"), Token::whole(100));
    EXPECT_EQ(chain.job(id).status, JobStatus::Refunded);
    EXPECT_TRUE(chain.pools().challengeBonds.empty());
    EXPECT_TRUE(chain.pools().lockedFunds.empty());
}

TEST(Challenge, RejectedBondGoesToRewardPool) {
    auto chain = sevenNodes();
    const auto id = chain.submitJob("a", Token::whole(20), kZeroDigest, 1, 0).id;
    chain.settleJob(id, JobStatus::Cancelled, 0, 1);
    const auto& c = chain.openChallenge("b", id, Token::whole(2), 1, 9, kActive, 1, 1);
    chain.resolveChallenge(1, votes(c, {false, false, true}), 10, 1);
    EXPECT_EQ(chain.challenge(1).verdict, ChallengeVerdict::Rejected);
    EXPECT_EQ(chain.deeds().balance("b"), Token::whole(98));
    EXPECT_EQ(chain.pools().rewardPool, Token::whole(22));
    EXPECT_EQ(chain.job(id).status, JobStatus::Settled);
    EXPECT_EQ(chain.rejectedBondsIntoRewardPool(), Token::whole(2));
}

TEST(Challenge, VoteCountMustMatchJury) {
    auto chain = sevenNodes();
    const auto id = chain.submitJob("a", Token::whole(20), kZeroDigest, 1, 0).id;
    chain.settleJob(id, JobStatus::Cancelled, 0, 1);
    const auto& c = chain.openChallenge("b", id, Token::whole(2), 1, 9, kActive, 1, 1);
    auto v = votes(c, {true, true, false});
    const auto before = chain.pools();
    std::vector<ledger::JurorVote> two(v.begin(), v.begin() + 2);
    EXPECT_EQ(errcOf([&] { chain.resolveChallenge(1, two, 10, 1); }), Errc::BadVotes);
    auto dup = v;
    dup[2] = dup[0];
    EXPECT_EQ(errcOf([&] { chain.resolveChallenge(1, dup, 10, 1); }), Errc::BadVotes);
    auto stranger = v;
    stranger[1].juror = "a";
    EXPECT_EQ(errcOf([&] { chain.resolveChallenge(1, stranger, 10, 1); }), Errc::BadVotes);
    EXPECT_EQ(chain.pools(), before);
    EXPECT_EQ(chain.challenge(1).verdict, ChallengeVerdict::Pending);
}

TEST(Challenge, PendingChallengeBlocksDefaultReview) {
    auto chain = sevenNodes();
    const auto id = chain.submitJob("a", Token::whole(20), kZeroDigest, 1, 0).id;
    chain.settleJob(id, JobStatus::Cancelled, 0, 1);
    chain.openChallenge("b", id, Token::whole(2), 1, 9, kActive, 1, 1);
    EXPECT_EQ(errcOf([&] { chain.resolveReview(id, std::nullopt, 90000, 26); }), Errc::ReviewNotDue);
    EXPECT_EQ(errcOf([&] { chain.openChallenge("c", id, Token::whole(2), 2, 9, kActive, 1, 1); }),
              Errc::ChallengeNotAllowed);
}

TEST(Challenge, SameEpochSettledJobCanBeDisputed) {
    auto chain = sevenNodes();
    const auto id = chain.submitJob("a", Token::whole(20), kZeroDigest, 1, 0).id;
    chain.settleJob(id, JobStatus::Done, 10, 1);
    const auto& c = chain.openChallenge("b", id, Token::whole(2), 1, 9, kActive, 20, 1);
    EXPECT_EQ(chain.pools().rewardPool, Token{});
    EXPECT_EQ(chain.pools().lockedTotal(), Token::whole(20));
    chain.resolveChallenge(1, votes(c, {true, false, true}), 30, 1);
    EXPECT_EQ(chain.job(id).status, JobStatus::Refunded);
    EXPECT_EQ(chain.deeds().balance("a"), Token::whole(100));
    EXPECT_EQ(chain.settledIntoRewardPool(), Token{});
}

TEST(Transitions, OnlyListedEdgesAppear) {
    auto chain = sevenNodes();
    const auto j1 = chain.submitJob("a", Token::whole(3), kZeroDigest, 1, 0).id;
    const auto j2 = chain.submitJob("a", Token::whole(3), kZeroDigest, 1, 0).id;
    const auto j3 = chain.submitJob("a", Token::whole(3), kZeroDigest, 1, 0).id;
    chain.settleJob(j1, JobStatus::Done, 1, 1);
    chain.settleJob(j2, JobStatus::Cancelled, 1, 1);
    chain.settleJob(j3, JobStatus::Cancelled, 1, 1);
    chain.resolveReview(j2, std::nullopt, 86401, 25);
    chain.resolveReview(j3, ReviewVerdict::WorkInvalid, 2, 1);
    using S = JobStatus;
    const std::set<std::pair<S, S>> allowed{
        {S::InProgress, S::Done},        {S::InProgress, S::Cancelled},      {S::Done, S::Settled},
        {S::Cancelled, S::LockedForReview}, {S::LockedForReview, S::Settled}, {S::LockedForReview, S::Refunded},
    };
    for (const auto& t : chain.transitions()) EXPECT_TRUE(allowed.contains({t.from, t.to}));
    EXPECT_EQ(chain.transitions().size(), 8u);
    // A refunded job cannot be reviewed again.
    EXPECT_EQ(errcOf([&] { chain.resolveReview(j3, ReviewVerdict::WorkValid, 3, 1); }), Errc::UnknownJob);
}

TEST(Distribution, CreditsComeOutOfInFlight) {
    auto chain = sevenNodes();
    const auto id = chain.submitJob("a", Token::whole(10), kZeroDigest, 1, 0).id;
    chain.settleJob(id, JobStatus::Done, 1, 1);
    const auto supply = chain.totalSupply();
    EXPECT_EQ(chain.beginDistribution(), Token::whole(10));
    chain.creditReward("b", Token::whole(6));
    EXPECT_EQ(chain.totalSupply(), supply);
    EXPECT_EQ(errcOf([&] { chain.creditReward("c", Token::whole(5)); }), Errc::InsufficientBalance);
    chain.endDistribution();
    EXPECT_EQ(chain.pools().rewardPool, Token::whole(4));
    EXPECT_EQ(chain.distributedTotal(), Token::whole(6));
    EXPECT_EQ(chain.totalSupply(), supply);
}

// Random operation sequences: supply is constant after every call, failed
// calls change nothing, and a job's reward sits in exactly one place.
TEST(Property, ConservationUnderRandomOperations) {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        auto chain = sevenNodes();
        const Token supply = chain.totalSupply();
        RngStream rng(seed, "escrow-prop");
        std::uint64_t nextChallenge = 1;
        SimTime now = 0;
        for (int step = 0; step < 200; ++step) {
            now += static_cast<SimTime>(rng.below(4000));
            const std::uint64_t epoch = static_cast<std::uint64_t>(now / 3600) + 1;
            const auto before = chain.pools();
            const auto balancesBefore = chain.deeds().totalBalance();
            const auto pick = kActive[rng.below(kActive.size())];
            std::vector<JobId> ids;
            for (const auto& [id, _] : chain.jobs()) ids.push_back(id);
            const auto anyJob = [&] { return ids.empty() ? JobId{"a", 99} : ids[rng.below(ids.size())]; };
            bool threw = false;
            try {
                switch (rng.below(7)) {
                    case 0:
                        chain.submitJob(pick, Token::whole(static_cast<std::int64_t>(rng.below(30)) + 1),
                                        kZeroDigest, 1, now);
                        break;
                    case 1: chain.settleJob(anyJob(), rng.bernoulli(0.5) ? JobStatus::Done : JobStatus::Cancelled,
                                            now, epoch); break;
                    case 2: chain.resolveReview(anyJob(), std::nullopt, now, epoch); break;
                    case 3:
                        chain.openChallenge(pick, anyJob(), Token::whole(static_cast<std::int64_t>(rng.below(5))),
                                            nextChallenge++, seed, kActive, now, epoch);
                        break;
                    case 4: {
                        if (chain.challenges().empty()) break;
                        const auto& c = chain.challenges().rbegin()->second;
                        if (c.verdict != ChallengeVerdict::Pending) break;
                        chain.resolveChallenge(c.challengeId,
                                               votes(c, {rng.bernoulli(0.5), rng.bernoulli(0.5), rng.bernoulli(0.5)}),
                                               now, epoch);
                        break;
                    }
                    case 5: chain.resolveReview(anyJob(), ReviewVerdict::WorkInvalid, now, epoch); break;
                    default: {
                        const Token pool = chain.beginDistribution();
                        chain.creditReward(pick, pool * Token::Rational(1, 3));
                        chain.endDistribution();
                    }
                }
            } catch (const ProtocolError&) {
                threw = true;
            }
            ASSERT_EQ(chain.totalSupply(), supply) << "seed " << seed << " step " << step;
            if (threw) {
                ASSERT_EQ(chain.pools(), before);
                ASSERT_EQ(chain.deeds().totalBalance(), balancesBefore);
            }
            for (const auto& [id, job] : chain.jobs()) {
                const auto lock = std::count_if(chain.pools().lockedFunds.begin(), chain.pools().lockedFunds.end(),
                                                [&](const LockedFund& l) { return l.job == id; });
                ASSERT_LE(lock, 1);
                if (job.status == JobStatus::InProgress || job.status == JobStatus::Refunded) {
                    ASSERT_EQ(lock, 0);
                }
                if (job.status == JobStatus::LockedForReview) {
                    ASSERT_EQ(lock, 1);
                }
            }
        }
    }
}

TEST(Property, ReplayIsBitIdentical) {
    auto run = [] {
        auto chain = sevenNodes();
        const auto j1 = chain.submitJob("a", Token::parse("7.25"), kZeroDigest, 1, 0).id;
        const auto j2 = chain.submitJob("b", Token::parse("1/3"), kZeroDigest, 1, 0).id;
        chain.settleJob(j1, JobStatus::Cancelled, 5, 1);
        chain.settleJob(j2, JobStatus::Done, 6, 1);
        const auto& c = chain.openChallenge("c", j1, Token::parse("0.725"), 1, 77, kActive, 7, 1);
        chain.resolveChallenge(1, votes(c, {false, true, false}), 8, 1);
        return std::make_pair(chain.pools(), chain.challenge(1).juryIds);
    };
    EXPECT_EQ(run(), run());
}
