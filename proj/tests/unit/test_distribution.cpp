#include <gtest/gtest.h>

#include <map>

#include "poai/common/rng.h"
#include "poai/distribution/capability.h"
#include "poai/distribution/mapreduce.h"
#include "poai/distribution/progress.h"
#include "poai/pipeline/spec.h"

using namespace poai;
using namespace poai::distribution;

namespace {

const JobId kJob{"main", 1};

KeyPair keyOf(const DeedId& id) { return KeyPair::fromSeed(sha256("node/" + id)); }

CapabilityCommitment commit(const DeedId& id, std::int64_t cpu, std::int64_t mem = 0, bool gpu = false,
                            std::int64_t gpuUnits = 0) {
    return CapabilityCommitment::make(kJob, id, Capability{cpu, gpu, gpuUnits, mem}, keyOf(id));
}

std::vector<DeedId> ids(const std::vector<CapabilityCommitment>& v) {
    std::vector<DeedId> out;
    for (const auto& c : v) out.push_back(c.deedId);
    return out;
}

Digest nonceFor(std::uint64_t i) { return sha256("nonce/" + std::to_string(i)); }

const pipeline::PipelineSpec& annexSpec() {
    static const auto spec = pipeline::parsePipeline(
        "name: annex\ndataSource: {kind: counter}\nbusiness: [{kind: sum}]\n"
        "perWorkerConfig:\n  - {param_worker0: 0}\n  - {param_worker1: 1}\n  - {param_worker2: 2}\n");
    return spec;
}

}  // namespace

TEST(Commitment, SignatureBindsJobWorkerAndCapability) {
    const auto c = commit("w1", 4, 8);
    EXPECT_TRUE(c.verify(keyOf("w1").publicKey()));
    EXPECT_FALSE(c.verify(keyOf("w2").publicKey()));
    auto other = c;
    other.declared.cpuUnits = 64;
    EXPECT_FALSE(other.verify(keyOf("w1").publicKey()));
    auto moved = c;
    moved.job.sequence = 2;
    EXPECT_FALSE(moved.verify(keyOf("w1").publicKey()));
}

TEST(Commitment, VerifiedFilterDropsForgeriesAndDuplicates) {
    auto forged = commit("w2", 100);
    forged.signature = commit("w3", 100).signature;
    const std::vector<CapabilityCommitment> in{commit("w1", 2), forged, commit("w1", 50), commit("ghost", 9)};
    const KeyLookup keys = [](const DeedId& id) -> std::optional<PublicKey> {
        if (id == "ghost") return std::nullopt;
        return keyOf(id).publicKey();
    };
    const auto out = verifiedCommitments(in, keys);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].declared.cpuUnits, 2);
}

TEST(MapSearch, DominanceFilter) {
    const std::vector<CapabilityCommitment> c{commit("a", 4), commit("b", 1)};
    EXPECT_EQ(ids(mapSearch(Capability{2, false, 0, 0}, c)), (std::vector<DeedId>{"a"}));
}

TEST(MapSearch, TiesOrderedByDeedId) {
    const std::vector<CapabilityCommitment> c{commit("zeta", 4), commit("alpha", 4), commit("mid", 4)};
    EXPECT_EQ(ids(mapSearch(Capability{}, c)), (std::vector<DeedId>{"alpha", "mid", "zeta"}));
}

TEST(MapSearch, EmptyCandidates) { EXPECT_TRUE(mapSearch(Capability{1, false, 0, 0}, {}).empty()); }

TEST(MapSearch, RankedByScoreAndGpuRequirement) {
    const std::vector<CapabilityCommitment> c{commit("cpu", 8, 0), commit("gpu", 2, 4, true, 2),
                                              commit("mem", 2, 40)};
    EXPECT_EQ(ids(mapSearch(Capability{2, false, 0, 0}, c)), (std::vector<DeedId>{"mem", "gpu", "cpu"}));
    EXPECT_EQ(ids(mapSearch(Capability{1, true, 1, 0}, c)), (std::vector<DeedId>{"gpu"}));
    // Weights are overridable.
    EXPECT_EQ(ids(mapSearch(Capability{}, c, CapabilityWeights{10, 0, 0})), (std::vector<DeedId>{"cpu", "gpu", "mem"}));
}

TEST(MapAssign, TopThreeOfFive) {
    std::vector<CapabilityCommitment> c;
    for (int i = 0; i < 5; ++i) c.push_back(commit("w" + std::to_string(i), 10 - i));
    const auto ranked = mapSearch(Capability{}, c);
    const auto a = mapAssign(kJob, 3, annexSpec(), ranked, 42);
    ASSERT_TRUE(a.has_value());
    EXPECT_EQ(a->shards.size(), 3u);
    EXPECT_EQ(a->shards[0].worker, "w0");
    EXPECT_EQ(a->shards[2].worker, "w2");
    EXPECT_EQ(a->shards[1].shardSpec, (pipeline::ParamMap{{"param_worker1", 1}}));
    EXPECT_EQ(a->publishedAt, 42u);
    EXPECT_EQ(a->specDigest, annexSpec().digest());
    EXPECT_EQ(Assignment::decode(a->encode()), *a);
}

TEST(MapAssign, TooFewWorkersStaysPending) {
    const std::vector<CapabilityCommitment> c{commit("a", 1), commit("b", 1)};
    EXPECT_FALSE(mapAssign(kJob, 3, annexSpec(), c, 1).has_value());
}

TEST(MapAssign, SingleWorkerGetsWholeJob) {
    const auto spec = pipeline::parsePipeline("name: one\ndataSource: {kind: counter}\nbusiness: [{kind: sum}]\n");
    const std::vector<CapabilityCommitment> c{commit("a", 1)};
    const auto a = mapAssign(kJob, 1, spec, c, 1);
    ASSERT_TRUE(a.has_value());
    ASSERT_EQ(a->shards.size(), 1u);
    EXPECT_TRUE(a->shards[0].shardSpec.empty());
}

TEST(MapAssign, ReplayDeterministic) {
    std::vector<CapabilityCommitment> c;
    for (int i = 0; i < 6; ++i) c.push_back(commit("w" + std::to_string(i), i % 3));
    const auto a = mapAssign(kJob, 3, annexSpec(), mapSearch(Capability{}, c), 5);
    const auto b = mapAssign(kJob, 3, annexSpec(), mapSearch(Capability{}, c), 5);
    EXPECT_EQ(a->encode(), b->encode());
}

TEST(Progress, ValidNextLink) {
    const auto g = genesisCommitment(kJob, "w");
    const auto p = makeLink(kJob, "w", 1, g, nonceFor(1));
    EXPECT_TRUE(verifyProgress(p, g, 0, nonceFor(1)).ok());
    EXPECT_EQ(ProgressProof::decode(p.encode()), p);
}

TEST(Progress, ReplayRejectedAndPenalized) {
    ProgressTracker t;
    const auto g = genesisCommitment(kJob, "w");
    const auto p1 = makeLink(kJob, "w", 1, g, nonceFor(1));
    EXPECT_TRUE(t.submit(p1, nonceFor(1)).ok());
    const auto v = t.submit(p1, nonceFor(1));
    EXPECT_EQ(v.status, ProgressStatus::Replay);
    EXPECT_TRUE(v.penalize);
    EXPECT_EQ(t.progress(kJob, "w"), 1u);
}

TEST(Progress, ForgedRejectedAndPenalized) {
    ProgressTracker t;
    const auto g = genesisCommitment(kJob, "w");
    auto p = makeLink(kJob, "w", 1, g, nonceFor(1));
    const auto v = t.submit(p, nonceFor(2));
    EXPECT_EQ(v.status, ProgressStatus::Forged);
    EXPECT_TRUE(v.penalize);
    p.commitment[0] ^= 1;
    EXPECT_EQ(t.submit(p, nonceFor(1)).status, ProgressStatus::Forged);
    EXPECT_EQ(t.progress(kJob, "w"), 0u);
}

TEST(Progress, BrokenChainAndGap) {
    ProgressTracker t;
    const auto g = genesisCommitment(kJob, "w");
    const auto p1 = makeLink(kJob, "w", 1, g, nonceFor(1));
    const auto p2 = makeLink(kJob, "w", 2, p1.commitment, nonceFor(2));
    const auto p3 = makeLink(kJob, "w", 3, p2.commitment, nonceFor(3));
    const auto gap = t.submit(p2, nonceFor(2));
    EXPECT_EQ(gap.status, ProgressStatus::Gap);
    EXPECT_FALSE(gap.penalize);
    const auto broken = t.submit(makeLink(kJob, "w", 1, sha256("elsewhere"), nonceFor(1)), nonceFor(1));
    EXPECT_EQ(broken.status, ProgressStatus::Broken);
    EXPECT_TRUE(broken.penalize);
    for (const auto* p : {&p1, &p2, &p3}) EXPECT_TRUE(t.submit(*p, nonceFor(p->linkIndex)).ok());
    EXPECT_EQ(t.chain(kJob, "w").accepted, (std::vector<std::uint64_t>{1, 2, 3}));
}

TEST(Progress, ChainsAreBoundToJobAndWorker) {
    EXPECT_NE(genesisCommitment(kJob, "a"), genesisCommitment(kJob, "b"));
    EXPECT_NE(genesisCommitment(kJob, "a"), genesisCommitment(JobId{"main", 2}, "a"));
    ProgressTracker t;
    const auto p = makeLink(kJob, "a", 1, genesisCommitment(kJob, "a"), nonceFor(1));
    auto stolen = p;
    stolen.worker = "b";
    EXPECT_FALSE(t.submit(stolen, nonceFor(1)).ok());
}

// Random interleavings of valid, replayed, forged and out-of-order links:
// accepted indices per chain are always exactly 1..k.
TEST(Property, AcceptedIndicesAreContiguous) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        RngStream rng(seed, "progress");
        ProgressTracker t;
        std::map<DeedId, std::vector<ProgressProof>> links;
        for (const DeedId w : {"a", "b", "c"}) {
            Digest prev = genesisCommitment(kJob, w);
            for (std::uint64_t i = 1; i <= 12; ++i) {
                links[w].push_back(makeLink(kJob, w, i, prev, nonceFor(i)));
                prev = links[w].back().commitment;
            }
        }
        for (int n = 0; n < 200; ++n) {
            const DeedId w = std::string(1, static_cast<char>('a' + rng.below(3)));
            const auto& chain = links[w];
            const auto& p = chain[rng.below(chain.size())];
            Digest nonce = nonceFor(p.linkIndex);
            if (rng.bernoulli(0.2)) nonce[0] ^= 0xff;
            t.submit(p, nonce);
        }
        for (const auto& [key, c] : t.chains()) {
            for (std::size_t i = 0; i < c.accepted.size(); ++i) ASSERT_EQ(c.accepted[i], i + 1);
        }
    }
}

TEST(Gather, OrderedAggregateIsStable) {
    std::vector<CapabilityCommitment> c{commit("w0", 3), commit("w1", 2), commit("w2", 1)};
    const auto a = *mapAssign(kJob, 3, annexSpec(), c, 1);
    std::vector<ShardResult> results;
    for (int i = 2; i >= 0; --i) {
        const Bytes payload{static_cast<std::uint8_t>(i), 7};
        results.push_back({"w" + std::to_string(i), sha256(payload), payload});
    }
    const auto g1 = reduceGather(a, results);
    std::reverse(results.begin(), results.end());
    const auto g2 = reduceGather(a, results);
    ASSERT_TRUE(g1.complete());
    EXPECT_EQ(*g1.aggregate, *g2.aggregate);
    EXPECT_EQ(g1.aggregateDigest, sha256(*g1.aggregate));
    ByteReader r(*g1.aggregate);
    EXPECT_EQ(r.str(), "poai.gather.v1");
    EXPECT_EQ(JobId::decode(r), kJob);
    EXPECT_EQ(r.u32(), 3u);
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(r.str(), "w" + std::to_string(i));
        EXPECT_EQ(r.bytes(), (Bytes{static_cast<std::uint8_t>(i), 7}));
    }
}

TEST(Gather, DigestMismatchRejectedAndNamed) {
    std::vector<CapabilityCommitment> c{commit("w0", 3), commit("w1", 2), commit("w2", 1)};
    const auto a = *mapAssign(kJob, 3, annexSpec(), c, 1);
    const Bytes p{1, 2, 3};
    const std::vector<ShardResult> results{{"w0", sha256(p), p}, {"w1", sha256("x"), p}, {"w2", sha256(p), p}};
    const auto g = reduceGather(a, results);
    EXPECT_FALSE(g.complete());
    EXPECT_EQ(g.mismatched, (std::vector<DeedId>{"w1"}));
    EXPECT_EQ(g.missing, (std::vector<DeedId>{"w1"}));
}

TEST(Gather, MissingShardLeavesJobIncomplete) {
    std::vector<CapabilityCommitment> c{commit("w0", 3), commit("w1", 2), commit("w2", 1)};
    const auto a = *mapAssign(kJob, 3, annexSpec(), c, 1);
    const Bytes p{9};
    const std::vector<ShardResult> results{{"w0", sha256(p), p}, {"w2", sha256(p), p}, {"intruder", sha256(p), p}};
    const auto g = reduceGather(a, results);
    EXPECT_FALSE(g.complete());
    EXPECT_EQ(g.missing, (std::vector<DeedId>{"w1"}));
}
