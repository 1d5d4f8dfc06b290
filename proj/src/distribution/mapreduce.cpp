#include "poai/distribution/mapreduce.h"

#include <map>

namespace poai::distribution {

Bytes Assignment::encode() const {
    ByteWriter w;
    job.encode(w);
    w.fixed(specDigest);
    w.u32(static_cast<std::uint32_t>(shards.size()));
    for (const auto& s : shards) {
        w.str(s.worker);
        w.u32(static_cast<std::uint32_t>(s.shardSpec.size()));
        for (const auto& [k, v] : s.shardSpec) {
            w.str(k);
            w.f64(v);
        }
    }
    w.u64(publishedAt);
    w.u32(static_cast<std::uint32_t>(commitments.size()));
    for (const auto& c : commitments) c.encode(w);
    return std::move(w).take();
}

Assignment Assignment::decode(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    Assignment a;
    a.job = JobId::decode(r);
    a.specDigest = r.fixed<32>();
    const auto n = r.u32();
    if (n > r.remaining()) throw DecodeError("shard count too large");
    for (std::uint32_t i = 0; i < n; ++i) {
        Shard s;
        s.worker = r.str();
        const auto m = r.u32();
        if (m > r.remaining()) throw DecodeError("shard spec too large");
        for (std::uint32_t j = 0; j < m; ++j) {
            auto k = r.str();
            s.shardSpec[k] = r.f64();
        }
        a.shards.push_back(std::move(s));
    }
    a.publishedAt = r.u64();
    const auto c = r.u32();
    if (c > r.remaining()) throw DecodeError("commitment count too large");
    for (std::uint32_t i = 0; i < c; ++i) a.commitments.push_back(CapabilityCommitment::decode(r));
    r.expectDone();
    return a;
}

std::optional<std::size_t> Assignment::shardOf(const DeedId& worker) const {
    for (std::size_t i = 0; i < shards.size(); ++i) {
        if (shards[i].worker == worker) return i;
    }
    return std::nullopt;
}

std::optional<Assignment> mapAssign(const JobId& job, std::uint32_t nWorkers, const pipeline::PipelineSpec& spec,
                                    std::span<const CapabilityCommitment> ranked, std::uint64_t ledgerHeight) {
    spec.checkArity(nWorkers);
    if (nWorkers == 0 || ranked.size() < nWorkers) return std::nullopt;
    Assignment a;
    a.job = job;
    a.specDigest = spec.digest();
    a.publishedAt = ledgerHeight;
    for (std::uint32_t i = 0; i < nWorkers; ++i) {
        a.shards.push_back({ranked[i].deedId, spec.workerConfig(i)});
        a.commitments.push_back(ranked[i]);
    }
    return a;
}

GatherOutcome reduceGather(const Assignment& assignment, std::span<const ShardResult> results) {
    GatherOutcome out;
    std::map<DeedId, const ShardResult*> verified;
    for (const auto& r : results) {
        if (!assignment.shardOf(r.worker) || verified.contains(r.worker)) continue;
        if (sha256(r.payload) != r.payloadDigest) {
            out.mismatched.push_back(r.worker);
            continue;
        }
        verified[r.worker] = &r;
    }
    ByteWriter w;
    w.str("poai.gather.v1");
    assignment.job.encode(w);
    w.u32(static_cast<std::uint32_t>(assignment.shards.size()));
    for (const auto& s : assignment.shards) {
        const auto it = verified.find(s.worker);
        if (it == verified.end()) {
            out.missing.push_back(s.worker);
            continue;
        }
        w.str(s.worker);
        w.bytes(it->second->payload);
    }
    if (out.missing.empty()) {
        out.aggregate = std::move(w).take();
        out.aggregateDigest = sha256(*out.aggregate);
    }
    return out;
}

}  // namespace poai::distribution
