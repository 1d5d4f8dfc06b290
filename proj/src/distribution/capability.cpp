#include "poai/distribution/capability.h"

#include <algorithm>
#include <set>

namespace poai::distribution {

Bytes commitmentMessage(const JobId& job, const DeedId& worker, const Capability& cap) {
    ByteWriter w;
    w.str("poai.capability.commit.v1");
    job.encode(w);
    w.str(worker);
    cap.encode(w);
    return std::move(w).take();
}

CapabilityCommitment CapabilityCommitment::make(const JobId& job, const DeedId& worker, const Capability& cap,
                                                const KeyPair& key) {
    return {job, worker, cap, key.sign(commitmentMessage(job, worker, cap))};
}

bool CapabilityCommitment::verify(const PublicKey& key) const {
    return verifySignature(key, commitmentMessage(job, deedId, declared), signature);
}

void CapabilityCommitment::encode(ByteWriter& w) const {
    job.encode(w);
    w.str(deedId);
    declared.encode(w);
    w.fixed(signature);
}

CapabilityCommitment CapabilityCommitment::decode(ByteReader& r) {
    CapabilityCommitment c;
    c.job = JobId::decode(r);
    c.deedId = r.str();
    c.declared = Capability::decode(r);
    c.signature = r.fixed<64>();
    return c;
}

std::vector<CapabilityCommitment> verifiedCommitments(std::span<const CapabilityCommitment> candidates,
                                                      const KeyLookup& keys) {
    std::vector<CapabilityCommitment> out;
    std::set<std::pair<JobId, DeedId>> seen;
    for (const auto& c : candidates) {
        if (seen.contains({c.job, c.deedId})) continue;
        const auto key = keys(c.deedId);
        if (!key || !c.verify(*key)) continue;
        seen.insert({c.job, c.deedId});
        out.push_back(c);
    }
    return out;
}

std::vector<CapabilityCommitment> mapSearch(const Capability& requirements,
                                            std::span<const CapabilityCommitment> candidates,
                                            const CapabilityWeights& weights) {
    std::vector<std::pair<double, const CapabilityCommitment*>> fit;
    for (const auto& c : candidates) {
        if (dominates(c.declared, requirements)) fit.emplace_back(capabilityScore(c.declared, weights), &c);
    }
    std::sort(fit.begin(), fit.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second->deedId < b.second->deedId;
    });
    std::vector<CapabilityCommitment> out;
    std::set<DeedId> seen;
    for (const auto& [_, c] : fit) {
        if (seen.insert(c->deedId).second) out.push_back(*c);
    }
    return out;
}

}  // namespace poai::distribution
