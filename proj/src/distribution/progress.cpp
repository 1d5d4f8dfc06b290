#include "poai/distribution/progress.h"

namespace poai::distribution {

Bytes ProgressProof::encode() const {
    ByteWriter w;
    job.encode(w);
    w.str(worker);
    w.u64(linkIndex);
    w.fixed(commitment);
    w.fixed(prevCommitment);
    return std::move(w).take();
}

ProgressProof ProgressProof::decode(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    ProgressProof p;
    p.job = JobId::decode(r);
    p.worker = r.str();
    p.linkIndex = r.u64();
    p.commitment = r.fixed<32>();
    p.prevCommitment = r.fixed<32>();
    r.expectDone();
    return p;
}

Digest genesisCommitment(const JobId& job, const DeedId& worker) {
    ByteWriter w;
    w.str("poai.progress.genesis.v1");
    job.encode(w);
    w.str(worker);
    return sha256(w.data());
}

Digest linkCommitment(const Digest& prev, const Digest& nonce) { return Sha256().update(prev).update(nonce).finish(); }

ProgressProof makeLink(const JobId& job, const DeedId& worker, std::uint64_t linkIndex, const Digest& prev,
                       const Digest& nonce) {
    return {job, worker, linkIndex, linkCommitment(prev, nonce), prev};
}

const char* progressStatusName(ProgressStatus s) {
    switch (s) {
        case ProgressStatus::Ok: return "OK";
        case ProgressStatus::Replay: return "REPLAY";
        case ProgressStatus::Gap: return "GAP";
        case ProgressStatus::Broken: return "BROKEN";
        case ProgressStatus::Forged: return "FORGED";
    }
    return "?";
}

ProgressVerdict verifyProgress(const ProgressProof& proof, const Digest& priorHead, std::uint64_t priorIndex,
                               const Digest& revealedNonce) {
    if (proof.linkIndex <= priorIndex) return {ProgressStatus::Replay, true};
    if (proof.linkIndex > priorIndex + 1) return {ProgressStatus::Gap, false};
    if (proof.prevCommitment != priorHead) return {ProgressStatus::Broken, true};
    if (linkCommitment(proof.prevCommitment, revealedNonce) != proof.commitment) return {ProgressStatus::Forged, true};
    return {ProgressStatus::Ok, false};
}

const ProgressTracker::Chain& ProgressTracker::chain(const JobId& job, const DeedId& worker) {
    const auto key = std::make_pair(job, worker);
    auto it = chains_.find(key);
    if (it == chains_.end()) it = chains_.emplace(key, Chain{genesisCommitment(job, worker), 0, {}}).first;
    return it->second;
}

ProgressVerdict ProgressTracker::submit(const ProgressProof& proof, const Digest& nonce) {
    chain(proof.job, proof.worker);
    auto& c = chains_.at({proof.job, proof.worker});
    const auto v = verifyProgress(proof, c.head, c.index, nonce);
    if (v.ok()) {
        c.head = proof.commitment;
        c.index = proof.linkIndex;
        c.accepted.push_back(proof.linkIndex);
    }
    return v;
}

std::uint64_t ProgressTracker::progress(const JobId& job, const DeedId& worker) const {
    const auto it = chains_.find({job, worker});
    return it == chains_.end() ? 0 : it->second.index;
}

}  // namespace poai::distribution
