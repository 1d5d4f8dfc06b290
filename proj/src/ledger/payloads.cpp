#include "poai/ledger/payloads.h"

namespace poai::ledger {
namespace {

template <typename Fn>
auto decodeAll(std::span<const std::uint8_t> bytes, Fn&& fn) {
    ByteReader r(bytes);
    auto out = fn(r);
    r.expectDone();
    return out;
}

}  // namespace

Bytes NodeSpecPayload::encode() const {
    ByteWriter w;
    w.str(deedId);
    w.fixed(ownerKey);
    capability.encode(w);
    w.str(region);
    return std::move(w).take();
}

NodeSpecPayload NodeSpecPayload::decode(std::span<const std::uint8_t> bytes) {
    return decodeAll(bytes, [](ByteReader& r) {
        NodeSpecPayload p;
        p.deedId = r.str();
        p.ownerKey = r.fixed<32>();
        p.capability = Capability::decode(r);
        p.region = r.str();
        return p;
    });
}

Bytes JobStatusPayload::encode() const {
    ByteWriter w;
    job.encode(w);
    w.u8(static_cast<std::uint8_t>(status));
    w.fixed(resultDigest);
    w.str(reason);
    return std::move(w).take();
}

JobStatusPayload JobStatusPayload::decode(std::span<const std::uint8_t> bytes) {
    return decodeAll(bytes, [](ByteReader& r) {
        JobStatusPayload p;
        p.job = JobId::decode(r);
        p.status = jobStatusFromByte(r.u8());
        p.resultDigest = r.fixed<32>();
        p.reason = r.str();
        return p;
    });
}

Bytes ChallengePayload::encode() const {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(action));
    w.u64(challengeId);
    job.encode(w);
    w.str(challenger);
    bond.encode(w);
    w.u64(jurySeed);
    w.u32(static_cast<std::uint32_t>(votes.size()));
    for (const auto& v : votes) {
        w.str(v.juror);
        w.boolean(v.upheld);
    }
    return std::move(w).take();
}

ChallengePayload ChallengePayload::decode(std::span<const std::uint8_t> bytes) {
    return decodeAll(bytes, [](ByteReader& r) {
        ChallengePayload p;
        const auto action = r.u8();
        if (action > 1) throw DecodeError("invalid challenge action");
        p.action = static_cast<ChallengeAction>(action);
        p.challengeId = r.u64();
        p.job = JobId::decode(r);
        p.challenger = r.str();
        p.bond = Token::decode(r);
        p.jurySeed = r.u64();
        const auto n = r.u32();
        if (n > r.remaining()) throw DecodeError("vote count exceeds payload");
        for (std::uint32_t i = 0; i < n; ++i) {
            JurorVote v;
            v.juror = r.str();
            v.upheld = r.boolean();
            p.votes.push_back(std::move(v));
        }
        return p;
    });
}

Bytes RewardRecordPayload::encode() const {
    ByteWriter w;
    w.u64(epoch);
    poolSnapshot.encode(w);
    w.boolean(rolledOver);
    w.u32(static_cast<std::uint32_t>(rows.size()));
    for (const auto& row : rows) {
        w.str(row.deedId);
        w.f64(row.share);
        row.amount.encode(w);
        w.f64(row.powerScore);
        w.f64(row.aliveFraction);
    }
    return std::move(w).take();
}

RewardRecordPayload RewardRecordPayload::decode(std::span<const std::uint8_t> bytes) {
    return decodeAll(bytes, [](ByteReader& r) {
        RewardRecordPayload p;
        p.epoch = r.u64();
        p.poolSnapshot = Token::decode(r);
        p.rolledOver = r.boolean();
        const auto n = r.u32();
        if (n > r.remaining()) throw DecodeError("row count exceeds payload");
        for (std::uint32_t i = 0; i < n; ++i) {
            RewardRow row;
            row.deedId = r.str();
            row.share = r.f64();
            row.amount = Token::decode(r);
            row.powerScore = r.f64();
            row.aliveFraction = r.f64();
            p.rows.push_back(std::move(row));
        }
        return p;
    });
}

Bytes PoolEventPayload::encode() const {
    ByteWriter w;
    w.str(event);
    w.boolean(job.has_value());
    if (job) job->encode(w);
    amount.encode(w);
    w.str(detail);
    return std::move(w).take();
}

PoolEventPayload PoolEventPayload::decode(std::span<const std::uint8_t> bytes) {
    return decodeAll(bytes, [](ByteReader& r) {
        PoolEventPayload p;
        p.event = r.str();
        if (r.boolean()) p.job = JobId::decode(r);
        p.amount = Token::decode(r);
        p.detail = r.str();
        return p;
    });
}

}  // namespace poai::ledger
