#include "poai/ledger/entry.h"

namespace poai::ledger {
namespace {
constexpr std::string_view kEntryDomain = "poai.ledger.entry.v1";
}

const char* entryKindName(EntryKind k) {
    switch (k) {
        case EntryKind::NodeSpec: return "NODE_SPEC";
        case EntryKind::JobAssign: return "JOB_ASSIGN";
        case EntryKind::JobStatus: return "JOB_STATUS";
        case EntryKind::ProgressProof: return "PROGRESS_PROOF";
        case EntryKind::Challenge: return "CHALLENGE";
        case EntryKind::RewardRecord: return "REWARD_RECORD";
        case EntryKind::PoolEvent: return "POOL_EVENT";
    }
    return "?";
}

LedgerEntry LedgerEntry::make(EntryKind kind, DeedId author, Bytes payload, const KeyPair& key) {
    LedgerEntry e;
    e.kind = kind;
    e.author = std::move(author);
    e.payload = std::move(payload);
    e.signature = key.sign(e.signingMessage());
    return e;
}

Bytes LedgerEntry::signingMessage() const {
    ByteWriter w;
    w.str(kEntryDomain);
    w.u8(static_cast<std::uint8_t>(kind));
    w.str(author);
    w.bytes(payload);
    return std::move(w).take();
}

bool LedgerEntry::verify(const PublicKey& key) const {
    return verifySignature(key, signingMessage(), signature);
}

void LedgerEntry::encode(ByteWriter& w) const {
    w.u8(static_cast<std::uint8_t>(kind));
    w.str(author);
    w.bytes(payload);
    w.fixed(signature);
}

LedgerEntry LedgerEntry::decode(ByteReader& r) {
    LedgerEntry e;
    const auto k = r.u8();
    if (k > static_cast<std::uint8_t>(EntryKind::PoolEvent)) {
        throw DecodeError("invalid entry kind " + std::to_string(k));
    }
    e.kind = static_cast<EntryKind>(k);
    e.author = r.str();
    e.payload = r.bytes();
    e.signature = r.fixed<64>();
    return e;
}

Digest LedgerEntry::digest() const {
    ByteWriter w;
    encode(w);
    return sha256(w.data());
}

}  // namespace poai::ledger
