#pragma once

#include <cstdint>

#include "poai/common/codec.h"
#include "poai/common/crypto.h"
#include "poai/common/types.h"

namespace poai::ledger {

enum class EntryKind : std::uint8_t {
    NodeSpec = 0,
    JobAssign = 1,
    JobStatus = 2,
    ProgressProof = 3,
    Challenge = 4,
    RewardRecord = 5,
    PoolEvent = 6,
};

const char* entryKindName(EntryKind k);

struct LedgerEntry {
    EntryKind kind = EntryKind::PoolEvent;
    Bytes payload;
    DeedId author;
    Signature signature{};

    // Signs (domain tag, kind, author, payload) so an entry cannot be relabelled.
    static LedgerEntry make(EntryKind kind, DeedId author, Bytes payload, const KeyPair& key);

    Bytes signingMessage() const;
    bool verify(const PublicKey& key) const;

    void encode(ByteWriter& w) const;
    static LedgerEntry decode(ByteReader& r);
    Digest digest() const;

    friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

}  // namespace poai::ledger
