#include "poai/ledger/chain.h"

#include "poai/common/error.h"
#include "poai/ledger/payloads.h"

namespace poai::ledger {

Digest computeEntriesRoot(std::span<const LedgerEntry> entries) {
    Sha256 h;
    ByteWriter count;
    count.u64(entries.size());
    h.update(count.data());
    for (const auto& e : entries) h.update(e.digest());
    return h.finish();
}

Digest LedgerBlock::computeHash() const {
    ByteWriter w;
    w.str("poai.ledger.block.v1");
    w.u64(height);
    w.fixed(prevHash);
    w.fixed(entriesRoot);
    w.i64(timestamp);
    return sha256(w.data());
}

void LedgerBlock::encode(ByteWriter& w) const {
    w.u64(height);
    w.fixed(prevHash);
    w.fixed(entriesRoot);
    w.i64(timestamp);
    w.u32(static_cast<std::uint32_t>(entries.size()));
    for (const auto& e : entries) e.encode(w);
    w.fixed(hash);
}

Bytes LedgerBlock::encode() const {
    ByteWriter w;
    encode(w);
    return std::move(w).take();
}

LedgerBlock LedgerBlock::decode(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    LedgerBlock b;
    b.height = r.u64();
    b.prevHash = r.fixed<32>();
    b.entriesRoot = r.fixed<32>();
    b.timestamp = r.i64();
    const auto n = r.u32();
    if (n > r.remaining()) throw DecodeError("entry count exceeds block size");
    b.entries.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) b.entries.push_back(LedgerEntry::decode(r));
    b.hash = r.fixed<32>();
    r.expectDone();
    return b;
}

std::optional<PublicKey> KeyDirectory::find(const DeedId& id) const {
    const auto it = keys_.find(id);
    if (it == keys_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::string> KeyDirectory::check(const LedgerEntry& entry) const {
    if (entry.kind == EntryKind::NodeSpec) {
        NodeSpecPayload spec;
        try {
            spec = NodeSpecPayload::decode(entry.payload);
        } catch (const DecodeError& e) {
            return std::string("malformed node spec: ") + e.what();
        }
        if (spec.deedId != entry.author) return "node spec author mismatch for " + entry.author;
        if (const auto known = find(spec.deedId); known && *known != spec.ownerKey) {
            return "deed " + spec.deedId + " re-registered with a different key";
        }
        if (!entry.verify(spec.ownerKey)) return "bad node spec signature for " + entry.author;
        return std::nullopt;
    }
    const auto key = find(entry.author);
    if (!key) return "unknown author " + entry.author;
    if (!entry.verify(*key)) {
        return std::string("bad signature on ") + entryKindName(entry.kind) + " by " + entry.author;
    }
    return std::nullopt;
}

std::optional<std::string> KeyDirectory::admit(const LedgerEntry& entry) {
    if (auto err = check(entry)) return err;
    if (entry.kind == EntryKind::NodeSpec) {
        const auto spec = NodeSpecPayload::decode(entry.payload);
        keys_.emplace(spec.deedId, spec.ownerKey);
    }
    return std::nullopt;
}

ChainVerdict verifyChain(std::span<const LedgerBlock> blocks) {
    auto fail = [](std::uint64_t height, std::string reason) {
        return ChainVerdict{false, height, std::move(reason)};
    };
    if (blocks.empty()) return ChainVerdict{false, std::nullopt, "empty chain"};

    KeyDirectory keys;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& b = blocks[i];
        const auto h = static_cast<std::uint64_t>(i);
        if (b.height != h) return fail(h, "height field " + std::to_string(b.height));
        const Digest expectedPrev = i == 0 ? kZeroDigest : blocks[i - 1].hash;
        if (b.prevHash != expectedPrev) return fail(h, "prevHash does not link to previous block");
        if (i == 0 && !b.entries.empty()) return fail(h, "genesis carries entries");
        if (i > 0 && b.entries.empty()) return fail(h, "empty block");
        if (i > 0 && b.timestamp < blocks[i - 1].timestamp) return fail(h, "timestamp went backwards");
        if (computeEntriesRoot(b.entries) != b.entriesRoot) return fail(h, "entriesRoot mismatch");
        if (b.computeHash() != b.hash) return fail(h, "block hash mismatch");
        for (const auto& e : b.entries) {
            if (auto err = keys.admit(e)) return fail(h, *err);
        }
    }
    return {};
}

Ledger::Ledger(SimTime genesisTime) {
    LedgerBlock genesis;
    genesis.height = 0;
    genesis.timestamp = genesisTime;
    genesis.entriesRoot = computeEntriesRoot({});
    genesis.hash = genesis.computeHash();
    blocks_.push_back(std::move(genesis));
}

const LedgerBlock& Ledger::appendEntries(std::vector<LedgerEntry> entries, SimTime now) {
    if (entries.empty()) throw ProtocolError(Errc::EmptyBatch, "cannot append an empty batch");
    if (now < head().timestamp) {
        throw ProtocolError(Errc::InvalidArgument, "block timestamp earlier than head");
    }
    KeyDirectory staged = keys_;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (auto err = staged.admit(entries[i])) {
            throw ProtocolError(Errc::BadSignature, "entry " + std::to_string(i) + " rejected: " + *err);
        }
    }
    LedgerBlock b;
    b.height = head().height + 1;
    b.prevHash = head().hash;
    b.timestamp = now;
    b.entries = std::move(entries);
    b.entriesRoot = computeEntriesRoot(b.entries);
    b.hash = b.computeHash();
    blocks_.push_back(std::move(b));
    keys_ = std::move(staged);
    return blocks_.back();
}

Ledger Ledger::fromBlocks(std::vector<LedgerBlock> blocks) {
    const auto verdict = verifyChain(blocks);
    if (!verdict.ok) {
        throw ProtocolError(Errc::BadSignature,
                            "chain invalid at height " +
                                (verdict.failedHeight ? std::to_string(*verdict.failedHeight) : "?") + ": " +
                                verdict.reason);
    }
    Ledger l;
    l.blocks_ = std::move(blocks);
    for (const auto& b : l.blocks_) {
        for (const auto& e : b.entries) l.keys_.admit(e);
    }
    return l;
}

}  // namespace poai::ledger
