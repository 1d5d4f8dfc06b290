#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "poai/common/crypto.h"
#include "poai/ledger/entry.h"

namespace poai::ledger {

struct LedgerBlock {
    std::uint64_t height = 0;
    Digest prevHash{};
    Digest entriesRoot{};
    SimTime timestamp = 0;
    std::vector<LedgerEntry> entries;
    // Header digest as sealed by the producer. Carried in the encoding so a
    // damaged header is attributed to its own height rather than the next one.
    Digest hash{};

    Digest computeHash() const;

    void encode(ByteWriter& w) const;
    Bytes encode() const;
    static LedgerBlock decode(std::span<const std::uint8_t> bytes);
};

Digest computeEntriesRoot(std::span<const LedgerEntry> entries);

// Deed -> key map assembled from NODE_SPEC entries. A NODE_SPEC is
// self-signed with the key it announces; a deed can never change keys.
class KeyDirectory {
public:
    std::optional<PublicKey> find(const DeedId& id) const;
    // Validates one entry against the directory, registering NODE_SPEC keys.
    // Returns an error description, or nullopt when the entry is valid.
    std::optional<std::string> admit(const LedgerEntry& entry);
    std::optional<std::string> check(const LedgerEntry& entry) const;

private:
    std::map<DeedId, PublicKey> keys_;
};

struct ChainVerdict {
    bool ok = true;
    std::optional<std::uint64_t> failedHeight;
    std::string reason;
};

// OK iff every height, prevHash link, stored hash, entriesRoot and entry
// signature checks out; otherwise the first failing height.
ChainVerdict verifyChain(std::span<const LedgerBlock> blocks);

// Append-only hash-chained ledger with a single producer. Genesis (height 0)
// carries no entries and an all-zero prevHash.
class Ledger {
public:
    explicit Ledger(SimTime genesisTime = 0);

    // All entries must verify (against keys already on chain or NODE_SPECs
    // earlier in the same batch); otherwise the whole batch is rejected with
    // Errc::BadSignature and the head is unchanged.
    const LedgerBlock& appendEntries(std::vector<LedgerEntry> entries, SimTime now);

    const std::vector<LedgerBlock>& blocks() const { return blocks_; }
    const LedgerBlock& head() const { return blocks_.back(); }
    std::uint64_t height() const { return head().height; }
    const Digest& headHash() const { return head().hash; }
    std::optional<PublicKey> keyOf(const DeedId& id) const { return keys_.find(id); }

    static Ledger fromBlocks(std::vector<LedgerBlock> blocks);

private:
    std::vector<LedgerBlock> blocks_;
    KeyDirectory keys_;
};

}  // namespace poai::ledger
