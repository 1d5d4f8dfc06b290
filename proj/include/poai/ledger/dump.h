#pragma once

// Ledger dump file:
//   magic "POAILDG1" | u32 version | 32-byte config digest | u64 block count |
//   u64 total file size | 32-byte digest of the preceding header fields |
//   block count x (u32 length | canonical block bytes)
// All integers big-endian. Loading and re-dumping is byte-identical.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "poai/common/crypto.h"
#include "poai/ledger/chain.h"

namespace poai::ledger {

inline constexpr std::uint32_t kDumpVersion = 1;

struct LedgerDump {
    Digest configDigest{};
    std::vector<LedgerBlock> blocks;
};

class DumpError : public std::runtime_error {
public:
    enum class Kind { Unreadable, Truncated, BadHeader, BadBlock };

    DumpError(Kind kind, std::optional<std::uint64_t> height, const std::string& what)
        : std::runtime_error(what), kind_(kind), height_(height) {}

    Kind kind() const { return kind_; }
    // Height of the block whose frame failed to decode (BadBlock only).
    std::optional<std::uint64_t> height() const { return height_; }

private:
    Kind kind_;
    std::optional<std::uint64_t> height_;
};

Bytes encodeDump(const LedgerDump& dump);
LedgerDump decodeDump(std::span<const std::uint8_t> bytes);

void writeDump(const std::filesystem::path& path, const LedgerDump& dump);
LedgerDump readDump(const std::filesystem::path& path);

}  // namespace poai::ledger
