#include "poai/ledger/dump.h"

#include <fstream>
#include <iterator>

namespace poai::ledger {
namespace {

constexpr std::array<std::uint8_t, 8> kMagic{'P', 'O', 'A', 'I', 'L', 'D', 'G', '1'};
constexpr std::size_t kFieldsSize = 8 + 4 + 32 + 8 + 8;
constexpr std::size_t kHeaderSize = kFieldsSize + 32;

}  // namespace

Bytes encodeDump(const LedgerDump& dump) {
    ByteWriter body;
    for (const auto& b : dump.blocks) body.bytes(b.encode());

    ByteWriter w;
    w.fixed(kMagic);
    w.u32(kDumpVersion);
    w.fixed(dump.configDigest);
    w.u64(dump.blocks.size());
    w.u64(kHeaderSize + body.data().size());
    w.fixed(sha256(w.data()));
    w.raw(body.data());
    return std::move(w).take();
}

LedgerDump decodeDump(std::span<const std::uint8_t> bytes) {
    using Kind = DumpError::Kind;
    if (bytes.size() < kHeaderSize) throw DumpError(Kind::Truncated, std::nullopt, "truncated: short header");

    ByteReader r(bytes);
    if (r.fixed<8>() != kMagic) throw DumpError(Kind::BadHeader, std::nullopt, "bad magic");
    if (const auto v = r.u32(); v != kDumpVersion) {
        throw DumpError(Kind::BadHeader, std::nullopt, "unsupported version " + std::to_string(v));
    }
    LedgerDump dump;
    dump.configDigest = r.fixed<32>();
    const auto count = r.u64();
    const auto total = r.u64();
    if (r.fixed<32>() != sha256(bytes.first(kFieldsSize))) {
        throw DumpError(Kind::BadHeader, std::nullopt, "header checksum mismatch");
    }
    if (bytes.size() < total) {
        throw DumpError(Kind::Truncated, std::nullopt,
                        "truncated: " + std::to_string(bytes.size()) + " of " + std::to_string(total) + " bytes");
    }
    if (bytes.size() > total) throw DumpError(Kind::BadHeader, std::nullopt, "trailing data after declared size");

    for (std::uint64_t h = 0; h < count; ++h) {
        if (r.done()) throw DumpError(Kind::BadHeader, std::nullopt, "fewer blocks than declared");
        try {
            if (r.remaining() < 4) throw DecodeError("frame header cut short");
            const auto len = r.u32();
            if (len > r.remaining()) throw DecodeError("frame overruns file");
            const Bytes frame = r.raw(len);
            dump.blocks.push_back(LedgerBlock::decode(frame));
        } catch (const DecodeError& e) {
            throw DumpError(Kind::BadBlock, h, "block " + std::to_string(h) + " malformed: " + e.what());
        }
    }
    if (!r.done()) throw DumpError(Kind::BadHeader, std::nullopt, "more data than declared blocks");
    return dump;
}

void writeDump(const std::filesystem::path& path, const LedgerDump& dump) {
    const Bytes bytes = encodeDump(dump);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

LedgerDump readDump(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DumpError(DumpError::Kind::Unreadable, std::nullopt, "cannot read " + path.string());
    const Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw DumpError(DumpError::Kind::Unreadable, std::nullopt, "read error on " + path.string());
    return decodeDump(bytes);
}

}  // namespace poai::ledger
