#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "poai/common/codec.h"
#include "poai/common/types.h"

namespace poai {

// (sender, per-sender sequence); the sequence is the sender's job count at creation.
struct JobId {
    DeedId sender;
    std::uint64_t sequence = 0;

    std::string toString() const { return sender + "/" + std::to_string(sequence); }
    // Accepts "sender/3" and "(sender,3)".
    static std::optional<JobId> parse(std::string_view text);

    void encode(ByteWriter& w) const {
        w.str(sender);
        w.u64(sequence);
    }
    static JobId decode(ByteReader& r) {
        JobId id;
        id.sender = r.str();
        id.sequence = r.u64();
        return id;
    }

    friend auto operator<=>(const JobId&, const JobId&) = default;
    friend bool operator==(const JobId&, const JobId&) = default;
};

enum class JobStatus : std::uint8_t {
    Pending = 0,
    InProgress = 1,
    Done = 2,
    Cancelled = 3,
    LockedForReview = 4,
    Settled = 5,
    Refunded = 6,
};

const char* jobStatusName(JobStatus s);
JobStatus jobStatusFromByte(std::uint8_t b);  // throws DecodeError

}  // namespace poai
