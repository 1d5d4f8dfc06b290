#include "poai/common/job.h"

#include <charconv>

namespace poai {

std::optional<JobId> JobId::parse(std::string_view text) {
    std::string_view sender;
    std::string_view seq;
    if (text.size() >= 2 && text.front() == '(' && text.back() == ')') {
        const auto inner = text.substr(1, text.size() - 2);
        const auto comma = inner.rfind(',');
        if (comma == std::string_view::npos) return std::nullopt;
        sender = inner.substr(0, comma);
        seq = inner.substr(comma + 1);
        while (!seq.empty() && seq.front() == ' ') seq.remove_prefix(1);
    } else {
        const auto slash = text.rfind('/');
        if (slash == std::string_view::npos) return std::nullopt;
        sender = text.substr(0, slash);
        seq = text.substr(slash + 1);
    }
    if (sender.empty() || seq.empty()) return std::nullopt;
    std::uint64_t n = 0;
    const auto [ptr, ec] = std::from_chars(seq.data(), seq.data() + seq.size(), n);
    if (ec != std::errc{} || ptr != seq.data() + seq.size()) return std::nullopt;
    return JobId{std::string(sender), n};
}

const char* jobStatusName(JobStatus s) {
    switch (s) {
        case JobStatus::Pending: return "PENDING";
        case JobStatus::InProgress: return "IN_PROGRESS";
        case JobStatus::Done: return "DONE";
        case JobStatus::Cancelled: return "CANCELLED";
        case JobStatus::LockedForReview: return "LOCKED_FOR_REVIEW";
        case JobStatus::Settled: return "SETTLED";
        case JobStatus::Refunded: return "REFUNDED";
    }
    return "?";
}

JobStatus jobStatusFromByte(std::uint8_t b) {
    if (b > static_cast<std::uint8_t>(JobStatus::Refunded)) {
        throw DecodeError("invalid job status " + std::to_string(b));
    }
    return static_cast<JobStatus>(b);
}

}  // namespace poai
