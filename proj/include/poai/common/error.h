#pragma once

#include <stdexcept>
#include <string>

namespace poai {

enum class Errc {
    InvalidArgument,
    GenesisEpoch,
    NoEligibleNodes,
    UnknownDeed,
    DuplicateDeed,
    InsufficientBalance,
    UnknownJob,
    AlreadySettled,
    InvalidTransition,
    ReviewNotDue,
    ChallengeNotAllowed,
    NoEligibleJurors,
    UnknownChallenge,
    BadVotes,
    BadSignature,
    EmptyBatch,
    UnknownPluginKind,
    MalformedConfig,
    ArityMismatch,
    PluginRefused,
};

const char* errcName(Errc code);

// Protocol-level rejection. State is left unchanged by any operation that throws it.
class ProtocolError : public std::runtime_error {
public:
    ProtocolError(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace poai
