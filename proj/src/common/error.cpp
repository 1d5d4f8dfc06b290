#include "poai/common/error.h"

namespace poai {

const char* errcName(Errc code) {
    switch (code) {
        case Errc::InvalidArgument: return "invalid argument";
        case Errc::GenesisEpoch: return "genesis epoch";
        case Errc::NoEligibleNodes: return "no eligible nodes";
        case Errc::UnknownDeed: return "unknown deed";
        case Errc::DuplicateDeed: return "duplicate deed";
        case Errc::InsufficientBalance: return "insufficient balance";
        case Errc::UnknownJob: return "unknown job";
        case Errc::AlreadySettled: return "already settled";
        case Errc::InvalidTransition: return "invalid transition";
        case Errc::ReviewNotDue: return "review not due";
        case Errc::ChallengeNotAllowed: return "challenge not allowed";
        case Errc::NoEligibleJurors: return "no eligible jurors";
        case Errc::UnknownChallenge: return "unknown challenge";
        case Errc::BadVotes: return "bad votes";
        case Errc::BadSignature: return "bad signature";
        case Errc::EmptyBatch: return "empty batch";
        case Errc::UnknownPluginKind: return "unknown plugin kind";
        case Errc::MalformedConfig: return "malformed config";
        case Errc::ArityMismatch: return "arity mismatch";
        case Errc::PluginRefused: return "plugin refused";
    }
    return "unknown";
}

}  // namespace poai
