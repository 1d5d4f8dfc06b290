#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "poai/common/codec.h"
#include "poai/common/crypto.h"
#include "poai/common/job.h"

namespace poai::distribution {

// One link of a worker's hash-commitment chain: commitment = H(prev || nonce).
// Only the link goes on the ledger; the nonce travels to the main node alone.
// A stand-in for a zero-knowledge progress proof: it shows that linkIndex
// steps were taken without revealing shard data, nothing more.
struct ProgressProof {
    JobId job;
    DeedId worker;
    std::uint64_t linkIndex = 0;
    Digest commitment{};
    Digest prevCommitment{};

    Bytes encode() const;
    static ProgressProof decode(std::span<const std::uint8_t> bytes);
    friend bool operator==(const ProgressProof&, const ProgressProof&) = default;
};

// Link 0 of every chain; binds the chain to its (job, worker).
Digest genesisCommitment(const JobId& job, const DeedId& worker);
Digest linkCommitment(const Digest& prev, const Digest& nonce);
ProgressProof makeLink(const JobId& job, const DeedId& worker, std::uint64_t linkIndex, const Digest& prev,
                       const Digest& nonce);

enum class ProgressStatus : std::uint8_t {
    Ok,
    Replay,  // linkIndex at or below the accepted head
    Gap,     // skips ahead; the missing links may still arrive
    Broken,  // next index but prevCommitment is not the accepted head
    Forged,  // H(prev || nonce) does not match the commitment
};
const char* progressStatusName(ProgressStatus s);

struct ProgressVerdict {
    ProgressStatus status = ProgressStatus::Ok;
    bool penalize = false;

    bool ok() const { return status == ProgressStatus::Ok; }
};

ProgressVerdict verifyProgress(const ProgressProof& proof, const Digest& priorHead, std::uint64_t priorIndex,
                               const Digest& revealedNonce);

// Main-node view of every (job, worker) chain.
class ProgressTracker {
public:
    struct Chain {
        Digest head{};
        std::uint64_t index = 0;
        std::vector<std::uint64_t> accepted;
    };

    ProgressVerdict submit(const ProgressProof& proof, const Digest& nonce);
    const Chain& chain(const JobId& job, const DeedId& worker);
    std::uint64_t progress(const JobId& job, const DeedId& worker) const;
    const std::map<std::pair<JobId, DeedId>, Chain>& chains() const { return chains_; }

private:
    std::map<std::pair<JobId, DeedId>, Chain> chains_;
};

}  // namespace poai::distribution
