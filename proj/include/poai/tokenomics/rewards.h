#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "poai/common/token.h"
#include "poai/common/types.h"
#include "poai/tokenomics/node.h"

namespace poai::tokenomics {

inline constexpr double kMinPowerScore = -50.0;
inline constexpr double kMaxPowerScore = 50.0;

struct EpochConfig {
    Seconds epochSeconds = 3600;
    SimTime genesisTime = 0;
    std::uint64_t currentEpoch = 0;
};

// epochSeconds * currentEpoch. Epoch zero has no elapsed protocol time.
Seconds totalProtocolTime(const EpochConfig& cfg);

struct AliveFraction {
    double value = 0.0;
    bool clamped = false;
};

// Cumulative alive time over protocol time, clamped to [0, 1].
AliveFraction aliveFraction(const NodeActivity& activity, Seconds protocolTime);

double clampPowerScore(double power);

// exp(power) * tau. power is clamped to the score bounds first.
double nodePowerIndex(double power, double tau);

struct ShareRow {
    DeedId deedId;
    double powerScore = 0.0;
    double aliveFraction = 0.0;
    bool aliveClamped = false;
    double powerIndex = 0.0;
    double share = 0.0;
};

// Power index of every node and its fraction of the index total. Uses the
// power score recorded for cfg.currentEpoch. Throws NoEligibleNodes when the
// total index is zero.
std::vector<ShareRow> computeShares(std::span<const NodeActivity> activeNodes, const EpochConfig& cfg);

// Share of one node: its power index divided by the sum over all active nodes.
double allocShare(const DeedId& target, std::span<const NodeActivity> activeNodes, const EpochConfig& cfg);

struct AllocationEntry {
    DeedId deedId;
    double share = 0.0;
    Token amount;
    double powerScore = 0.0;
    double aliveFraction = 0.0;
};

struct RewardAllocation {
    std::uint64_t epoch = 0;
    Token poolSnapshot;
    std::vector<AllocationEntry> entries;  // ordered by deedId
    bool rolledOver = false;               // nothing distributed; pool carries to next epoch
    std::vector<std::string> warnings;

    Token distributed() const;
};

// Splits the epoch-close pool snapshot in one pass. Amounts are floored to
// tokenQuantum(); the residue goes to the highest-share node (lowest deedId on
// ties), so the entries sum to poolSnapshot exactly. Nodes with zero alive
// time get nothing. With no eligible node and a positive pool, the allocation
// is marked rolledOver and carries no amounts.
RewardAllocation distributeEpochRewards(const Token& poolSnapshot,
                                        std::span<const NodeActivity> activeNodes,
                                        const EpochConfig& cfg);

struct PenaltyOutcome {
    double before = 0.0;
    double after = 0.0;
    bool clamped = false;
};

// Lowers the node's power score for the current epoch by delta >= 0, bounded below.
PenaltyOutcome applyPenalty(NodeActivity& activity, std::uint64_t epoch, std::uint64_t currentEpoch,
                            double delta);

// Per-node activity keyed by deed.
class ActivityBook {
public:
    void add(NodeActivity activity);
    bool contains(const DeedId& id) const { return nodes_.contains(id); }
    NodeActivity& at(const DeedId& id);
    const NodeActivity& at(const DeedId& id) const;

    PenaltyOutcome applyPenalty(const DeedId& id, std::uint64_t epoch, std::uint64_t currentEpoch,
                                double delta);
    // Sets the score for an epoch, clamped to the bounds. Returns the stored value.
    double setPower(const DeedId& id, std::uint64_t epoch, double power);
    double addPower(const DeedId& id, std::uint64_t epoch, double delta);

    std::vector<NodeActivity> snapshot() const;  // ordered by deedId
    const std::map<DeedId, NodeActivity>& all() const { return nodes_; }

private:
    std::map<DeedId, NodeActivity> nodes_;
};

}  // namespace poai::tokenomics
