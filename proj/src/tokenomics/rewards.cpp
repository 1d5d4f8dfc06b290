#include "poai/tokenomics/rewards.h"

#include <algorithm>
#include <cmath>

#include "poai/common/error.h"

namespace poai::tokenomics {

Seconds totalProtocolTime(const EpochConfig& cfg) {
    if (cfg.epochSeconds <= 0) {
        throw ProtocolError(Errc::InvalidArgument, "epochSeconds must be positive");
    }
    if (cfg.currentEpoch == 0) {
        throw ProtocolError(Errc::GenesisEpoch, "genesis epoch has no protocol time");
    }
    return cfg.epochSeconds * static_cast<Seconds>(cfg.currentEpoch);
}

AliveFraction aliveFraction(const NodeActivity& activity, Seconds protocolTime) {
    if (protocolTime <= 0) {
        throw ProtocolError(Errc::InvalidArgument, "protocol time must be positive");
    }
    if (activity.totalAliveSeconds < 0) {
        throw ProtocolError(Errc::InvalidArgument, "negative alive time for " + activity.deedId);
    }
    if (activity.totalAliveSeconds > protocolTime) return {1.0, true};
    return {static_cast<double>(activity.totalAliveSeconds) / static_cast<double>(protocolTime), false};
}

double clampPowerScore(double power) {
    if (std::isnan(power)) throw ProtocolError(Errc::InvalidArgument, "power score is NaN");
    return std::clamp(power, kMinPowerScore, kMaxPowerScore);
}

double nodePowerIndex(double power, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) {
        throw ProtocolError(Errc::InvalidArgument, "alive fraction outside [0,1]");
    }
    return std::exp(clampPowerScore(power)) * tau;
}

std::vector<ShareRow> computeShares(std::span<const NodeActivity> activeNodes, const EpochConfig& cfg) {
    const Seconds maxAlive = totalProtocolTime(cfg);

    std::vector<ShareRow> rows;
    rows.reserve(activeNodes.size());
    double total = 0.0;
    for (const auto& node : activeNodes) {
        const auto alive = aliveFraction(node, maxAlive);
        ShareRow row;
        row.deedId = node.deedId;
        row.powerScore = clampPowerScore(node.power(cfg.currentEpoch));
        row.aliveFraction = alive.value;
        row.aliveClamped = alive.clamped;
        row.powerIndex = nodePowerIndex(row.powerScore, alive.value);
        total += row.powerIndex;
        rows.push_back(std::move(row));
    }
    if (!(total > 0.0)) {
        throw ProtocolError(Errc::NoEligibleNodes, "no eligible nodes");
    }
    for (auto& row : rows) row.share = row.powerIndex / total;
    return rows;
}

double allocShare(const DeedId& target, std::span<const NodeActivity> activeNodes, const EpochConfig& cfg) {
    const auto it = std::find_if(activeNodes.begin(), activeNodes.end(),
                                 [&](const NodeActivity& n) { return n.deedId == target; });
    if (it == activeNodes.end()) {
        throw ProtocolError(Errc::UnknownDeed, "deed " + target + " is not in the active set");
    }
    const Seconds maxAlive = totalProtocolTime(cfg);
    const double npi = nodePowerIndex(it->power(cfg.currentEpoch), aliveFraction(*it, maxAlive).value);

    double fp = 0.0;
    for (const auto& x : activeNodes) {
        fp += nodePowerIndex(x.power(cfg.currentEpoch), aliveFraction(x, maxAlive).value);
    }
    if (!(fp > 0.0)) throw ProtocolError(Errc::NoEligibleNodes, "no eligible nodes");
    return npi / fp;
}

Token RewardAllocation::distributed() const {
    Token sum;
    for (const auto& e : entries) sum += e.amount;
    return sum;
}

RewardAllocation distributeEpochRewards(const Token& poolSnapshot,
                                        std::span<const NodeActivity> activeNodes,
                                        const EpochConfig& cfg) {
    if (poolSnapshot.isNegative()) {
        throw ProtocolError(Errc::InvalidArgument, "negative reward pool snapshot");
    }
    RewardAllocation alloc;
    alloc.epoch = cfg.currentEpoch;
    alloc.poolSnapshot = poolSnapshot;

    if (activeNodes.empty()) {
        alloc.rolledOver = !poolSnapshot.isZero();
        alloc.warnings.emplace_back("no active nodes");
        return alloc;
    }

    std::vector<ShareRow> rows;
    try {
        rows = computeShares(activeNodes, cfg);
    } catch (const ProtocolError& e) {
        if (e.code() != Errc::NoEligibleNodes) throw;
        alloc.rolledOver = !poolSnapshot.isZero();
        alloc.warnings.emplace_back("no eligible nodes");
        const Seconds maxAlive = totalProtocolTime(cfg);
        for (const auto& n : activeNodes) {
            alloc.entries.push_back({n.deedId, 0.0, Token{}, clampPowerScore(n.power(cfg.currentEpoch)),
                                     aliveFraction(n, maxAlive).value});
        }
        std::sort(alloc.entries.begin(), alloc.entries.end(),
                  [](const auto& a, const auto& b) { return a.deedId < b.deedId; });
        return alloc;
    }

    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.deedId < b.deedId; });

    std::size_t top = rows.size();
    Token assigned;
    alloc.entries.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.aliveClamped) alloc.warnings.push_back("alive fraction clamped for " + row.deedId);
        AllocationEntry entry{row.deedId, row.share, Token{}, row.powerScore, row.aliveFraction};
        if (row.share > 0.0) {
            entry.amount = (poolSnapshot * Token::fromDouble(row.share).value()).floorTo(tokenQuantum());
            assigned += entry.amount;
            // rows are deedId-ordered, so strict > keeps the lowest deedId on ties.
            if (top == rows.size() || row.share > rows[top].share) top = i;
        }
        alloc.entries.push_back(std::move(entry));
    }
    alloc.entries[top].amount += poolSnapshot - assigned;
    return alloc;
}

PenaltyOutcome applyPenalty(NodeActivity& activity, std::uint64_t epoch, std::uint64_t currentEpoch,
                            double delta) {
    if (epoch != currentEpoch) {
        throw ProtocolError(Errc::InvalidArgument, "penalties apply to the current epoch only");
    }
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
        throw ProtocolError(Errc::InvalidArgument, "penalty delta must be finite and non-negative");
    }
    PenaltyOutcome out;
    out.before = activity.power(epoch);
    const double raw = out.before - delta;
    out.after = clampPowerScore(raw);
    out.clamped = out.after != raw;
    activity.powerScorePerEpoch[epoch] = out.after;
    return out;
}

void ActivityBook::add(NodeActivity activity) {
    if (nodes_.contains(activity.deedId)) {
        throw ProtocolError(Errc::DuplicateDeed, "activity for " + activity.deedId + " already tracked");
    }
    auto id = activity.deedId;
    nodes_.emplace(std::move(id), std::move(activity));
}

NodeActivity& ActivityBook::at(const DeedId& id) {
    const auto it = nodes_.find(id);
    if (it == nodes_.end()) throw ProtocolError(Errc::UnknownDeed, "unknown deed " + id);
    return it->second;
}

const NodeActivity& ActivityBook::at(const DeedId& id) const {
    const auto it = nodes_.find(id);
    if (it == nodes_.end()) throw ProtocolError(Errc::UnknownDeed, "unknown deed " + id);
    return it->second;
}

PenaltyOutcome ActivityBook::applyPenalty(const DeedId& id, std::uint64_t epoch, std::uint64_t currentEpoch,
                                          double delta) {
    return tokenomics::applyPenalty(at(id), epoch, currentEpoch, delta);
}

double ActivityBook::setPower(const DeedId& id, std::uint64_t epoch, double power) {
    return at(id).powerScorePerEpoch[epoch] = clampPowerScore(power);
}

double ActivityBook::addPower(const DeedId& id, std::uint64_t epoch, double delta) {
    auto& node = at(id);
    return node.powerScorePerEpoch[epoch] = clampPowerScore(node.power(epoch) + delta);
}

std::vector<NodeActivity> ActivityBook::snapshot() const {
    std::vector<NodeActivity> out;
    out.reserve(nodes_.size());
    for (const auto& [id, n] : nodes_) out.push_back(n);
    return out;
}

}  // namespace poai::tokenomics
