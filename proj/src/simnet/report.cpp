#include "poai/simnet/report.h"

#include <nlohmann/json.hpp>
#include <sstream>

namespace poai::simnet {

using nlohmann::ordered_json;

const EpochRecord* SimReport::epoch(std::uint64_t e) const {
    for (const auto& r : epochs) {
        if (r.epoch == e) return &r;
    }
    return nullptr;
}

const JobRecord* SimReport::job(const JobId& id) const {
    for (const auto& j : jobs) {
        if (j.id == id) return &j;
    }
    return nullptr;
}

namespace {

ordered_json poolsJson(const escrow::PoolState& p) {
    ordered_json locked = ordered_json::array();
    for (const auto& l : p.lockedFunds) {
        locked.push_back({{"job", l.job.toString()}, {"amount", l.amount.toString()}, {"unlockTime", l.unlockTime}});
    }
    ordered_json bonds = ordered_json::array();
    for (const auto& b : p.challengeBonds) {
        bonds.push_back({{"challengeId", b.challengeId}, {"challenger", b.challenger}, {"amount", b.amount.toString()}});
    }
    return {{"escrowPool", p.escrowPool.toString()},
            {"rewardPool", p.rewardPool.toString()},
            {"lockedFunds", locked},
            {"challengeBonds", bonds}};
}

ordered_json runJson(const SimReport& r) {
    return {{"type", "run"},
            {"scenario", r.scenario},
            {"seed", r.seed},
            {"seedOverridden", r.seedOverridden},
            {"configDigest", toHex(r.configDigest)},
            {"epochSeconds", r.epochSeconds},
            {"horizonEpochs", r.horizonEpochs}};
}

ordered_json epochJson(const EpochRecord& e) {
    ordered_json rows = ordered_json::array();
    for (const auto& a : e.allocation.entries) {
        rows.push_back({{"deedId", a.deedId},
                        {"share", a.share},
                        {"amount", a.amount.toString()},
                        {"powerScore", a.powerScore},
                        {"aliveFraction", a.aliveFraction}});
    }
    return {{"type", "epoch"},
            {"epoch", e.epoch},
            {"at", e.at},
            {"poolSnapshot", e.allocation.poolSnapshot.toString()},
            {"rolledOver", e.allocation.rolledOver},
            {"rows", rows},
            {"warnings", e.allocation.warnings},
            {"pools", poolsJson(e.pools)}};
}

ordered_json summaryJson(const SimReport& r) {
    ordered_json jobs = ordered_json::array();
    for (const auto& j : r.jobs) {
        ordered_json o{{"index", j.index},
                       {"job", j.id ? j.id->toString() : ""},
                       {"outcome", j.outcome},
                       {"workers", j.workers},
                       {"finalStatus", j.finalStatus ? jobStatusName(*j.finalStatus) : ""}};
        if (j.aggregateDigest) o["aggregateDigest"] = toHex(*j.aggregateDigest);
        if (j.assignHeight) o["assignHeight"] = *j.assignHeight;
        jobs.push_back(std::move(o));
    }
    ordered_json balances = ordered_json::object();
    for (const auto& [id, b] : r.finalBalances) balances[id] = b.toString();
    ordered_json alive = ordered_json::object();
    for (const auto& [id, s] : r.aliveSeconds) alive[id] = s;
    ordered_json rejections = ordered_json::array();
    for (const auto& o : r.oracleRejections) {
        rejections.push_back({{"at", o.at}, {"height", o.height}, {"command", o.command}, {"error", o.error}});
    }
    return {{"type", "summary"},
            {"events", r.eventsProcessed},
            {"blocks", r.blocks.size()},
            {"ledgerHead", r.blocks.empty() ? "" : toHex(r.blocks.back().hash)},
            {"initialSupply", r.initialSupply.toString()},
            {"finalSupply", r.finalSupply.toString()},
            {"conservationChecks", r.conservationChecks},
            {"conservationViolation", r.conservationViolation.value_or("")},
            {"settledIntoRewardPool", r.settledTotal.toString()},
            {"rejectedBondsIntoRewardPool", r.rejectedBondsTotal.toString()},
            {"distributed", r.distributedTotal.toString()},
            {"refunded", r.refundedTotal.toString()},
            {"pools", poolsJson(r.finalPools)},
            {"balances", balances},
            {"aliveSeconds", alive},
            {"broker",
             {{"published", r.broker.published},
              {"delivered", r.broker.delivered},
              {"dropped", r.broker.dropped},
              {"rejected", r.broker.rejected},
              {"pending", r.broker.pending}}},
            {"jobs", jobs},
            {"oracleRejections", rejections}};
}

}  // namespace

std::string renderReport(const SimReport& r, ReportFormat format) {
    std::ostringstream out;
    auto line = [&out](const ordered_json& j) { out << j.dump() << '\n'; };
    line(runJson(r));
    if (format == ReportFormat::Records) {
        for (const auto& e : r.epochs) line(epochJson(e));
        for (const auto& t : r.timeline) {
            line({{"type", "timeline"},
                  {"job", t.job.toString()},
                  {"at", t.at},
                  {"height", t.height},
                  {"event", t.event},
                  {"detail", t.detail}});
        }
        for (const auto& p : r.penalties) {
            line({{"type", "penalty"},
                  {"at", p.at},
                  {"epoch", p.epoch},
                  {"deedId", p.deedId},
                  {"reason", p.reason},
                  {"delta", p.delta},
                  {"before", p.before},
                  {"after", p.after}});
        }
        for (const auto& s : r.settlements) {
            line({{"type", "settlement"},
                  {"at", s.at},
                  {"job", s.job.toString()},
                  {"status", jobStatusName(s.status)},
                  {"escrowBefore", s.escrowBefore.toString()},
                  {"escrowAfter", s.escrowAfter.toString()},
                  {"rewardBefore", s.rewardBefore.toString()},
                  {"rewardAfter", s.rewardAfter.toString()},
                  {"lockedBefore", s.lockedBefore.toString()},
                  {"lockedAfter", s.lockedAfter.toString()}});
        }
        for (const auto& c : r.challenges) {
            ordered_json votes = ordered_json::array();
            for (const auto& v : c.votes) votes.push_back({{"juror", v.juror}, {"upheld", v.upheld}});
            line({{"type", "challenge"},
                  {"challengeId", c.challengeId},
                  {"job", c.job.toString()},
                  {"challenger", c.challenger},
                  {"bond", c.bond.toString()},
                  {"jury", c.jury},
                  {"verdict", escrow::challengeVerdictName(c.verdict)},
                  {"votes", votes},
                  {"refused", c.refused}});
        }
    }
    line(summaryJson(r));
    return out.str();
}

ledger::LedgerDump ledgerDump(const SimReport& report) { return {report.configDigest, report.blocks}; }

}  // namespace poai::simnet
