#include "poai/ledger/oracle.h"

namespace poai::ledger {

std::vector<PoolCommand> oracleMirror(const LedgerEntry& entry) {
    std::vector<PoolCommand> out;
    try {
        switch (entry.kind) {
            case EntryKind::JobStatus: {
                const auto p = JobStatusPayload::decode(entry.payload);
                if (p.status == JobStatus::Done || p.status == JobStatus::Cancelled) {
                    out.emplace_back(SettleJobCommand{p.job, p.status});
                }
                break;
            }
            case EntryKind::RewardRecord: {
                const auto p = RewardRecordPayload::decode(entry.payload);
                if (p.rolledOver) break;
                for (const auto& row : p.rows) {
                    if (row.amount > Token{}) out.emplace_back(CreditDeedCommand{row.deedId, row.amount, p.epoch});
                }
                break;
            }
            case EntryKind::Challenge: {
                const auto p = ChallengePayload::decode(entry.payload);
                if (p.action == ChallengeAction::Open) {
                    out.emplace_back(OpenChallengeCommand{p.challengeId, p.job, p.challenger, p.bond, p.jurySeed});
                } else {
                    out.emplace_back(ResolveChallengeCommand{p.challengeId, p.votes});
                }
                break;
            }
            case EntryKind::NodeSpec:
            case EntryKind::JobAssign:
            case EntryKind::ProgressProof:
            case EntryKind::PoolEvent:
                break;
        }
    } catch (const DecodeError&) {
        out.clear();
    }
    return out;
}

}  // namespace poai::ledger
