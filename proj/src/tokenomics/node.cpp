#include "poai/tokenomics/node.h"

#include "poai/common/error.h"

namespace poai::tokenomics {

double NodeActivity::power(std::uint64_t epoch) const {
    const auto it = powerScorePerEpoch.find(epoch);
    return it == powerScorePerEpoch.end() ? 0.0 : it->second;
}

void DeedRegistry::add(NodeDeed deed) {
    if (deed.balance.isNegative()) {
        throw ProtocolError(Errc::InvalidArgument, "deed " + deed.deedId + " has negative balance");
    }
    if (deeds_.contains(deed.deedId)) {
        throw ProtocolError(Errc::DuplicateDeed, "deed " + deed.deedId + " already registered");
    }
    auto id = deed.deedId;
    deeds_.emplace(std::move(id), std::move(deed));
}

const NodeDeed& DeedRegistry::at(const DeedId& id) const {
    const auto it = deeds_.find(id);
    if (it == deeds_.end()) throw ProtocolError(Errc::UnknownDeed, "unknown deed " + id);
    return it->second;
}

NodeDeed& DeedRegistry::mut(const DeedId& id) {
    const auto it = deeds_.find(id);
    if (it == deeds_.end()) throw ProtocolError(Errc::UnknownDeed, "unknown deed " + id);
    return it->second;
}

void DeedRegistry::credit(const DeedId& id, const Token& amount) {
    if (amount.isNegative()) throw ProtocolError(Errc::InvalidArgument, "negative credit");
    mut(id).balance += amount;
}

void DeedRegistry::debit(const DeedId& id, const Token& amount) {
    if (amount.isNegative()) throw ProtocolError(Errc::InvalidArgument, "negative debit");
    auto& deed = mut(id);
    if (deed.balance < amount) {
        throw ProtocolError(Errc::InsufficientBalance,
                            "deed " + id + " balance " + deed.balance.toString() + " < " + amount.toString());
    }
    deed.balance -= amount;
}

Token DeedRegistry::totalBalance() const {
    Token sum;
    for (const auto& [id, deed] : deeds_) sum += deed.balance;
    return sum;
}

}  // namespace poai::tokenomics
