#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "poai/common/capability.h"
#include "poai/common/crypto.h"
#include "poai/common/token.h"
#include "poai/common/types.h"

namespace poai::tokenomics {

using poai::Capability;
using poai::CapabilityWeights;
using poai::capabilityScore;

struct NodeDeed {
    DeedId deedId;
    PublicKey ownerKey{};
    Token balance;
    std::int64_t registeredEpoch = 0;
};

struct NodeActivity {
    DeedId deedId;
    Seconds totalAliveSeconds = 0;
    std::map<std::uint64_t, double> powerScorePerEpoch;
    Capability declaredCapability;

    // Missing epochs score 0.
    double power(std::uint64_t epoch) const;
};

// Public-chain registry of node deeds and their balances.
class DeedRegistry {
public:
    void add(NodeDeed deed);
    bool contains(const DeedId& id) const { return deeds_.contains(id); }
    const NodeDeed& at(const DeedId& id) const;
    const Token& balance(const DeedId& id) const { return at(id).balance; }

    void credit(const DeedId& id, const Token& amount);
    // Throws InsufficientBalance without touching the balance.
    void debit(const DeedId& id, const Token& amount);

    Token totalBalance() const;
    const std::map<DeedId, NodeDeed>& all() const { return deeds_; }

private:
    NodeDeed& mut(const DeedId& id);
    std::map<DeedId, NodeDeed> deeds_;
};

}  // namespace poai::tokenomics
