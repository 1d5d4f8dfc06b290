#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "poai/common/crypto.h"
#include "poai/common/rng.h"
#include "poai/simnet/scenario.h"

namespace poai::simnet {

struct Envelope {
    std::string topic;  // hierarchical, e.g. "job/n1/1/progress"
    DeedId sender;
    Bytes body;
    Signature signature{};

    static Envelope make(std::string topic, DeedId sender, Bytes body, const KeyPair& key);
    Bytes signingMessage() const;
};

struct Delivery {
    SimTime at = 0;
    DeedId recipient;
    Envelope envelope;
};

// published counts one per (message, subscriber) copy.
struct BrokerAudit {
    std::uint64_t published = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::uint64_t rejected = 0;
    std::uint64_t pending = 0;  // scheduled but not yet due when the run ended

    bool balanced() const { return published == delivered + dropped + rejected + pending; }
};

using KeyResolver = std::function<std::optional<PublicKey>(const DeedId&)>;

// Topic publish/subscribe with per-region latency and drop. Same-region
// copies take intraLatency; cross-region copies go sender -> own validator
// -> peer validator -> recipient: intra(src) + inter(src) + intra(dst), and
// may be dropped on either regional leg.
class Broker {
public:
    Broker(const ScenarioConfig& cfg, RngStream rng);

    void subscribe(const std::string& topic, const DeedId& node);
    void unsubscribe(const std::string& topic, const DeedId& node);

    // Returns the copies to schedule. Signature failures and drops are audited
    // and return nothing.
    std::vector<Delivery> publish(const Envelope& env, SimTime now, const KeyResolver& keys);

    // Bookkeeping from the event loop.
    void markDelivered() { ++audit_.delivered; --inFlight_; }
    void markDroppedOnArrival() { ++audit_.dropped; --inFlight_; }
    BrokerAudit audit() const;

    Seconds latency(const std::string& fromRegion, const std::string& toRegion) const;
    double dropProbability(const std::string& region, SimTime now) const;

private:
    const ScenarioConfig& cfg_;
    RngStream rng_;
    std::map<std::string, std::set<DeedId>> subscribers_;
    std::map<DeedId, std::string> regionOf_;
    BrokerAudit audit_;
    std::uint64_t inFlight_ = 0;
};

}  // namespace poai::simnet
