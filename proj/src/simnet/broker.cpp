#include "poai/simnet/broker.h"

#include "poai/common/codec.h"

namespace poai::simnet {

Bytes Envelope::signingMessage() const {
    ByteWriter w;
    w.str("poai.envelope.v1");
    w.str(topic);
    w.str(sender);
    w.bytes(body);
    return std::move(w).take();
}

Envelope Envelope::make(std::string topic, DeedId sender, Bytes body, const KeyPair& key) {
    Envelope e{std::move(topic), std::move(sender), std::move(body), {}};
    e.signature = key.sign(e.signingMessage());
    return e;
}

Broker::Broker(const ScenarioConfig& cfg, RngStream rng) : cfg_(cfg), rng_(std::move(rng)) {
    for (const auto& n : cfg.nodes) regionOf_[n.deedId] = n.region;
    for (const auto& r : cfg.regions) regionOf_[r.validator] = r.name;
}

void Broker::subscribe(const std::string& topic, const DeedId& node) { subscribers_[topic].insert(node); }

void Broker::unsubscribe(const std::string& topic, const DeedId& node) {
    const auto it = subscribers_.find(topic);
    if (it == subscribers_.end()) return;
    it->second.erase(node);
    if (it->second.empty()) subscribers_.erase(it);
}

Seconds Broker::latency(const std::string& from, const std::string& to) const {
    const auto* a = cfg_.region(from);
    const auto* b = cfg_.region(to);
    if (from == to) return a->intraLatency;
    return a->intraLatency + a->interLatency + b->intraLatency;
}

double Broker::dropProbability(const std::string& region, SimTime now) const {
    double p = cfg_.region(region)->dropProbability;
    for (const auto& f : cfg_.faults) {
        if (f.kind == FaultKind::DropWindow && f.region == region && now >= cfg_.genesisTime + f.from &&
            now < cfg_.genesisTime + f.to) {
            p = std::max(p, f.probability);
        }
    }
    return p;
}

std::vector<Delivery> Broker::publish(const Envelope& env, SimTime now, const KeyResolver& keys) {
    std::vector<Delivery> out;
    const auto subs = subscribers_.find(env.topic);
    if (env.topic.empty() || subs == subscribers_.end()) return out;
    const auto copies = subs->second.size();
    audit_.published += copies;

    const auto key = keys(env.sender);
    if (!key || !verifySignature(*key, env.signingMessage(), env.signature)) {
        audit_.rejected += copies;
        return out;
    }
    const auto& src = regionOf_.at(env.sender);
    for (const auto& to : subs->second) {
        const auto& dst = regionOf_.at(to);
        // Always one draw per leg so the stream position does not depend on outcomes.
        bool drop = rng_.bernoulli(dropProbability(src, now));
        if (src != dst) drop = rng_.bernoulli(dropProbability(dst, now)) || drop;
        if (drop) {
            ++audit_.dropped;
            continue;
        }
        ++inFlight_;
        out.push_back({now + latency(src, dst), to, env});
    }
    return out;
}

BrokerAudit Broker::audit() const {
    auto a = audit_;
    a.pending = inFlight_;
    return a;
}

}  // namespace poai::simnet
