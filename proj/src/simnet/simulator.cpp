#include "poai/simnet/simulator.h"

#include <algorithm>
#include <queue>
#include <set>
#include <variant>

#include "poai/common/error.h"
#include "poai/distribution/capability.h"
#include "poai/distribution/mapreduce.h"
#include "poai/distribution/progress.h"
#include "poai/ledger/oracle.h"
#include "poai/pipeline/runtime.h"

namespace poai::simnet {

KeyPair simKey(const DeedId& id) { return KeyPair::fromSeed(sha256("poai.sim.node/" + id)); }

namespace {

using distribution::ProgressProof;
using distribution::ProgressStatus;
using ledger::EntryKind;

struct DeliverEv { Delivery delivery; };
struct HeartbeatEv {};
struct EpochCloseEv { std::uint64_t epoch; };
struct JobArrivalEv { std::size_t job; };
struct NodeDownEv { DeedId node; };
struct NodeUpEv { DeedId node; };
struct StepTimer { std::size_t job; DeedId worker; };
struct DeadlineTimer { std::size_t job; };
struct ReviewTimer { std::size_t job; };
struct RetryTimer { std::size_t job; };
struct ChallengeTimer { std::size_t challenge; };
struct VoteTimer { std::size_t challenge; };

using EventBody = std::variant<DeliverEv, HeartbeatEv, EpochCloseEv, JobArrivalEv, NodeDownEv, NodeUpEv, StepTimer,
                               DeadlineTimer, ReviewTimer, RetryTimer, ChallengeTimer, VoteTimer>;

struct Event {
    SimTime at;
    std::uint64_t seq;
    EventBody body;
};

struct Later {
    bool operator()(const Event& a, const Event& b) const {
        return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
};

struct NodeRun {
    bool up = false;
    SimTime mark = 0;
};

struct WorkerRun {
    std::size_t shard = 0;
    pipeline::PipelineSpec spec;  // the worker's received copy
    bool started = false;
    bool aborted = false;
    pipeline::WorkerState state;
    Digest head{};
    std::vector<std::pair<ProgressProof, Digest>> links;
    Bytes payload;
};

struct JobRun {
    std::optional<JobId> id;
    pipeline::PipelineSpec spec;
    std::uint64_t seed = 0;
    SimTime deadline = 0;
    std::optional<distribution::Assignment> assignment;
    std::map<DeedId, WorkerRun> workers;
    std::map<DeedId, distribution::ShardResult> results;
    bool finished = false;
};

std::string topicCode(const JobId& id, const DeedId& w) { return "job/" + id.toString() + "/code/" + w; }
std::string topicProgress(const JobId& id) { return "job/" + id.toString() + "/progress"; }
std::string topicResult(const JobId& id) { return "job/" + id.toString() + "/result"; }

Bytes encodeCodeBundle(const pipeline::PipelineSpec& spec) {
    ByteWriter w;
    const auto codes = spec.customCode();
    w.u32(static_cast<std::uint32_t>(codes.size()));
    for (const auto* c : codes) w.bytes(c->encodeWire());
    return std::move(w).take();
}

std::vector<pipeline::PluginCode> decodeCodeBundle(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    const auto n = r.u32();
    if (n > 64) throw DecodeError("code bundle too large");
    std::vector<pipeline::PluginCode> out;
    for (std::uint32_t i = 0; i < n; ++i) out.push_back(pipeline::PluginCode::decodeWire(r.bytes()));
    r.expectDone();
    return out;
}

Bytes encodeProgressMsg(const ProgressProof& p, const Digest& nonce) {
    ByteWriter w;
    w.bytes(p.encode());
    w.fixed(nonce);
    return std::move(w).take();
}

std::pair<ProgressProof, Digest> decodeProgressMsg(ByteReader& r) {
    auto proof = ProgressProof::decode(r.bytes());
    auto nonce = r.fixed<32>();
    return {std::move(proof), nonce};
}

class Simulator {
public:
    Simulator(const ScenarioConfig& cfg, std::uint64_t seed, bool overridden)
        : cfg_(cfg),
          seed_(seed),
          root_(seed, "poai.sim"),
          chain_(makeDeeds(cfg), escrow::EscrowConfig{cfg.reviewLockSeconds, cfg.jurySize}),
          ledger_(cfg.genesisTime),
          broker_(cfg, root_.derive("broker")) {
        for (const auto& n : cfg.nodes) {
            keys_.emplace(n.deedId, simKey(n.deedId));
            activity_.add({n.deedId, 0, {}, n.capability});
        }
        for (const auto& r : cfg.regions) keys_.emplace(r.validator, simKey(r.validator));
        jobs_.resize(cfg.jobs.size());
        report_.jobs.resize(cfg.jobs.size());
        report_.seedOverridden = overridden;
        for (std::size_t i = 0; i < cfg.jobs.size(); ++i) report_.jobs[i].index = i;
    }

    SimReport run() {
        now_ = cfg_.genesisTime;
        report_.initialSupply = chain_.totalSupply();
        genesis();
        schedule();
        const auto horizon = cfg_.horizon();
        while (!queue_.empty() && queue_.top().at <= horizon) {
            Event ev = queue_.top();
            queue_.pop();
            now_ = ev.at;
            std::visit([this](auto& body) { handle(body); }, ev.body);
            commit();
            ++report_.eventsProcessed;
            report_.lastEventAt = now_;
            checkConservation();
        }
        return finish();
    }

private:
    static tokenomics::DeedRegistry makeDeeds(const ScenarioConfig& cfg) {
        tokenomics::DeedRegistry deeds;
        for (const auto& n : cfg.nodes) deeds.add({n.deedId, simKey(n.deedId).publicKey(), n.balance, 0});
        return deeds;
    }

    std::uint64_t epochAt(SimTime t) const {
        return static_cast<std::uint64_t>((t - cfg_.genesisTime) / cfg_.epochSeconds) + 1;
    }
    std::uint64_t epochNow() const { return epochAt(now_); }

    void push(SimTime at, EventBody body) { queue_.push({at, seq_++, std::move(body)}); }

    const DeedId& leadValidator() const { return cfg_.regions.front().validator; }
    const DeedId& validatorOf(const DeedId& node) const {
        return cfg_.region(cfg_.node(node)->region)->validator;
    }
    bool isUp(const DeedId& node) const {
        const auto it = nodes_.find(node);
        return it != nodes_.end() && it->second.up;
    }

    void emit(EntryKind kind, const DeedId& author, Bytes payload) {
        pending_.push_back(ledger::LedgerEntry::make(kind, author, std::move(payload), keys_.at(author)));
    }

    void timeline(const JobId& job, std::string event, std::string detail = {}) {
        // Height of the block that will carry this tick's pending entries.
        const auto height = ledger_.height() + (pending_.empty() ? 0 : 1);
        report_.timeline.push_back({job, now_, height, std::move(event), std::move(detail)});
    }

    void penalize(const DeedId& node, double delta, const std::string& reason) {
        if (!activity_.contains(node)) return;
        const auto e = epochNow();
        const auto out = activity_.applyPenalty(node, e, e, delta);
        report_.penalties.push_back({now_, e, node, reason, delta, out.before, out.after});
    }

    // ---- setup

    void genesis() {
        for (const auto& n : cfg_.nodes) {
            ledger::NodeSpecPayload p{n.deedId, keys_.at(n.deedId).publicKey(), n.capability, n.region};
            emit(EntryKind::NodeSpec, n.deedId, p.encode());
        }
        for (const auto& r : cfg_.regions) {
            ledger::NodeSpecPayload p{r.validator, keys_.at(r.validator).publicKey(), {}, r.name};
            emit(EntryKind::NodeSpec, r.validator, p.encode());
        }
        commit();
    }

    std::vector<Window> upIntervals(const NodeConfig& n, SimTime span) const {
        std::set<SimTime> cuts{0, span};
        auto addCut = [&](SimTime t) {
            if (t > 0 && t < span) cuts.insert(t);
        };
        for (const auto& w : n.uptime) addCut(w.from), addCut(w.to);
        std::vector<Window> down;
        for (const auto& f : cfg_.faults) {
            if (f.kind != FaultKind::NodeDown || f.node != n.deedId) continue;
            down.push_back({f.from, f.to});
            addCut(f.from), addCut(f.to);
        }
        auto inside = [](const std::vector<Window>& ws, SimTime t) {
            return std::any_of(ws.begin(), ws.end(), [t](const Window& w) { return t >= w.from && t < w.to; });
        };
        std::vector<Window> out;
        for (auto it = cuts.begin(); std::next(it) != cuts.end(); ++it) {
            const SimTime a = *it, b = *std::next(it);
            const bool up = (n.uptime.empty() || inside(n.uptime, a)) && !inside(down, a);
            if (!up) continue;
            if (!out.empty() && out.back().to == a) out.back().to = b;
            else out.push_back({a, b});
        }
        return out;
    }

    void schedule() {
        const auto g = cfg_.genesisTime;
        for (std::uint64_t e = 1; e <= cfg_.horizonEpochs; ++e) {
            push(g + cfg_.epochSeconds * static_cast<SimTime>(e), EpochCloseEv{e});
        }
        const SimTime span = cfg_.epochSeconds * static_cast<SimTime>(cfg_.horizonEpochs);
        for (const auto& n : cfg_.nodes) {
            auto& run = nodes_[n.deedId];
            run.mark = g;
            for (const auto& w : upIntervals(n, span)) {
                if (w.from == 0) run.up = true;
                else push(g + w.from, NodeUpEv{n.deedId});
                if (w.to < span) push(g + w.to, NodeDownEv{n.deedId});
            }
        }
        initEpochPower(1);
        for (std::size_t i = 0; i < cfg_.jobs.size(); ++i) push(g + cfg_.jobs[i].at, JobArrivalEv{i});
        for (std::size_t i = 0; i < cfg_.challenges.size(); ++i) push(g + cfg_.challenges[i].at, ChallengeTimer{i});
        push(g + cfg_.heartbeatPeriod(), HeartbeatEv{});
    }

    void initEpochPower(std::uint64_t e) {
        for (const auto& n : cfg_.nodes) {
            double p = 0.0;
            switch (n.powerSource) {
                case PowerSource::Measured: p = 0.0; break;
                case PowerSource::Series:
                    if (!n.powerSeries.empty()) p = n.powerSeries[std::min<std::size_t>(e - 1, n.powerSeries.size() - 1)];
                    break;
                case PowerSource::Capability:
                    p = cfg_.capabilityPowerScale * capabilityScore(n.capability, cfg_.weights);
                    break;
            }
            activity_.setPower(n.deedId, e, p);
        }
    }

    // ---- liveness

    void accrue(const DeedId& id) {
        auto& run = nodes_.at(id);
        if (run.up && now_ > run.mark) {
            const Seconds d = now_ - run.mark;
            activity_.at(id).totalAliveSeconds += d;
            report_.aliveByEpoch[id][epochAt(run.mark)] += d;
        }
        run.mark = now_;
    }

    void accrueAll() {
        for (const auto& [id, _] : nodes_) accrue(id);
    }

    void handle(HeartbeatEv&) {
        accrueAll();
        push(now_ + cfg_.heartbeatPeriod(), HeartbeatEv{});
    }

    void handle(NodeDownEv& ev) {
        accrue(ev.node);
        nodes_.at(ev.node).up = false;
    }

    void handle(NodeUpEv& ev) {
        auto& run = nodes_.at(ev.node);
        run.up = true;
        run.mark = now_;
    }

    // ---- epoch close

    void handle(EpochCloseEv& ev) {
        accrueAll();
        const tokenomics::EpochConfig ecfg{cfg_.epochSeconds, cfg_.genesisTime, ev.epoch};
        const auto snapshot = chain_.beginDistribution();
        const auto activities = activity_.snapshot();
        auto alloc = tokenomics::distributeEpochRewards(snapshot, activities, ecfg);

        ledger::RewardRecordPayload rec{ev.epoch, snapshot, alloc.rolledOver, {}};
        for (const auto& a : alloc.entries) {
            rec.rows.push_back({a.deedId, a.share, a.amount, a.powerScore, a.aliveFraction});
        }
        emit(EntryKind::RewardRecord, leadValidator(), rec.encode());
        if (alloc.rolledOver && !snapshot.isZero()) {
            ledger::PoolEventPayload p{"rollover", std::nullopt, snapshot, "no eligible node"};
            emit(EntryKind::PoolEvent, leadValidator(), p.encode());
        }
        commit();
        chain_.endDistribution();
        report_.epochs.push_back({ev.epoch, now_, std::move(alloc), chain_.pools()});
        initEpochPower(ev.epoch + 1);
    }

    // ---- jobs

    void handle(JobArrivalEv& ev) {
        const auto& jc = cfg_.jobs[ev.job];
        auto& run = jobs_[ev.job];
        auto& rec = report_.jobs[ev.job];
        const JobId provisional{jc.sender, chain_.jobCount(jc.sender) + 1};

        if (!isUp(jc.sender)) {
            rec.outcome = "sender-offline";
            timeline(provisional, "refused", "sender offline");
            return;
        }
        run.spec = jc.pipeline;
        pipeline::signCustomCode(run.spec, jc.sender, keys_.at(jc.sender));
        if (!pipeline::vetPipeline(run.spec, cfg_.safety)) {
            std::string why;
            for (const auto* c : run.spec.customCode()) {
                if (!c->verdict.safe()) why += (why.empty() ? "" : "; ") + c->verdict.toString();
            }
            rec.outcome = "refused";
            penalize(jc.sender, cfg_.penalties.refusal, "plugin refused: " + why);
            timeline(provisional, "refused", why);
            return;
        }
        try {
            const auto& job = chain_.submitJob(jc.sender, jc.reward, run.spec.digest(), jc.nWorkers, now_);
            run.id = job.id;
        } catch (const ProtocolError& e) {
            rec.outcome = "unfunded";
            timeline(provisional, "unfunded", e.what());
            return;
        }
        const auto& id = *run.id;
        rec.outcome = "funded";
        rec.id = id;
        jobIndex_[id] = ev.job;
        run.seed = root_.derive("job/" + id.toString()).next();
        ledger::PoolEventPayload fund{"fund", id, jc.reward, {}};
        emit(EntryKind::PoolEvent, jc.sender, fund.encode());
        timeline(id, "funded", jc.reward.toString());

        const auto deadlineEpochs = jc.deadlineEpochs > 0 ? jc.deadlineEpochs : cfg_.jobDeadlineEpochs;
        run.deadline = now_ + cfg_.epochSeconds * static_cast<SimTime>(deadlineEpochs);
        push(run.deadline, DeadlineTimer{ev.job});
        tryAssign(ev.job);
    }

    void handle(RetryTimer& ev) {
        const auto& run = jobs_[ev.job];
        if (run.finished || run.assignment) return;
        tryAssign(ev.job);
    }

    void tryAssign(std::size_t index) {
        const auto& jc = cfg_.jobs[index];
        auto& run = jobs_[index];
        const auto& id = *run.id;

        std::vector<distribution::CapabilityCommitment> offers;
        for (const auto& n : cfg_.nodes) {
            if (n.deedId == jc.sender || !isUp(n.deedId)) continue;
            offers.push_back(distribution::CapabilityCommitment::make(id, n.deedId, n.capability, keys_.at(n.deedId)));
        }
        const auto verified = distribution::verifiedCommitments(
            offers, [this](const DeedId& d) { return ledger_.keyOf(d); });
        const auto ranked = distribution::mapSearch(jc.requirements, verified, cfg_.weights);
        auto assignment = distribution::mapAssign(id, jc.nWorkers, run.spec, ranked, ledger_.height() + 1);
        if (!assignment) {
            timeline(id, "pending",
                     std::to_string(ranked.size()) + " of " + std::to_string(jc.nWorkers) + " workers available");
            if (now_ + cfg_.assignRetrySeconds < run.deadline) push(now_ + cfg_.assignRetrySeconds, RetryTimer{index});
            return;
        }
        emit(EntryKind::JobAssign, jc.sender, assignment->encode());
        commit();

        std::vector<DeedId> workers;
        for (const auto& s : assignment->shards) workers.push_back(s.worker);
        chain_.recordWorkers(id, workers);
        auto& rec = report_.jobs[index];
        rec.workers = workers;
        rec.assignHeight = ledger_.height();
        std::string names;
        for (const auto& w : workers) names += (names.empty() ? "" : ",") + w;
        timeline(id, "assigned", names);

        broker_.subscribe(topicProgress(id), jc.sender);
        broker_.subscribe(topicResult(id), jc.sender);
        const auto bundle = encodeCodeBundle(run.spec);
        for (std::size_t i = 0; i < workers.size(); ++i) {
            run.workers[workers[i]].shard = i;
            broker_.subscribe(topicCode(id, workers[i]), workers[i]);
            publish(Envelope::make(topicCode(id, workers[i]), jc.sender, bundle, keys_.at(jc.sender)));
        }
        run.assignment = std::move(assignment);
    }

    void publish(const Envelope& env) {
        for (auto& d : broker_.publish(env, now_, [this](const DeedId& id) { return ledger_.keyOf(id); })) {
            push(d.at, DeliverEv{std::move(d)});
        }
    }

    const FaultConfig* faultFor(FaultKind kind, std::size_t job, const DeedId& worker,
                                std::optional<std::uint64_t> link = std::nullopt) const {
        for (const auto& f : cfg_.faults) {
            if (f.kind == kind && f.jobIndex == job && f.node == worker && (!link || f.link == *link)) return &f;
        }
        return nullptr;
    }

    void handle(DeliverEv& ev) {
        const auto& d = ev.delivery;
        if (!isUp(d.recipient)) {
            broker_.markDroppedOnArrival();
            return;
        }
        broker_.markDelivered();
        const auto& topic = d.envelope.topic;
        // job/<sender>/<seq>/<kind>[/<worker>]
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (true) {
            const auto slash = topic.find('/', start);
            parts.push_back(topic.substr(start, slash - start));
            if (slash == std::string::npos) break;
            start = slash + 1;
        }
        if (parts.size() < 4 || parts[0] != "job") return;
        const auto id = JobId::parse(parts[1] + "/" + parts[2]);
        if (!id || !jobIndex_.contains(*id)) return;
        const auto index = jobIndex_.at(*id);
        if (jobs_[index].finished) return;
        try {
            if (parts[3] == "code") onCode(index, d);
            else if (parts[3] == "progress") onProgress(index, d);
            else if (parts[3] == "result") onResult(index, d);
        } catch (const DecodeError& e) {
            timeline(*id, "bad-message", d.envelope.sender + ": " + e.what());
        }
    }

    void onCode(std::size_t index, const Delivery& d) {
        auto& run = jobs_[index];
        const auto& id = *run.id;
        const auto& sender = cfg_.jobs[index].sender;
        auto it = run.workers.find(d.recipient);
        if (it == run.workers.end() || it->second.started) return;
        auto& w = it->second;

        Bytes body = d.envelope.body;
        if (faultFor(FaultKind::TamperCode, index, d.recipient)) {
            // Relay-side corruption after the envelope check: flip the last byte
            // of the first plugin's source if there is one, else of the bundle.
            auto codes = decodeCodeBundle(body);
            if (!codes.empty() && !codes.front().source.empty()) {
                codes.front().source.back() ^= 0x01;
                ByteWriter wr;
                wr.u32(static_cast<std::uint32_t>(codes.size()));
                for (const auto& c : codes) wr.bytes(c.encodeWire());
                body = std::move(wr).take();
            } else if (!body.empty()) {
                body.back() ^= 0x01;
            }
        }

        std::vector<std::string> reasons;
        std::vector<pipeline::PluginCode> codes;
        try {
            codes = decodeCodeBundle(body);
        } catch (const DecodeError& e) {
            reasons.push_back(std::string("undecodable code: ") + e.what());
        }
        const auto expected = run.spec.customCode();
        if (reasons.empty() && codes.size() != expected.size()) reasons.push_back("plugin count");
        const auto senderKey = ledger_.keyOf(sender);
        for (std::size_t i = 0; reasons.empty() && i < codes.size(); ++i) {
            auto v = pipeline::hashSignRecheck(codes[i], senderKey.value_or(PublicKey{}), 1);
            if (v.safe() && codes[i].codeHash != expected[i]->codeHash) v = pipeline::Verdict::rejected({"hash differs from spec"});
            if (v.safe()) v = pipeline::safetyCheck(codes[i], cfg_.safety);
            if (!v.safe()) reasons.push_back(v.toString());
            codes[i].verdict = v;
        }
        if (!reasons.empty()) {
            w.aborted = true;
            std::string why;
            for (const auto& r : reasons) why += (why.empty() ? "" : "; ") + r;
            timeline(id, "code-rejected", d.recipient + ": " + why);
            return;
        }
        w.spec = run.spec;
        auto slots = w.spec.customCode();
        for (std::size_t i = 0; i < slots.size(); ++i) *slots[i] = codes[i];
        w.started = true;
        w.head = distribution::genesisCommitment(id, d.recipient);
        timeline(id, "code-accepted", d.recipient);
        push(now_ + cfg_.jobs[index].stepSeconds, StepTimer{index, d.recipient});
    }

    void handle(StepTimer& ev) {
        auto& run = jobs_[ev.job];
        const auto& jc = cfg_.jobs[ev.job];
        auto& w = run.workers.at(ev.worker);
        if (run.finished || w.aborted) return;
        if (!isUp(ev.worker)) {
            push(now_ + jc.stepSeconds, StepTimer{ev.job, ev.worker});
            return;
        }
        const auto& id = *run.id;
        auto outcome = pipeline::executeStep(w.spec, w.shard, w.state, run.seed);
        if (auto* refusal = std::get_if<pipeline::StepRefusal>(&outcome)) {
            w.aborted = true;
            for (const auto& o : refusal->offenders) penalize(o, cfg_.penalties.refusal, "execution refused");
            timeline(id, "execution-refused", ev.worker);
            return;
        }
        auto& step = std::get<pipeline::StepResult>(outcome);
        const std::uint64_t k = w.links.size() + 1;
        const auto link = distribution::makeLink(id, ev.worker, k, w.head, step.nonce);
        w.head = link.commitment;
        w.links.emplace_back(link, step.nonce);
        w.state = std::move(step.state);
        w.payload = std::move(step.payload);
        emit(EntryKind::ProgressProof, ev.worker, link.encode());
        timeline(id, "proof", ev.worker + " #" + std::to_string(k));

        const auto& key = keys_.at(ev.worker);
        if (faultFor(FaultKind::ForgeProof, ev.job, ev.worker, k)) {
            auto forged = link;
            Sha256 h;
            h.update("poai.sim.forged").update(link.commitment);
            forged.commitment = h.finish();
            publish(Envelope::make(topicProgress(id), ev.worker, encodeProgressMsg(forged, step.nonce), key));
        }
        publish(Envelope::make(topicProgress(id), ev.worker, encodeProgressMsg(link, step.nonce), key));
        if (faultFor(FaultKind::ReplayProof, ev.job, ev.worker, k)) {
            const auto& [old, oldNonce] = w.links[k >= 2 ? k - 2 : 0];
            publish(Envelope::make(topicProgress(id), ev.worker, encodeProgressMsg(old, oldNonce), key));
        }

        if (k < jc.shardSteps) {
            push(now_ + jc.stepSeconds, StepTimer{ev.job, ev.worker});
            return;
        }
        if (faultFor(FaultKind::WithholdResult, ev.job, ev.worker)) {
            timeline(id, "result-withheld", ev.worker);
            return;
        }
        ByteWriter wr;
        wr.fixed(sha256(w.payload));
        wr.bytes(w.payload);
        wr.u32(static_cast<std::uint32_t>(w.links.size()));
        for (const auto& [p, n] : w.links) wr.raw(encodeProgressMsg(p, n));
        publish(Envelope::make(topicResult(id), ev.worker, std::move(wr).take(), key));
        timeline(id, "result-sent", ev.worker);
    }

    void submitProgress(const DeedId& worker, const ProgressProof& proof, const Digest& nonce) {
        const auto v = tracker_.submit(proof, nonce);
        report_.progress.push_back({now_, proof.job, worker, proof.linkIndex, v.status});
        if (v.ok()) {
            if (cfg_.node(worker)->powerSource == PowerSource::Measured) {
                activity_.addPower(worker, epochNow(), cfg_.linkCredit);
            }
            return;
        }
        timeline(proof.job, "proof-rejected",
                 worker + " #" + std::to_string(proof.linkIndex) + " " + distribution::progressStatusName(v.status));
        if (!v.penalize) return;
        double delta = cfg_.penalties.broken;
        if (v.status == ProgressStatus::Forged) delta = cfg_.penalties.forged;
        if (v.status == ProgressStatus::Replay) delta = cfg_.penalties.replay;
        penalize(worker, delta,
                 std::string("progress ") + distribution::progressStatusName(v.status) + " link " +
                     std::to_string(proof.linkIndex) + " of " + proof.job.toString());
    }

    bool fromAssignedWorker(const JobRun& run, const Delivery& d, const ProgressProof& p) const {
        return p.job == *run.id && p.worker == d.envelope.sender && run.workers.contains(p.worker);
    }

    void onProgress(std::size_t index, const Delivery& d) {
        const auto& run = jobs_[index];
        ByteReader r(d.envelope.body);
        const auto [proof, nonce] = decodeProgressMsg(r);
        r.expectDone();
        if (!fromAssignedWorker(run, d, proof)) return;
        submitProgress(proof.worker, proof, nonce);
    }

    void onResult(std::size_t index, const Delivery& d) {
        auto& run = jobs_[index];
        const auto& jc = cfg_.jobs[index];
        const auto& id = *run.id;
        const auto& worker = d.envelope.sender;
        if (!run.workers.contains(worker) || run.results.contains(worker)) return;

        ByteReader r(d.envelope.body);
        distribution::ShardResult res{worker, r.fixed<32>(), r.bytes()};
        const auto n = r.u32();
        std::vector<std::pair<ProgressProof, Digest>> links;
        for (std::uint32_t i = 0; i < n; ++i) links.push_back(decodeProgressMsg(r));
        r.expectDone();

        // Links lost in transit are caught up from the result's chain.
        for (const auto& [proof, nonce] : links) {
            if (!fromAssignedWorker(run, d, proof)) continue;
            if (proof.linkIndex <= tracker_.progress(id, worker)) continue;
            submitProgress(worker, proof, nonce);
        }
        if (tracker_.progress(id, worker) < jc.shardSteps) {
            timeline(id, "result-incomplete", worker);
            return;
        }
        run.results[worker] = std::move(res);
        timeline(id, "result-received", worker);
        if (run.results.size() < run.assignment->shards.size()) return;

        std::vector<distribution::ShardResult> all;
        for (const auto& [_, v] : run.results) all.push_back(v);
        const auto g = distribution::reduceGather(*run.assignment, all);
        for (const auto& m : g.mismatched) {
            penalize(m, cfg_.penalties.mismatch, "result digest mismatch on " + id.toString());
            run.results.erase(m);
        }
        if (!g.complete()) return;
        report_.jobs[index].aggregateDigest = g.aggregateDigest;
        timeline(id, "gathered", toHex(g.aggregateDigest));
        ledger::JobStatusPayload p{id, JobStatus::Done, g.aggregateDigest, {}};
        emit(EntryKind::JobStatus, jc.sender, p.encode());
        finishJob(index);
    }

    void finishJob(std::size_t index) {
        auto& run = jobs_[index];
        run.finished = true;
        const auto& id = *run.id;
        const auto& sender = cfg_.jobs[index].sender;
        broker_.unsubscribe(topicProgress(id), sender);
        broker_.unsubscribe(topicResult(id), sender);
        for (const auto& [w, _] : run.workers) broker_.unsubscribe(topicCode(id, w), w);
    }

    void handle(DeadlineTimer& ev) {
        const auto& run = jobs_[ev.job];
        if (run.finished || !run.id) return;
        if (chain_.onchainStatus(*run.id) != JobStatus::InProgress) return;
        const auto& sender = cfg_.jobs[ev.job].sender;
        ledger::JobStatusPayload p{*run.id, JobStatus::Cancelled, {}, "deadline"};
        emit(EntryKind::JobStatus, validatorOf(sender), p.encode());
        timeline(*run.id, "deadline");
        finishJob(ev.job);
    }

    void handle(ReviewTimer& ev) {
        const auto& id = *jobs_[ev.job].id;
        const auto& locks = chain_.pools().lockedFunds;
        const auto lock = std::find_if(locks.begin(), locks.end(), [&](const auto& l) { return l.job == id; });
        if (lock == locks.end()) return;
        const auto amount = lock->amount;
        try {
            chain_.resolveReview(id, std::nullopt, now_, epochNow());
        } catch (const ProtocolError& e) {
            // A pending challenge owns the lock now; its resolution releases it.
            timeline(id, "review-deferred", e.what());
            return;
        }
        ledger::PoolEventPayload p{"review-release", id, amount, "default verdict WORK_VALID"};
        emit(EntryKind::PoolEvent, leadValidator(), p.encode());
        timeline(id, "review-released", amount.toString());
    }

    // ---- challenges

    void handle(ChallengeTimer& ev) {
        const auto& cc = cfg_.challenges[ev.challenge];
        ChallengeRecord rec;
        rec.challengeId = ev.challenge + 1;
        rec.challenger = cc.challenger;
        const auto& run = jobs_.at(cc.jobIndex);
        if (!run.id) {
            rec.refused = "job was never funded";
            report_.challenges.push_back(std::move(rec));
            return;
        }
        rec.job = *run.id;
        if (!isUp(cc.challenger)) {
            rec.refused = "challenger offline";
            report_.challenges.push_back(std::move(rec));
            return;
        }
        const auto bond = cc.bond ? *cc.bond : cfg_.jobs[cc.jobIndex].reward * cfg_.challengeBondFraction.value();
        rec.bond = bond;
        report_.challenges.push_back(std::move(rec));
        ledger::ChallengePayload p{ledger::ChallengeAction::Open, ev.challenge + 1, *run.id, cc.challenger, bond,
                                   seed_, {}};
        emit(EntryKind::Challenge, cc.challenger, p.encode());
    }

    void handle(VoteTimer& ev) {
        const auto id = ev.challenge + 1;
        const auto& c = chain_.challenge(id);
        if (c.verdict != escrow::ChallengeVerdict::Pending) return;
        const bool upheld = cfg_.challenges[ev.challenge].outcome == ChallengeOutcome::Upheld;
        const auto majority = c.juryIds.size() / 2 + 1;
        ledger::ChallengePayload p{ledger::ChallengeAction::Resolve, id, c.job, c.challenger, c.bond, seed_, {}};
        for (std::size_t i = 0; i < c.juryIds.size(); ++i) {
            p.votes.push_back({c.juryIds[i], i < majority ? upheld : !upheld});
        }
        emit(EntryKind::Challenge, leadValidator(), p.encode());
    }

    ChallengeRecord* challengeRecord(std::uint64_t id) {
        for (auto& r : report_.challenges) {
            if (r.challengeId == id) return &r;
        }
        return nullptr;
    }

    // ---- ledger commit and oracle mirror

    void commit() {
        if (pending_.empty()) return;
        auto entries = std::move(pending_);
        pending_.clear();
        const auto& block = ledger_.appendEntries(std::move(entries), now_);
        const auto height = block.height;
        const auto committed = block.entries;
        for (const auto& e : committed) {
            for (const auto& cmd : ledger::oracleMirror(e)) apply(cmd, height);
        }
    }

    void reject(std::uint64_t height, std::string command, const ProtocolError& e) {
        report_.oracleRejections.push_back({now_, height, std::move(command), e.what()});
    }

    void apply(const ledger::PoolCommand& cmd, std::uint64_t height) {
        std::visit([&](const auto& c) { applyOne(c, height); }, cmd);
    }

    void applyOne(const ledger::SettleJobCommand& c, std::uint64_t height) {
        const auto before = chain_.pools();
        try {
            chain_.settleJob(c.job, c.finalStatus, now_, epochNow());
        } catch (const ProtocolError& e) {
            reject(height, "settle " + c.job.toString(), e);
            return;
        }
        const auto& after = chain_.pools();
        report_.settlements.push_back({now_, c.job, c.finalStatus, before.escrowPool, after.escrowPool,
                                       before.rewardPool, after.rewardPool, before.lockedTotal(),
                                       after.lockedTotal()});
        if (c.finalStatus == JobStatus::Done) {
            timeline(c.job, "settled");
            return;
        }
        timeline(c.job, "locked-for-review");
        for (const auto& l : after.lockedFunds) {
            if (l.job == c.job) push(l.unlockTime, ReviewTimer{jobIndex_.at(c.job)});
        }
    }

    void applyOne(const ledger::CreditDeedCommand& c, std::uint64_t height) {
        try {
            chain_.creditReward(c.deedId, c.amount);
        } catch (const ProtocolError& e) {
            reject(height, "credit " + c.deedId, e);
        }
    }

    void applyOne(const ledger::OpenChallengeCommand& c, std::uint64_t height) {
        auto* rec = challengeRecord(c.challengeId);
        std::vector<DeedId> up;
        for (const auto& [id, run] : nodes_) {
            if (run.up) up.push_back(id);
        }
        try {
            const auto& ch = chain_.openChallenge(c.challenger, c.job, c.bond, c.challengeId, c.jurySeed, up, now_,
                                                  epochNow());
            if (rec) rec->jury = ch.juryIds;
        } catch (const ProtocolError& e) {
            reject(height, "open challenge " + std::to_string(c.challengeId), e);
            if (rec) rec->refused = e.what();
            return;
        }
        timeline(c.job, "challenge-opened", std::to_string(c.challengeId));
        push(now_ + cfg_.challengeVoteSeconds, VoteTimer{static_cast<std::size_t>(c.challengeId - 1)});
    }

    void applyOne(const ledger::ResolveChallengeCommand& c, std::uint64_t height) {
        try {
            const auto& ch = chain_.resolveChallenge(c.challengeId, c.votes, now_, epochNow());
            if (auto* rec = challengeRecord(c.challengeId)) {
                rec->verdict = ch.verdict;
                rec->votes = ch.votes;
            }
            timeline(ch.job, "challenge-resolved", escrow::challengeVerdictName(ch.verdict));
        } catch (const ProtocolError& e) {
            reject(height, "resolve challenge " + std::to_string(c.challengeId), e);
        }
    }

    void checkConservation() {
        ++report_.conservationChecks;
        if (report_.conservationViolation) return;
        const auto supply = chain_.totalSupply();
        if (supply != report_.initialSupply) {
            report_.conservationViolation = "event " + std::to_string(report_.eventsProcessed) + " at t=" +
                                            std::to_string(now_) + ": supply " + supply.toString() +
                                            " != " + report_.initialSupply.toString();
        }
    }

    SimReport finish() {
        auto& r = report_;
        r.scenario = cfg_.name;
        r.seed = seed_;
        r.configDigest = cfg_.configDigest;
        r.epochSeconds = cfg_.epochSeconds;
        r.horizonEpochs = cfg_.horizonEpochs;
        r.broker = broker_.audit();
        r.finalSupply = chain_.totalSupply();
        r.finalPools = chain_.pools();
        r.settledTotal = chain_.settledIntoRewardPool();
        r.rejectedBondsTotal = chain_.rejectedBondsIntoRewardPool();
        r.distributedTotal = chain_.distributedTotal();
        r.refundedTotal = chain_.refundedTotal();
        for (const auto& [id, d] : chain_.deeds().all()) r.finalBalances[id] = d.balance;
        for (const auto& [id, a] : activity_.all()) r.aliveSeconds[id] = a.totalAliveSeconds;
        r.transitions = chain_.transitions();
        for (auto& j : r.jobs) {
            if (j.id && chain_.hasJob(*j.id)) j.finalStatus = chain_.job(*j.id).status;
        }
        r.blocks = ledger_.blocks();
        return std::move(report_);
    }

    const ScenarioConfig& cfg_;
    std::uint64_t seed_;
    RngStream root_;
    escrow::PublicChain chain_;
    ledger::Ledger ledger_;
    Broker broker_;
    tokenomics::ActivityBook activity_;
    distribution::ProgressTracker tracker_;
    std::map<DeedId, KeyPair> keys_;
    std::map<DeedId, NodeRun> nodes_;
    std::vector<JobRun> jobs_;
    std::map<JobId, std::size_t> jobIndex_;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::uint64_t seq_ = 0;
    SimTime now_ = 0;
    std::vector<ledger::LedgerEntry> pending_;
    SimReport report_;
};

}  // namespace

SimReport runScenario(const ScenarioConfig& config, std::optional<std::uint64_t> seedOverride) {
    if (config.regions.empty()) throw ProtocolError(Errc::MalformedConfig, "scenario has no regions");
    if (config.epochSeconds <= 0 || config.horizonEpochs == 0) {
        throw ProtocolError(Errc::MalformedConfig, "scenario needs a positive epoch length and horizon");
    }
    Simulator sim(config, seedOverride.value_or(config.seed), seedOverride.has_value());
    return sim.run();
}

}  // namespace poai::simnet
