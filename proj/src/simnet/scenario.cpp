#include "poai/simnet/scenario.h"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "poai/common/codec.h"
#include "poai/common/error.h"

namespace poai::simnet {
namespace {

std::string readText(const std::filesystem::path& p, const std::string& what) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ProtocolError(Errc::MalformedConfig, "cannot read " + what + " " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Reader {
public:
    explicit Reader(std::string origin) : origin_(std::move(origin)) {}

    [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const {
        const auto line = n.IsDefined() ? n.Mark().line + 1 : 0;
        throw ProtocolError(Errc::MalformedConfig, origin_ + ":" + std::to_string(line) + ": " + msg);
    }

    void onlyKeys(const YAML::Node& map, std::initializer_list<const char*> keys, const std::string& where) const {
        if (!map.IsMap()) fail(map, where + " must be a mapping");
        for (const auto& kv : map) {
            const auto k = kv.first.as<std::string>();
            if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
                fail(kv.first, "unknown field '" + k + "' in " + where);
            }
        }
    }

    template <class T>
    T scalar(const YAML::Node& n, const std::string& what) const {
        if (!n.IsScalar()) fail(n, what + " must be a scalar");
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            fail(n, what + " has the wrong type");
        }
    }

    template <class T>
    T get(const YAML::Node& parent, const char* key, const std::string& where, T fallback) const {
        const auto n = parent[key];
        return n ? scalar<T>(n, where + "." + key) : fallback;
    }

    template <class T>
    T need(const YAML::Node& parent, const char* key, const std::string& where) const {
        const auto n = parent[key];
        if (!n) fail(parent, where + " is missing " + key);
        return scalar<T>(n, where + "." + key);
    }

    std::int64_t nonNegative(const YAML::Node& parent, const char* key, const std::string& where,
                             std::int64_t fallback) const {
        const auto v = get<std::int64_t>(parent, key, where, fallback);
        if (v < 0) fail(parent[key], where + "." + key + " must be >= 0");
        return v;
    }

    std::int64_t positive(const YAML::Node& parent, const char* key, const std::string& where,
                          std::int64_t fallback) const {
        const auto v = get<std::int64_t>(parent, key, where, fallback);
        if (v <= 0) fail(parent[key] ? parent[key] : parent, where + "." + key + " must be > 0");
        return v;
    }

    double probability(const YAML::Node& parent, const char* key, const std::string& where, double fallback) const {
        const auto v = get<double>(parent, key, where, fallback);
        if (!(v >= 0.0 && v <= 1.0)) fail(parent[key], where + "." + key + " must be within [0, 1]");
        return v;
    }

    Token token(const YAML::Node& n, const std::string& what) const {
        const auto text = scalar<std::string>(n, what);
        try {
            return Token::parse(text);
        } catch (const std::exception&) {
            fail(n, what + " is not a token amount: '" + text + "'");
        }
    }

    Capability capability(const YAML::Node& n, const std::string& where) const {
        Capability c;
        if (!n) return c;
        onlyKeys(n, {"cpu", "gpu", "gpuUnits", "memory"}, where);
        c.cpuUnits = nonNegative(n, "cpu", where, 0);
        c.gpu = get<bool>(n, "gpu", where, false);
        c.gpuUnits = nonNegative(n, "gpuUnits", where, 0);
        c.memoryUnits = nonNegative(n, "memory", where, 0);
        return c;
    }

    const std::string& origin() const { return origin_; }

private:
    std::string origin_;
};

const YAML::Node list(const Reader& r, const YAML::Node& root, const char* key) {
    const auto n = root[key];
    if (n && !n.IsSequence()) r.fail(n, std::string(key) + " must be a list");
    return n;
}

}  // namespace

const char* faultKindName(FaultKind k) {
    switch (k) {
        case FaultKind::NodeDown: return "node_down";
        case FaultKind::DropWindow: return "drop_window";
        case FaultKind::ForgeProof: return "forge_proof";
        case FaultKind::ReplayProof: return "replay_proof";
        case FaultKind::WithholdResult: return "withhold_result";
        case FaultKind::TamperCode: return "tamper_code";
    }
    return "?";
}

const NodeConfig* ScenarioConfig::node(const DeedId& id) const {
    for (const auto& n : nodes) {
        if (n.deedId == id) return &n;
    }
    return nullptr;
}

const RegionConfig* ScenarioConfig::region(const std::string& n) const {
    for (const auto& r : regions) {
        if (r.name == n) return &r;
    }
    return nullptr;
}

ScenarioConfig parseScenario(std::string_view text, const std::filesystem::path& baseDir, std::string_view origin) {
    const Reader r{std::string(origin)};
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ProtocolError(Errc::MalformedConfig, r.origin() + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!root.IsMap()) r.fail(root, "scenario must be a mapping");
    r.onlyKeys(root,
               {"name", "seed", "epochSeconds", "horizonEpochs", "genesisTime", "heartbeatSeconds",
                "reviewLockSeconds", "jurySize", "challengeBond", "jobDeadlineEpochs", "assignRetrySeconds",
                "challengeVoteSeconds", "linkCredit", "capabilityPowerScale", "penalties", "capabilityWeights",
                "safetyPolicy", "regions", "nodes", "jobs", "challenges", "faults"},
               "scenario");

    ByteWriter digest;
    digest.str("poai.scenario.v1");
    digest.str(text);

    ScenarioConfig c;
    c.name = r.need<std::string>(root, "name", "scenario");
    c.seed = r.need<std::uint64_t>(root, "seed", "scenario");
    c.epochSeconds = r.positive(root, "epochSeconds", "scenario", c.epochSeconds);
    c.horizonEpochs = static_cast<std::uint64_t>(r.positive(root, "horizonEpochs", "scenario", 1));
    c.genesisTime = r.nonNegative(root, "genesisTime", "scenario", 0);
    c.heartbeatSeconds = r.nonNegative(root, "heartbeatSeconds", "scenario", 0);
    c.reviewLockSeconds = r.nonNegative(root, "reviewLockSeconds", "scenario", c.reviewLockSeconds);
    c.jurySize = static_cast<std::size_t>(r.positive(root, "jurySize", "scenario", 3));
    if (c.jurySize % 2 == 0) r.fail(root["jurySize"], "jurySize must be odd");
    if (const auto b = root["challengeBond"]) {
        c.challengeBondFraction = r.token(b, "challengeBond");
        if (!(c.challengeBondFraction > Token{})) r.fail(b, "challengeBond must be > 0");
    }
    c.jobDeadlineEpochs = static_cast<std::uint64_t>(r.positive(root, "jobDeadlineEpochs", "scenario", 10));
    c.assignRetrySeconds = r.positive(root, "assignRetrySeconds", "scenario", c.assignRetrySeconds);
    c.challengeVoteSeconds = r.positive(root, "challengeVoteSeconds", "scenario", c.challengeVoteSeconds);
    c.linkCredit = r.get<double>(root, "linkCredit", "scenario", c.linkCredit);
    c.capabilityPowerScale = r.get<double>(root, "capabilityPowerScale", "scenario", c.capabilityPowerScale);
    if (const auto p = root["penalties"]) {
        r.onlyKeys(p, {"forged", "replay", "broken", "mismatch", "refusal"}, "penalties");
        for (auto [key, field] : {std::pair{"forged", &PenaltyConfig::forged}, {"replay", &PenaltyConfig::replay},
                                  {"broken", &PenaltyConfig::broken}, {"mismatch", &PenaltyConfig::mismatch},
                                  {"refusal", &PenaltyConfig::refusal}}) {
            const double v = r.get<double>(p, key, "penalties", c.penalties.*field);
            if (!(v >= 0.0)) r.fail(p[key], std::string("penalties.") + key + " must be >= 0");
            c.penalties.*field = v;
        }
    }
    if (const auto w = root["capabilityWeights"]) {
        r.onlyKeys(w, {"cpu", "gpu", "memory"}, "capabilityWeights");
        c.weights.cpu = r.get<double>(w, "cpu", "capabilityWeights", c.weights.cpu);
        c.weights.gpu = r.get<double>(w, "gpu", "capabilityWeights", c.weights.gpu);
        c.weights.memory = r.get<double>(w, "memory", "capabilityWeights", c.weights.memory);
    }
    if (const auto s = root["safetyPolicy"]) {
        const auto rel = r.scalar<std::string>(s, "safetyPolicy");
        std::string policyText;
        try {
            policyText = readText(baseDir / rel, "safety policy");
            c.safety = pipeline::loadSafetyPolicy(policyText);
        } catch (const ProtocolError& e) {
            r.fail(s, e.what());
        }
        digest.str(rel);
        digest.str(policyText);
    } else {
        c.safety = pipeline::defaultSafetyPolicy();
    }

    const auto regions = list(r, root, "regions");
    if (!regions || regions.size() == 0) r.fail(root, "at least one region is required");
    std::set<std::string> validators;
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const auto n = regions[i];
        const auto where = "regions[" + std::to_string(i) + "]";
        r.onlyKeys(n, {"name", "validator", "intraLatency", "interLatency", "dropProbability"}, where);
        RegionConfig reg;
        reg.name = r.need<std::string>(n, "name", where);
        reg.validator = r.need<std::string>(n, "validator", where);
        reg.intraLatency = r.nonNegative(n, "intraLatency", where, reg.intraLatency);
        reg.interLatency = r.nonNegative(n, "interLatency", where, reg.interLatency);
        reg.dropProbability = r.probability(n, "dropProbability", where, 0.0);
        if (c.region(reg.name)) r.fail(n["name"], "duplicate region '" + reg.name + "'");
        if (!validators.insert(reg.validator).second) r.fail(n["validator"], "validator '" + reg.validator + "' already serves a region");
        c.regions.push_back(std::move(reg));
    }

    const auto nodes = list(r, root, "nodes");
    if (!nodes || nodes.size() == 0) r.fail(root, "at least one node is required");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto n = nodes[i];
        const auto where = "nodes[" + std::to_string(i) + "]";
        r.onlyKeys(n, {"deedId", "region", "balance", "capability", "power", "uptime"}, where);
        NodeConfig node;
        node.deedId = r.need<std::string>(n, "deedId", where);
        if (node.deedId.empty()) r.fail(n["deedId"], where + ".deedId must not be empty");
        if (c.node(node.deedId)) r.fail(n["deedId"], "duplicate deedId '" + node.deedId + "'");
        if (validators.contains(node.deedId)) r.fail(n["deedId"], "'" + node.deedId + "' is already a validator id");
        node.region = r.need<std::string>(n, "region", where);
        if (!c.region(node.region)) r.fail(n["region"], "unknown region '" + node.region + "'");
        node.balance = n["balance"] ? r.token(n["balance"], where + ".balance") : Token{};
        if (node.balance.isNegative()) r.fail(n["balance"], where + ".balance must be >= 0");
        node.capability = r.capability(n["capability"], where + ".capability");
        if (const auto p = n["power"]) {
            r.onlyKeys(p, {"source", "series"}, where + ".power");
            const auto src = r.get<std::string>(p, "source", where + ".power", "measured");
            if (src == "measured") node.powerSource = PowerSource::Measured;
            else if (src == "series") node.powerSource = PowerSource::Series;
            else if (src == "capability") node.powerSource = PowerSource::Capability;
            else r.fail(p["source"], "unknown power source '" + src + "'");
            if (const auto s = p["series"]) {
                if (!s.IsSequence()) r.fail(s, where + ".power.series must be a list");
                for (const auto& v : s) node.powerSeries.push_back(r.scalar<double>(v, where + ".power.series"));
            }
            if (node.powerSource == PowerSource::Series && node.powerSeries.empty()) {
                r.fail(p, where + ": series power needs a non-empty series");
            }
        }
        if (const auto u = n["uptime"]) {
            if (!u.IsSequence()) r.fail(u, where + ".uptime must be a list of [from, to] pairs");
            SimTime last = -1;
            for (const auto& w : u) {
                if (!w.IsSequence() || w.size() != 2) r.fail(w, where + ".uptime entries must be [from, to]");
                const Window win{r.scalar<SimTime>(w[0], "uptime"), r.scalar<SimTime>(w[1], "uptime")};
                if (win.from < 0 || win.to <= win.from) r.fail(w, where + ".uptime window must satisfy 0 <= from < to");
                if (win.from <= last) r.fail(w, where + ".uptime windows must be ordered and disjoint");
                last = win.to;
                node.uptime.push_back(win);
            }
        }
        c.nodes.push_back(std::move(node));
    }

    const auto horizonOffset = c.epochSeconds * static_cast<SimTime>(c.horizonEpochs);
    if (const auto jobs = list(r, root, "jobs")) {
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            const auto n = jobs[i];
            const auto where = "jobs[" + std::to_string(i) + "]";
            r.onlyKeys(n, {"at", "sender", "reward", "nWorkers", "pipeline", "shardSteps", "stepSeconds",
                           "requirements", "deadlineEpochs"},
                       where);
            JobConfig job;
            job.at = r.nonNegative(n, "at", where, 0);
            if (job.at > horizonOffset) r.fail(n["at"], where + ".at is past the horizon");
            job.sender = r.need<std::string>(n, "sender", where);
            if (!c.node(job.sender)) r.fail(n["sender"], "unknown sender '" + job.sender + "'");
            if (!n["reward"]) r.fail(n, where + " is missing reward");
            job.reward = r.token(n["reward"], where + ".reward");
            if (!(job.reward > Token{})) r.fail(n["reward"], where + ".reward must be > 0");
            job.nWorkers = static_cast<std::uint32_t>(r.positive(n, "nWorkers", where, 1));
            job.shardSteps = static_cast<std::uint32_t>(r.positive(n, "shardSteps", where, job.shardSteps));
            job.stepSeconds = r.positive(n, "stepSeconds", where, job.stepSeconds);
            job.requirements = r.capability(n["requirements"], where + ".requirements");
            job.deadlineEpochs = static_cast<std::uint64_t>(r.nonNegative(n, "deadlineEpochs", where, 0));
            job.pipelinePath = r.need<std::string>(n, "pipeline", where);
            std::string ptext;
            try {
                ptext = readText(baseDir / job.pipelinePath, "pipeline");
                job.pipeline = pipeline::parsePipeline(ptext, job.nWorkers, job.pipelinePath);
            } catch (const ProtocolError& e) {
                r.fail(n["pipeline"], e.what());
            }
            digest.str(job.pipelinePath);
            digest.str(ptext);
            c.jobs.push_back(std::move(job));
        }
    }

    if (const auto ch = list(r, root, "challenges")) {
        for (std::size_t i = 0; i < ch.size(); ++i) {
            const auto n = ch[i];
            const auto where = "challenges[" + std::to_string(i) + "]";
            r.onlyKeys(n, {"at", "challenger", "job", "outcome", "bond"}, where);
            ChallengeConfig cc;
            cc.at = r.nonNegative(n, "at", where, 0);
            cc.challenger = r.need<std::string>(n, "challenger", where);
            if (!c.node(cc.challenger)) r.fail(n["challenger"], "unknown challenger '" + cc.challenger + "'");
            cc.jobIndex = static_cast<std::size_t>(r.need<std::int64_t>(n, "job", where));
            if (cc.jobIndex >= c.jobs.size()) r.fail(n["job"], where + ".job must index the jobs list");
            const auto outcome = r.need<std::string>(n, "outcome", where);
            if (outcome == "upheld") cc.outcome = ChallengeOutcome::Upheld;
            else if (outcome == "rejected") cc.outcome = ChallengeOutcome::Rejected;
            else r.fail(n["outcome"], "outcome must be upheld or rejected");
            if (n["bond"]) {
                cc.bond = r.token(n["bond"], where + ".bond");
                if (!(*cc.bond > Token{})) r.fail(n["bond"], where + ".bond must be > 0");
            }
            c.challenges.push_back(std::move(cc));
        }
    }

    if (const auto faults = list(r, root, "faults")) {
        for (std::size_t i = 0; i < faults.size(); ++i) {
            const auto n = faults[i];
            const auto where = "faults[" + std::to_string(i) + "]";
            r.onlyKeys(n, {"kind", "node", "region", "job", "link", "from", "to", "probability"}, where);
            FaultConfig f;
            const auto kind = r.need<std::string>(n, "kind", where);
            bool known = false;
            for (auto k : {FaultKind::NodeDown, FaultKind::DropWindow, FaultKind::ForgeProof, FaultKind::ReplayProof,
                           FaultKind::WithholdResult, FaultKind::TamperCode}) {
                if (kind == faultKindName(k)) {
                    f.kind = k;
                    known = true;
                }
            }
            if (!known) r.fail(n["kind"], "unknown fault kind '" + kind + "'");
            if (f.kind == FaultKind::DropWindow) {
                f.region = r.need<std::string>(n, "region", where);
                if (!c.region(f.region)) r.fail(n["region"], "unknown region '" + f.region + "'");
                f.probability = r.probability(n, "probability", where, 1.0);
            } else {
                f.node = r.need<std::string>(n, "node", where);
                if (!c.node(f.node)) r.fail(n["node"], "unknown node '" + f.node + "'");
            }
            if (f.kind == FaultKind::NodeDown || f.kind == FaultKind::DropWindow) {
                f.from = r.nonNegative(n, "from", where, 0);
                f.to = r.need<SimTime>(n, "to", where);
                if (f.to <= f.from) r.fail(n["to"], where + ": to must be after from");
            } else {
                f.jobIndex = static_cast<std::size_t>(r.need<std::int64_t>(n, "job", where));
                if (f.jobIndex >= c.jobs.size()) r.fail(n["job"], where + ".job must index the jobs list");
                f.link = static_cast<std::uint64_t>(r.positive(n, "link", where, 1));
            }
            c.faults.push_back(std::move(f));
        }
    }
    c.configDigest = sha256(digest.data());
    return c;
}

ScenarioConfig loadScenario(const std::filesystem::path& path) {
    const auto text = readText(path, "scenario");
    return parseScenario(text, path.parent_path(), path.string());
}

}  // namespace poai::simnet
