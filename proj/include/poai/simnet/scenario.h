#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "poai/common/capability.h"
#include "poai/common/crypto.h"
#include "poai/common/token.h"
#include "poai/common/types.h"
#include "poai/pipeline/safety.h"
#include "poai/pipeline/spec.h"

namespace poai::simnet {

struct RegionConfig {
    std::string name;
    DeedId validator;
    Seconds intraLatency = 1;
    Seconds interLatency = 5;
    double dropProbability = 0.0;
};

// Where a node's per-epoch power score comes from before penalties.
//   measured:   0 at epoch open, +linkCredit per accepted progress link
//   series:     powerSeries[epoch - 1], last value repeating
//   capability: capabilityPowerScale * capability score
enum class PowerSource : std::uint8_t { Measured, Series, Capability };

struct Window {
    SimTime from = 0;
    SimTime to = 0;  // exclusive
};

struct NodeConfig {
    DeedId deedId;
    std::string region;
    Token balance;
    Capability capability;
    PowerSource powerSource = PowerSource::Measured;
    std::vector<double> powerSeries;
    std::vector<Window> uptime;  // offsets from genesis; empty = always up
};

struct JobConfig {
    SimTime at = 0;  // offset from genesis
    DeedId sender;
    Token reward;
    std::uint32_t nWorkers = 1;
    std::string pipelinePath;
    pipeline::PipelineSpec pipeline;
    std::uint32_t shardSteps = 5;
    Seconds stepSeconds = 60;
    Capability requirements;
    std::uint64_t deadlineEpochs = 0;  // 0 = scenario default
};

enum class ChallengeOutcome : std::uint8_t { Upheld, Rejected };

struct ChallengeConfig {
    SimTime at = 0;
    DeedId challenger;
    std::size_t jobIndex = 0;
    ChallengeOutcome outcome = ChallengeOutcome::Upheld;
    std::optional<Token> bond;  // default: challengeBondFraction * reward
};

enum class FaultKind : std::uint8_t { NodeDown, DropWindow, ForgeProof, ReplayProof, WithholdResult, TamperCode };
const char* faultKindName(FaultKind k);

struct FaultConfig {
    FaultKind kind = FaultKind::NodeDown;
    DeedId node;             // node_down, forge/replay/withhold/tamper: the worker
    std::string region;      // drop_window
    std::size_t jobIndex = 0;
    std::uint64_t link = 1;  // forge/replay: the link index the injection accompanies
    SimTime from = 0;
    SimTime to = 0;
    double probability = 1.0;
};

struct PenaltyConfig {
    double forged = 1.0;
    double replay = 1.0;
    double broken = 1.0;
    double mismatch = 1.0;
    double refusal = 2.0;
};

struct ScenarioConfig {
    std::string name;
    std::uint64_t seed = 0;
    Seconds epochSeconds = 3600;
    std::uint64_t horizonEpochs = 1;
    SimTime genesisTime = 0;
    Seconds heartbeatSeconds = 0;  // 0 = epochSeconds / 100
    Seconds reviewLockSeconds = 86400;
    std::size_t jurySize = 3;
    Token challengeBondFraction = Token::parse("0.1");
    std::uint64_t jobDeadlineEpochs = 10;
    Seconds assignRetrySeconds = 300;
    Seconds challengeVoteSeconds = 600;
    double linkCredit = 0.05;
    double capabilityPowerScale = 0.1;
    PenaltyConfig penalties;
    CapabilityWeights weights;
    pipeline::SafetyPolicy safety;

    std::vector<RegionConfig> regions;
    std::vector<NodeConfig> nodes;
    std::vector<JobConfig> jobs;
    std::vector<ChallengeConfig> challenges;
    std::vector<FaultConfig> faults;

    // Hash over the scenario text and every file it pulls in. The seed is
    // part of the text, but an override is not.
    Digest configDigest{};

    Seconds heartbeatPeriod() const { return heartbeatSeconds > 0 ? heartbeatSeconds : std::max<Seconds>(1, epochSeconds / 100); }
    SimTime horizon() const { return genesisTime + epochSeconds * static_cast<SimTime>(horizonEpochs); }
    const NodeConfig* node(const DeedId& id) const;
    const RegionConfig* region(const std::string& name) const;
};

// Throws ProtocolError(MalformedConfig) as "<origin>:<line>: message".
// Relative file references resolve against baseDir.
ScenarioConfig parseScenario(std::string_view yamlText, const std::filesystem::path& baseDir,
                             std::string_view origin = "scenario");
ScenarioConfig loadScenario(const std::filesystem::path& path);

}  // namespace poai::simnet
