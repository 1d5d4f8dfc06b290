#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <variant>
#include <vector>

#include "poai/pipeline/spec.h"

namespace poai::pipeline {

struct WorkerState {
    std::uint64_t step = 0;
    std::uint64_t lcg = 0;
    std::vector<double> servingAcc;
    std::vector<std::deque<double>> windows;
    std::vector<double> businessAcc;
    std::vector<bool> businessSeen;
};

// One record of which plugin touched a step's output.
struct Contribution {
    std::uint64_t step = 0;
    Stage stage = Stage::Source;
    std::size_t index = 0;
    std::string kind;
    std::optional<Digest> codeHash;
    Verdict::Kind verdict = Verdict::Kind::Safe;  // built-in plugins are SAFE by construction
};

struct StepResult {
    WorkerState state;
    Bytes payload;
    Digest nonce{};
    std::vector<Contribution> contributions;
};

// Execution refused because some plugin code is not SAFE or fails its
// hash/signature recheck. The authors should be penalized.
struct StepRefusal {
    std::vector<DeedId> offenders;
    std::vector<std::string> reasons;
};

using StepOutcome = std::variant<StepResult, StepRefusal>;

// Deterministic in (spec, seed, perWorkerConfig[workerIndex], state).
StepOutcome executeStep(const PipelineSpec& spec, std::size_t workerIndex, const WorkerState& state,
                        std::uint64_t seed);

// The shard payload: business accumulators after `steps` steps.
struct ShardPayload {
    std::uint64_t steps = 0;
    std::vector<std::pair<std::string, double>> results;

    Bytes encode() const;
    static ShardPayload decode(std::span<const std::uint8_t> bytes);
};

}  // namespace poai::pipeline
