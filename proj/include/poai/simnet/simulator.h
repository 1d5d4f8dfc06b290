#pragma once

#include <optional>

#include "poai/simnet/report.h"
#include "poai/simnet/scenario.h"

namespace poai::simnet {

// Runs the scenario to its horizon. Pure in (config, seed): no wall clock,
// no I/O, every random draw from labelled substreams of the seed.
SimReport runScenario(const ScenarioConfig& config, std::optional<std::uint64_t> seedOverride = std::nullopt);

// Deterministic key for a node or validator id.
KeyPair simKey(const DeedId& id);

}  // namespace poai::simnet
