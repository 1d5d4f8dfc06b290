#pragma once

#include <cstdint>

#include "poai/common/codec.h"

namespace poai {

struct Capability {
    std::int64_t cpuUnits = 0;
    bool gpu = false;
    std::int64_t gpuUnits = 0;
    std::int64_t memoryUnits = 0;

    void encode(ByteWriter& w) const;
    static Capability decode(ByteReader& r);
    friend bool operator==(const Capability&, const Capability&) = default;
};

struct CapabilityWeights {
    double cpu = 1.0;
    double gpu = 4.0;
    double memory = 0.25;
};

// cpu + gpuWeight * gpuFlag * gpuUnits + memoryWeight * memoryUnits
double capabilityScore(const Capability& cap, const CapabilityWeights& weights = {});

// Component-wise: cpu, memory and (when required) GPU units all at least the requirement.
bool dominates(const Capability& offered, const Capability& required);

}  // namespace poai
