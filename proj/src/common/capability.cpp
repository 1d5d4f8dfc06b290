#include "poai/common/capability.h"

namespace poai {

void Capability::encode(ByteWriter& w) const {
    w.i64(cpuUnits);
    w.boolean(gpu);
    w.i64(gpuUnits);
    w.i64(memoryUnits);
}

Capability Capability::decode(ByteReader& r) {
    Capability c;
    c.cpuUnits = r.i64();
    c.gpu = r.boolean();
    c.gpuUnits = r.i64();
    c.memoryUnits = r.i64();
    return c;
}

double capabilityScore(const Capability& cap, const CapabilityWeights& weights) {
    const double gpu = cap.gpu ? weights.gpu * static_cast<double>(cap.gpuUnits) : 0.0;
    return weights.cpu * static_cast<double>(cap.cpuUnits) + gpu +
           weights.memory * static_cast<double>(cap.memoryUnits);
}

bool dominates(const Capability& offered, const Capability& required) {
    if (offered.cpuUnits < required.cpuUnits) return false;
    if (offered.memoryUnits < required.memoryUnits) return false;
    if (required.gpu && (!offered.gpu || offered.gpuUnits < required.gpuUnits)) return false;
    return true;
}

}  // namespace poai
