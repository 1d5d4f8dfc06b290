#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "poai/pipeline/safety.h"

namespace poai::pipeline {

using ParamMap = std::map<std::string, double>;

enum class Stage : std::uint8_t { Source, Serving, Business };
const char* stageName(Stage s);
const std::vector<std::string>& registeredKinds(Stage s);

struct PluginInstance {
    std::string kind;
    ParamMap params;
    std::optional<PluginCode> code;  // only for kind "custom"
};

struct PipelineSpec {
    std::string name;
    PluginInstance dataSource;
    std::vector<PluginInstance> serving;
    std::vector<PluginInstance> business;
    // One map per worker. Empty means every worker runs with no extra params.
    std::vector<ParamMap> perWorkerConfig;

    const ParamMap& workerConfig(std::size_t workerIndex) const;
    // Throws ArityMismatch unless the config list is empty or has nWorkers maps.
    void checkArity(std::size_t nWorkers) const;

    std::vector<PluginCode*> customCode();
    std::vector<const PluginCode*> customCode() const;

    // Canonical bytes: plugin kinds, params, code hashes and authors.
    // Signatures and local verdicts are excluded.
    Bytes encode() const;
    Digest digest() const;
};

// Throws ProtocolError: MalformedConfig (with line), UnknownPluginKind naming
// the kind, or ArityMismatch when nWorkers is given and does not fit.
PipelineSpec parsePipeline(std::string_view yamlText, std::optional<std::size_t> nWorkers = std::nullopt,
                           std::string_view origin = "pipeline");
PipelineSpec loadPipelineFile(const std::string& path, std::optional<std::size_t> nWorkers = std::nullopt);

void signCustomCode(PipelineSpec& spec, const DeedId& author, const KeyPair& key);

// Sets every custom plugin's verdict. Returns true when all are SAFE.
bool vetPipeline(PipelineSpec& spec, const SafetyPolicy& policy);

}  // namespace poai::pipeline
