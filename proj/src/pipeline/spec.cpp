#include "poai/pipeline/spec.h"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "poai/common/codec.h"
#include "poai/common/error.h"

namespace poai::pipeline {
namespace {

struct Ctx {
    std::string origin;

    [[noreturn]] void fail(const YAML::Node& n, const std::string& msg, Errc code = Errc::MalformedConfig) const {
        throw ProtocolError(code, origin + ":" + std::to_string(n.Mark().line + 1) + ": " + msg);
    }

    ParamMap params(const YAML::Node& n, const std::string& where) const {
        ParamMap out;
        if (!n) return out;
        if (!n.IsMap()) fail(n, where + " must be a mapping of names to numbers");
        for (const auto& kv : n) {
            const auto key = kv.first.as<std::string>();
            try {
                out[key] = kv.second.as<double>();
            } catch (const YAML::Exception&) {
                fail(kv.second, where + "." + key + " must be a number");
            }
        }
        return out;
    }

    PluginInstance plugin(const YAML::Node& n, Stage stage, const std::string& where) const {
        if (!n.IsMap()) fail(n, where + " must be a mapping with a kind");
        const auto kindNode = n["kind"];
        if (!kindNode || !kindNode.IsScalar()) fail(n, where + " is missing kind");
        PluginInstance p;
        p.kind = kindNode.as<std::string>();
        const auto& kinds = registeredKinds(stage);
        if (std::find(kinds.begin(), kinds.end(), p.kind) == kinds.end()) {
            fail(kindNode, "unknown plugin kind '" + p.kind + "' for " + stageName(stage), Errc::UnknownPluginKind);
        }
        for (const auto& kv : n) {
            const auto key = kv.first.as<std::string>();
            if (key != "kind" && key != "params" && key != "code") fail(kv.first, "unknown field '" + key + "' in " + where);
        }
        p.params = params(n["params"], where + ".params");
        const auto code = n["code"];
        if (p.kind == "custom") {
            if (!code || !code.IsScalar()) fail(n, where + ": custom plugin needs code");
            p.code = PluginCode::fromSource(code.as<std::string>());
        } else if (code) {
            fail(code, where + ": only custom plugins carry code");
        }
        return p;
    }
};

void encodeParams(ByteWriter& w, const ParamMap& m) {
    w.u32(static_cast<std::uint32_t>(m.size()));
    for (const auto& [k, v] : m) {
        w.str(k);
        w.f64(v);
    }
}

void encodePlugin(ByteWriter& w, const PluginInstance& p) {
    w.str(p.kind);
    encodeParams(w, p.params);
    w.boolean(p.code.has_value());
    if (p.code) {
        w.fixed(p.code->codeHash);
        w.str(p.code->author);
    }
}

}  // namespace

const char* stageName(Stage s) {
    switch (s) {
        case Stage::Source: return "dataSource";
        case Stage::Serving: return "serving";
        case Stage::Business: return "business";
    }
    return "?";
}

const std::vector<std::string>& registeredKinds(Stage s) {
    static const std::vector<std::string> sources{"counter", "lcg", "constant"};
    static const std::vector<std::string> serving{"identity", "running_sum", "moving_average", "threshold", "custom"};
    static const std::vector<std::string> business{"sum", "max", "count", "custom"};
    switch (s) {
        case Stage::Source: return sources;
        case Stage::Serving: return serving;
        case Stage::Business: break;
    }
    return business;
}

const ParamMap& PipelineSpec::workerConfig(std::size_t i) const {
    static const ParamMap empty;
    return i < perWorkerConfig.size() ? perWorkerConfig[i] : empty;
}

void PipelineSpec::checkArity(std::size_t nWorkers) const {
    if (!perWorkerConfig.empty() && perWorkerConfig.size() != nWorkers) {
        throw ProtocolError(Errc::ArityMismatch, "pipeline '" + name + "' has " +
                                                     std::to_string(perWorkerConfig.size()) +
                                                     " perWorkerConfig entries for " + std::to_string(nWorkers) +
                                                     " workers");
    }
}

std::vector<PluginCode*> PipelineSpec::customCode() {
    std::vector<PluginCode*> out;
    auto add = [&](PluginInstance& p) { if (p.code) out.push_back(&*p.code); };
    add(dataSource);
    for (auto& p : serving) add(p);
    for (auto& p : business) add(p);
    return out;
}

std::vector<const PluginCode*> PipelineSpec::customCode() const {
    std::vector<const PluginCode*> out;
    for (auto* c : const_cast<PipelineSpec*>(this)->customCode()) out.push_back(c);
    return out;
}

Bytes PipelineSpec::encode() const {
    ByteWriter w;
    w.str("poai.pipeline.v1");
    w.str(name);
    encodePlugin(w, dataSource);
    w.u32(static_cast<std::uint32_t>(serving.size()));
    for (const auto& p : serving) encodePlugin(w, p);
    w.u32(static_cast<std::uint32_t>(business.size()));
    for (const auto& p : business) encodePlugin(w, p);
    w.u32(static_cast<std::uint32_t>(perWorkerConfig.size()));
    for (const auto& m : perWorkerConfig) encodeParams(w, m);
    return std::move(w).take();
}

Digest PipelineSpec::digest() const { return sha256(encode()); }

PipelineSpec parsePipeline(std::string_view text, std::optional<std::size_t> nWorkers, std::string_view origin) {
    const Ctx ctx{std::string(origin)};
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ProtocolError(Errc::MalformedConfig, ctx.origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!root.IsMap()) ctx.fail(root, "pipeline must be a mapping");
    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        if (key != "name" && key != "dataSource" && key != "serving" && key != "business" &&
            key != "perWorkerConfig") {
            ctx.fail(kv.first, "unknown field '" + key + "'");
        }
    }
    PipelineSpec spec;
    if (!root["name"] || !root["name"].IsScalar()) ctx.fail(root, "missing name");
    spec.name = root["name"].as<std::string>();
    if (!root["dataSource"]) ctx.fail(root, "missing dataSource");
    spec.dataSource = ctx.plugin(root["dataSource"], Stage::Source, "dataSource");
    if (spec.dataSource.kind == "custom") ctx.fail(root["dataSource"], "dataSource cannot be custom");

    if (const auto s = root["serving"]) {
        if (!s.IsSequence()) ctx.fail(s, "serving must be a list");
        for (std::size_t i = 0; i < s.size(); ++i) {
            spec.serving.push_back(ctx.plugin(s[i], Stage::Serving, "serving[" + std::to_string(i) + "]"));
        }
    }
    const auto b = root["business"];
    if (!b || !b.IsSequence() || b.size() == 0) ctx.fail(b ? b : root, "business must be a non-empty list");
    for (std::size_t i = 0; i < b.size(); ++i) {
        spec.business.push_back(ctx.plugin(b[i], Stage::Business, "business[" + std::to_string(i) + "]"));
    }
    if (const auto w = root["perWorkerConfig"]) {
        if (!w.IsSequence()) ctx.fail(w, "perWorkerConfig must be a list");
        for (std::size_t i = 0; i < w.size(); ++i) {
            spec.perWorkerConfig.push_back(ctx.params(w[i], "perWorkerConfig[" + std::to_string(i) + "]"));
        }
    }
    if (nWorkers) spec.checkArity(*nWorkers);
    return spec;
}

PipelineSpec loadPipelineFile(const std::string& path, std::optional<std::size_t> nWorkers) {
    std::ifstream in(path);
    if (!in) throw ProtocolError(Errc::MalformedConfig, "cannot read pipeline " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parsePipeline(ss.str(), nWorkers, path);
}

void signCustomCode(PipelineSpec& spec, const DeedId& author, const KeyPair& key) {
    for (auto* c : spec.customCode()) c->sign(author, key);
}

bool vetPipeline(PipelineSpec& spec, const SafetyPolicy& policy) {
    bool allSafe = true;
    for (auto* c : spec.customCode()) {
        c->verdict = safetyCheck(*c, policy);
        allSafe = allSafe && c->verdict.safe();
    }
    return allSafe;
}

}  // namespace poai::pipeline
