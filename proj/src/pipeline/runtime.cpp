#include "poai/pipeline/runtime.h"

#include <cmath>
#include <limits>

#include "poai/common/codec.h"
#include "poai/pipeline/expr.h"

namespace poai::pipeline {
namespace {

constexpr std::uint64_t kLcgA = 6364136223846793005ULL;
constexpr std::uint64_t kLcgC = 1442695040888963407ULL;

double param(const ParamMap& m, const char* key, double fallback) {
    const auto it = m.find(key);
    return it == m.end() ? fallback : it->second;
}

ParamMap merged(const ParamMap& base, const ParamMap& worker) {
    ParamMap out = base;
    for (const auto& [k, v] : worker) out[k] = v;
    return out;
}

Bytes encodeParams(const ParamMap& m) {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(m.size()));
    for (const auto& [k, v] : m) {
        w.str(k);
        w.f64(v);
    }
    return std::move(w).take();
}

std::uint64_t lcgSeed(std::uint64_t seed, const ParamMap& worker) {
    ByteWriter w;
    w.str("poai.lcg.v1");
    w.u64(seed);
    w.bytes(encodeParams(worker));
    const auto d = sha256(w.data());
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | d[static_cast<std::size_t>(i)];
    return v;
}

double runCode(const PluginInstance& p, double acc, double x, std::uint64_t step, const ParamMap& params) {
    const auto expr = parseExpr(p.code->source);
    return evaluate(*expr, EvalContext{acc, x, static_cast<double>(step), &params});
}

}  // namespace

StepOutcome executeStep(const PipelineSpec& spec, std::size_t workerIndex, const WorkerState& in,
                        std::uint64_t seed) {
    StepRefusal refusal;
    for (const auto* code : spec.customCode()) {
        if (!code->verdict.safe()) {
            refusal.offenders.push_back(code->author);
            refusal.reasons.push_back("plugin " + toHex(code->codeHash).substr(0, 12) + " is " +
                                      code->verdict.toString());
            continue;
        }
        const auto recheck = hashSignRecheck(*code, code->authorKey, 0);
        if (!recheck.safe()) {
            refusal.offenders.push_back(code->author);
            refusal.reasons.push_back(recheck.toString());
        }
    }
    if (!refusal.offenders.empty()) return refusal;

    const ParamMap& worker = spec.workerConfig(workerIndex);
    StepResult out;
    out.state = in;
    auto& st = out.state;
    st.servingAcc.resize(spec.serving.size(), 0.0);
    st.windows.resize(spec.serving.size());
    st.businessAcc.resize(spec.business.size(), 0.0);
    st.businessSeen.resize(spec.business.size(), false);
    const std::uint64_t k = st.step;

    auto note = [&](Stage stage, std::size_t index, const PluginInstance& p) {
        Contribution c{k, stage, index, p.kind, std::nullopt, Verdict::Kind::Safe};
        if (p.code) {
            c.codeHash = p.code->codeHash;
            c.verdict = p.code->verdict.kind;
        }
        out.contributions.push_back(std::move(c));
    };

    const auto srcParams = merged(spec.dataSource.params, worker);
    double x = 0;
    if (spec.dataSource.kind == "counter") {
        x = param(srcParams, "start", 0) + param(srcParams, "stride", 1) * static_cast<double>(k);
    } else if (spec.dataSource.kind == "lcg") {
        if (k == 0) st.lcg = lcgSeed(seed, worker);
        st.lcg = st.lcg * kLcgA + kLcgC;
        const double modulus = std::max(1.0, std::floor(param(srcParams, "modulus", 1000)));
        x = std::fmod(static_cast<double>(st.lcg >> 11), modulus);
    } else {
        x = param(srcParams, "value", 1);
    }
    note(Stage::Source, 0, spec.dataSource);

    for (std::size_t i = 0; i < spec.serving.size(); ++i) {
        const auto& p = spec.serving[i];
        const auto params = merged(p.params, worker);
        if (p.kind == "running_sum") {
            st.servingAcc[i] += x;
            x = st.servingAcc[i];
        } else if (p.kind == "moving_average") {
            const auto window = static_cast<std::size_t>(std::max(1.0, param(params, "window", 3)));
            auto& w = st.windows[i];
            w.push_back(x);
            while (w.size() > window) w.pop_front();
            double sum = 0;
            for (double v : w) sum += v;
            x = sum / static_cast<double>(w.size());
        } else if (p.kind == "threshold") {
            x = x >= param(params, "threshold", 0.5) ? 1.0 : 0.0;
        } else if (p.kind == "custom") {
            st.servingAcc[i] = runCode(p, st.servingAcc[i], x, k, params);
            x = st.servingAcc[i];
        }
        note(Stage::Serving, i, p);
    }

    ShardPayload payload;
    payload.steps = k + 1;
    for (std::size_t i = 0; i < spec.business.size(); ++i) {
        const auto& p = spec.business[i];
        auto& acc = st.businessAcc[i];
        if (p.kind == "sum") {
            acc += x;
        } else if (p.kind == "max") {
            acc = st.businessSeen[i] ? std::max(acc, x) : x;
        } else if (p.kind == "count") {
            acc += (x != 0) ? 1 : 0;
        } else {
            acc = runCode(p, acc, x, k, merged(p.params, worker));
        }
        st.businessSeen[i] = true;
        payload.results.emplace_back(p.kind, acc);
        note(Stage::Business, i, p);
    }
    st.step = k + 1;
    out.payload = payload.encode();

    ByteWriter n;
    n.str("poai.step.nonce.v1");
    n.u64(seed);
    n.bytes(encodeParams(worker));
    n.u64(k);
    n.bytes(out.payload);
    out.nonce = sha256(n.data());
    return out;
}

Bytes ShardPayload::encode() const {
    ByteWriter w;
    w.u64(steps);
    w.u32(static_cast<std::uint32_t>(results.size()));
    for (const auto& [kind, v] : results) {
        w.str(kind);
        w.f64(v);
    }
    return std::move(w).take();
}

ShardPayload ShardPayload::decode(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    ShardPayload p;
    p.steps = r.u64();
    const auto n = r.u32();
    if (n > r.remaining()) throw DecodeError("shard payload count too large");
    for (std::uint32_t i = 0; i < n; ++i) {
        auto kind = r.str();
        p.results.emplace_back(std::move(kind), r.f64());
    }
    r.expectDone();
    return p;
}

}  // namespace poai::pipeline
