#include <gtest/gtest.h>
#include <yaml-cpp/yaml.h>

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "poai/common/codec.h"
#include "poai/common/error.h"
#include "poai/common/rng.h"
#include "poai/pipeline/expr.h"
#include "poai/pipeline/runtime.h"
#include "poai/pipeline/safety.h"
#include "poai/pipeline/spec.h"

using namespace poai;
using namespace poai::pipeline;

namespace {

const std::string kRepo = std::string(POAI_TEST_DATA) + "/../..";

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const KeyPair& author() {
    static const KeyPair k = KeyPair::fromSeed(sha256("pipeline-author"));
    return k;
}

PipelineSpec ready(std::string_view yaml) {
    auto spec = parsePipeline(yaml);
    signCustomCode(spec, "author", author());
    EXPECT_TRUE(vetPipeline(spec, defaultSafetyPolicy()));
    return spec;
}

std::vector<StepResult> runSteps(const PipelineSpec& spec, std::size_t worker, std::size_t n, std::uint64_t seed) {
    std::vector<StepResult> out;
    WorkerState st;
    for (std::size_t i = 0; i < n; ++i) {
        auto r = executeStep(spec, worker, st, seed);
        EXPECT_TRUE(std::holds_alternative<StepResult>(r));
        out.push_back(std::get<StepResult>(std::move(r)));
        st = out.back().state;
    }
    return out;
}

Errc errcOf(const std::function<void()>& fn, std::string* msg = nullptr) {
    try {
        fn();
    } catch (const ProtocolError& e) {
        if (msg) *msg = e.what();
        return e.code();
    }
    ADD_FAILURE() << "expected ProtocolError";
    return Errc::InvalidArgument;
}

double eval(std::string_view src, double acc = 0, double x = 0, double step = 0, const ParamMap* p = nullptr) {
    return evaluate(*parseExpr(src), EvalContext{acc, x, step, p});
}

}  // namespace

TEST(Expr, Arithmetic) {
    EXPECT_DOUBLE_EQ(eval("1 + 2 * 3"), 7);
    EXPECT_DOUBLE_EQ(eval("(1 + 2) * 3"), 9);
    EXPECT_DOUBLE_EQ(eval("10 - 4 - 3"), 3);
    EXPECT_DOUBLE_EQ(eval("-x + acc", 5, 2), 3);
    EXPECT_DOUBLE_EQ(eval("7 % 4"), 3);
    EXPECT_DOUBLE_EQ(eval("1 / 0"), 0);
    EXPECT_DOUBLE_EQ(eval("1.5e3"), 1500);
}

TEST(Expr, LogicAndFunctions) {
    EXPECT_DOUBLE_EQ(eval("x > 2 ? 10 : 20", 0, 3), 10);
    EXPECT_DOUBLE_EQ(eval("x > 2 ? 10 : 20", 0, 1), 20);
    EXPECT_DOUBLE_EQ(eval("1 < 2 && 2 < 1"), 0);
    EXPECT_DOUBLE_EQ(eval("1 < 2 || 2 < 1"), 1);
    EXPECT_DOUBLE_EQ(eval("!0"), 1);
    EXPECT_DOUBLE_EQ(eval("min(3, max(1, 2))"), 2);
    EXPECT_DOUBLE_EQ(eval("abs(-4) + floor(2.7)"), 6);
    EXPECT_DOUBLE_EQ(eval("step * 2", 0, 0, 4), 8);
}

TEST(Expr, Params) {
    const ParamMap p{{"scale", 2.5}};
    EXPECT_DOUBLE_EQ(eval("params.scale * x", 0, 4, 0, &p), 10);
    EXPECT_DOUBLE_EQ(eval("params.missing", 0, 0, 0, &p), 0);
}

TEST(Expr, ParseErrors) {
    for (const char* bad : {"", "1 +", "(1", "foo", "system(1)", "min(1)", "x ? 1", "params", "1 2"}) {
        EXPECT_EQ(errcOf([&] { parseExpr(bad); }), Errc::InvalidArgument) << bad;
    }
    std::string deep(500, '(');
    deep += "1" + std::string(500, ')');
    EXPECT_EQ(errcOf([&] { parseExpr(deep); }), Errc::InvalidArgument);
}

TEST(Parse, MinimalPipeline) {
    const auto spec = parsePipeline(slurp(kRepo + "/pipelines/minimal.yaml"));
    EXPECT_EQ(spec.name, "minimal");
    EXPECT_EQ(spec.dataSource.kind, "counter");
    ASSERT_EQ(spec.serving.size(), 1u);
    EXPECT_EQ(spec.serving[0].kind, "identity");
    ASSERT_EQ(spec.business.size(), 1u);
    EXPECT_EQ(spec.business[0].kind, "sum");
}

TEST(Parse, UnknownKindIsNamed) {
    std::string msg;
    const auto code = errcOf([&] {
        parsePipeline("name: p\ndataSource: {kind: counter}\nserving:\n  - kind: FOO\nbusiness: [{kind: sum}]\n");
    }, &msg);
    EXPECT_EQ(code, Errc::UnknownPluginKind);
    EXPECT_NE(msg.find("FOO"), std::string::npos);
    EXPECT_NE(msg.find(":4:"), std::string::npos) << msg;
}

TEST(Parse, WorkerArity) {
    const std::string text =
        "name: p\ndataSource: {kind: counter}\nbusiness: [{kind: sum}]\nperWorkerConfig:\n  - {a: 1}\n  - {a: 2}\n";
    EXPECT_EQ(errcOf([&] { parsePipeline(text, 3); }), Errc::ArityMismatch);
    EXPECT_NO_THROW(parsePipeline(text, 2));
    EXPECT_NO_THROW(parsePipeline("name: p\ndataSource: {kind: counter}\nbusiness: [{kind: sum}]\n", 3));
}

TEST(Parse, MalformedConfigsCarryLines) {
    const std::vector<std::pair<std::string, std::string>> cases{
        {"name: p\ndataSource: {kind: counter}\n", ":1:"},
        {"name: p\ndataSource: {kind: counter, params: {start: abc}}\nbusiness: [{kind: sum}]\n", ":2:"},
        {"name: p\ndataSource: {kind: counter}\nbusiness:\n  - kind: custom\n", ":4:"},
        {"name: p\ndataSource: {kind: counter}\nbusiness: [{kind: sum, code: 'x'}]\n", ":3:"},
        {"name: p\ndataSource: {kind: counter}\nbusiness: [{kind: sum}]\nextra: 1\n", ":4:"},
        {"name: [unclosed\n", ":"},
    };
    for (const auto& [text, where] : cases) {
        std::string msg;
        EXPECT_EQ(errcOf([&] { parsePipeline(text); }, &msg), Errc::MalformedConfig) << text;
        EXPECT_NE(msg.find(where), std::string::npos) << msg;
    }
}

TEST(Parse, DigestCoversCodeButNotSignature) {
    auto a = parsePipeline(slurp(kRepo + "/pipelines/annex_three_workers.yaml"));
    auto b = a;
    const auto unsigned_ = a.digest();
    signCustomCode(a, "author", author());
    signCustomCode(b, "author", KeyPair::fromSeed(sha256("other")));
    EXPECT_EQ(a.digest(), b.digest());
    EXPECT_NE(a.digest(), unsigned_);  // the author is part of the spec
    b.serving[1].code = PluginCode::fromSource("x");
    EXPECT_NE(a.digest(), b.digest());
}

TEST(Safety, DefaultPolicyMatchesShippedFile) {
    EXPECT_EQ(slurp(kRepo + "/config/safety_policy.yaml"), std::string(defaultSafetyPolicyText()));
    const auto& p = defaultSafetyPolicy();
    EXPECT_EQ(p.deny.size(), 5u);
    EXPECT_EQ(p.maxBytes, 256u);
}

TEST(Safety, PureArithmeticIsSafe) {
    EXPECT_TRUE(safetyCheck("acc + x * 2", defaultSafetyPolicy()).safe());
}

TEST(Safety, ProcessSpawnRejected) {
    const auto v = safetyCheck("system(1)", defaultSafetyPolicy());
    EXPECT_EQ(v.kind, Verdict::Kind::Rejected);
    EXPECT_EQ(v.reasons, (std::vector<std::string>{"process spawn"}));
    EXPECT_EQ(v.toString(), "REJECTED(process spawn)");
}

TEST(Safety, SizeCapBoundary) {
    const auto& p = defaultSafetyPolicy();
    std::string atCap = "x + 1";
    atCap.resize(p.maxBytes, ' ');
    EXPECT_TRUE(safetyCheck(atCap, p).safe());
    const auto over = safetyCheck(atCap + " ", p);
    EXPECT_EQ(over.reasons, (std::vector<std::string>{"size"}));
}

TEST(Safety, TokenAndDepthCaps) {
    const auto& p = defaultSafetyPolicy();
    std::string many = "x";
    while (lex(many).size() <= p.maxTokens) many += "+1";
    EXPECT_NE(std::find(safetyCheck(many, p).reasons.begin(), safetyCheck(many, p).reasons.end(), "token count"),
              safetyCheck(many, p).reasons.end());
    std::string deep = std::string(p.maxDepth + 1, '(') + "x" + std::string(p.maxDepth + 1, ')');
    const auto v = safetyCheck(deep, p);
    EXPECT_NE(std::find(v.reasons.begin(), v.reasons.end(), "depth"), v.reasons.end());
}

TEST(Safety, AllReasonsReported) {
    const auto v = safetyCheck("eval(system(socket(1)))", defaultSafetyPolicy());
    EXPECT_EQ(v.reasons, (std::vector<std::string>{"process spawn", "network", "reflection"}));
}

TEST(Safety, UnknownIdentifiersAndStrings) {
    const auto& p = defaultSafetyPolicy();
    EXPECT_FALSE(safetyCheck("frobnicate(x)", p).safe());
    EXPECT_FALSE(safetyCheck("x + 'a'", p).safe());
    EXPECT_FALSE(safetyCheck("x; x", p).safe());
    EXPECT_FALSE(safetyCheck("x +", p).safe());
}

TEST(Safety, CorpusClassifiedWithoutFalseNegatives) {
    const auto corpus = YAML::LoadFile(std::string(POAI_TEST_DATA) + "/safety_corpus.yaml");
    ASSERT_EQ(corpus.size(), 30u);
    std::size_t safe = 0;
    std::size_t bad = 0;
    for (const auto& item : corpus) {
        const auto expect = item["expect"].as<std::string>();
        const auto src = item["source"].as<std::string>();
        const auto v = safetyCheck(src, defaultSafetyPolicy());
        if (expect == "safe") {
            ++safe;
            EXPECT_TRUE(v.safe()) << src << " -> " << v.toString();
        } else {
            ++bad;
            EXPECT_NE(std::find(v.reasons.begin(), v.reasons.end(), expect), v.reasons.end())
                << src << " -> " << v.toString();
        }
    }
    EXPECT_EQ(safe, 15u);
    EXPECT_EQ(bad, 15u);
}

TEST(Safety, PolicyIsData) {
    const auto p = loadSafetyPolicy(
        "maxBytes: 10\nallow: {identifiers: [x]}\ndeny:\n  - {class: arith, label: no-minus, tokens: [neg]}\n");
    EXPECT_TRUE(safetyCheck("x", p).safe());
    EXPECT_EQ(safetyCheck("neg", p).reasons, (std::vector<std::string>{"no-minus"}));
    EXPECT_FALSE(safetyCheck("acc", p).safe());
    EXPECT_EQ(errcOf([] { loadSafetyPolicy("maxBytes: -1\n"); }), Errc::MalformedConfig);
    EXPECT_EQ(errcOf([] { loadSafetyPolicy("deny: 3\n"); }), Errc::MalformedConfig);
}

TEST(Recheck, UntamperedPassesAtEveryHop) {
    auto code = PluginCode::fromSource("acc + x");
    code.sign("author", author());
    for (std::uint32_t hop = 1; hop <= 3; ++hop) {
        const auto received = PluginCode::decodeWire(code.encodeWire());
        EXPECT_TRUE(hashSignRecheck(received, author().publicKey(), hop).safe());
    }
}

TEST(Recheck, TamperAndMissingSignature) {
    auto code = PluginCode::fromSource("acc + x");
    code.sign("author", author());
    auto tampered = code;
    tampered.source[0] = 'b';
    EXPECT_EQ(hashSignRecheck(tampered, author().publicKey(), 2).kind, Verdict::Kind::Rejected);
    auto stripped = code;
    stripped.signature.reset();
    EXPECT_EQ(hashSignRecheck(stripped, author().publicKey(), 2).kind, Verdict::Kind::Rejected);
    auto rekeyed = code;
    rekeyed.sign("author", KeyPair::fromSeed(sha256("mallory")));
    EXPECT_EQ(hashSignRecheck(rekeyed, author().publicKey(), 2).kind, Verdict::Kind::Rejected);
}

// Any single byte flip of the wire form is either undecodable or rejected.
TEST(Recheck, RandomByteFlipsAlwaysRejected) {
    auto code = PluginCode::fromSource("max(acc, x * params.scale)");
    code.sign("author", author());
    const auto wire = code.encodeWire();
    RngStream rng(2024, "flip");
    for (int trial = 0; trial < 100; ++trial) {
        auto copy = wire;
        const auto pos = rng.below(copy.size());
        copy[pos] ^= static_cast<std::uint8_t>(1 + rng.below(255));
        bool rejected = false;
        try {
            rejected = !hashSignRecheck(PluginCode::decodeWire(copy), author().publicKey(), 1).safe();
        } catch (const DecodeError&) {
            rejected = true;
        }
        EXPECT_TRUE(rejected) << "flip at " << pos;
    }
}

TEST(Runtime, CounterIdentitySumOverFiveSteps) {
    const auto spec = ready(slurp(kRepo + "/pipelines/minimal.yaml"));
    const auto steps = runSteps(spec, 0, 5, 1);
    const auto p = ShardPayload::decode(steps.back().payload);
    EXPECT_EQ(p.steps, 5u);
    ASSERT_EQ(p.results.size(), 1u);
    EXPECT_DOUBLE_EQ(p.results[0].second, 10.0);
}

TEST(Runtime, IdenticalWorkerConfigsGiveIdenticalPayloads) {
    auto spec = ready(
        "name: twin\ndataSource: {kind: lcg}\nserving: [{kind: moving_average}]\nbusiness: [{kind: sum}]\n"
        "perWorkerConfig:\n  - {k: 1}\n  - {k: 1}\n  - {k: 2}\n");
    const auto a = runSteps(spec, 0, 6, 77);
    const auto b = runSteps(spec, 1, 6, 77);
    const auto c = runSteps(spec, 2, 6, 77);
    EXPECT_EQ(a.back().payload, b.back().payload);
    EXPECT_EQ(a.back().nonce, b.back().nonce);
    EXPECT_NE(a.back().payload, c.back().payload);
}

TEST(Runtime, ReplayDeterministic) {
    const auto spec = ready(slurp(kRepo + "/pipelines/annex_three_workers.yaml"));
    for (std::size_t w = 0; w < 3; ++w) {
        const auto a = runSteps(spec, w, 8, 5);
        const auto b = runSteps(spec, w, 8, 5);
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_EQ(a[i].payload, b[i].payload);
            EXPECT_EQ(a[i].nonce, b[i].nonce);
        }
    }
    EXPECT_NE(runSteps(spec, 0, 3, 5).back().payload, runSteps(spec, 0, 3, 6).back().payload);
}

TEST(Runtime, NoncesDifferPerStep) {
    const auto spec = ready(slurp(kRepo + "/pipelines/threshold_counter.yaml"));
    const auto steps = runSteps(spec, 0, 20, 3);
    std::set<Digest> seen;
    for (const auto& s : steps) seen.insert(s.nonce);
    EXPECT_EQ(seen.size(), steps.size());
}

TEST(Runtime, CustomServingAndBusiness) {
    const auto spec = ready(
        "name: c\ndataSource: {kind: counter, params: {start: 1}}\n"
        "serving: [{kind: custom, code: 'x * params.k', params: {k: 3}}]\n"
        "business: [{kind: custom, code: 'acc + x'}, {kind: max}, {kind: count}]\n");
    const auto p = ShardPayload::decode(runSteps(spec, 0, 4, 0).back().payload);
    EXPECT_DOUBLE_EQ(p.results[0].second, 3 * (1 + 2 + 3 + 4));
    EXPECT_DOUBLE_EQ(p.results[1].second, 12);
    EXPECT_DOUBLE_EQ(p.results[2].second, 4);
}

TEST(Runtime, RejectedPluginRefusedAndAuthorNamed) {
    auto spec = parsePipeline(
        "name: bad\ndataSource: {kind: counter}\nbusiness: [{kind: custom, code: 'system(x)'}]\n");
    signCustomCode(spec, "mallory", author());
    EXPECT_FALSE(vetPipeline(spec, defaultSafetyPolicy()));
    const auto r = executeStep(spec, 0, {}, 1);
    ASSERT_TRUE(std::holds_alternative<StepRefusal>(r));
    EXPECT_EQ(std::get<StepRefusal>(r).offenders, (std::vector<DeedId>{"mallory"}));
}

TEST(Runtime, UncheckedOrTamperedPluginRefused) {
    auto spec = parsePipeline("name: u\ndataSource: {kind: counter}\nbusiness: [{kind: custom, code: 'acc + x'}]\n");
    signCustomCode(spec, "a", author());
    EXPECT_TRUE(std::holds_alternative<StepRefusal>(executeStep(spec, 0, {}, 1)));
    vetPipeline(spec, defaultSafetyPolicy());
    EXPECT_TRUE(std::holds_alternative<StepResult>(executeStep(spec, 0, {}, 1)));
    spec.business[0].code->source = "acc - x";
    EXPECT_TRUE(std::holds_alternative<StepRefusal>(executeStep(spec, 0, {}, 1)));
}

// Audit trail: every contribution to a payload came from a SAFE plugin.
TEST(Runtime, AuditTrailOnlySafeContributors) {
    for (const char* file : {"minimal.yaml", "annex_three_workers.yaml", "threshold_counter.yaml"}) {
        const auto spec = ready(slurp(kRepo + "/pipelines/" + file));
        for (const auto& s : runSteps(spec, 0, 5, 9)) {
            EXPECT_EQ(s.contributions.size(), 1 + spec.serving.size() + spec.business.size());
            for (const auto& c : s.contributions) EXPECT_EQ(c.verdict, Verdict::Kind::Safe);
        }
    }
}

TEST(Property, SafetyCheckDeterministicOverRandomSources) {
    RngStream rng(11, "fuzz");
    const std::string alphabet = "acx+-*/%()<>=!&|?:., 0123456789'\"`#;_stepmin";
    for (int i = 0; i < 500; ++i) {
        std::string s;
        const auto len = rng.below(40);
        for (std::uint64_t j = 0; j < len; ++j) s += alphabet[rng.below(alphabet.size())];
        const auto a = safetyCheck(s, defaultSafetyPolicy());
        const auto b = safetyCheck(s, defaultSafetyPolicy());
        EXPECT_EQ(a.kind, b.kind);
        EXPECT_EQ(a.reasons, b.reasons);
        if (a.safe()) {
            EXPECT_NO_THROW(parseExpr(s)) << s;
        }
    }
}
