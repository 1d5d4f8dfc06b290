#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "poai/cli/commands.h"

using namespace poai;
using namespace poai::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = fs::path(POAI_TEST_DATA "/../..") / "scenarios";

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("poai_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& data) {
    std::ofstream(p, std::ios::binary | std::ios::trunc) << data;
}

struct Captured {
    int code = -1;
    std::string out;
    std::string err;
};

Captured run(const fs::path& scenario, const fs::path& outDir, std::optional<std::uint64_t> seed = std::nullopt,
             simnet::ReportFormat format = simnet::ReportFormat::Records) {
    std::ostringstream out, err;
    const int code = cmdRun({scenario, seed, outDir, format}, out, err);
    return {code, out.str(), err.str()};
}

Captured verify(const fs::path& dump) {
    std::ostringstream out, err;
    const int code = cmdVerify(dump, out, err);
    return {code, out.str(), err.str()};
}

Captured inspect(const fs::path& dir, const std::string& q) {
    std::ostringstream out, err;
    const int code = cmdInspect(dir, q, out, err);
    return {code, out.str(), err.str()};
}

std::vector<nlohmann::json> lines(const std::string& text) {
    std::vector<nlohmann::json> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(nlohmann::json::parse(l));
    return out;
}

}  // namespace

TEST(CliRun, ReferenceScenarioWritesAllArtifacts) {
    const auto dir = scratch("ref");
    const auto r = run(kScenarios / "reference_3node.yaml", dir);
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {kReportFile, kLedgerFile, kManifestFile}) EXPECT_TRUE(fs::exists(dir / f)) << f;
    const auto manifest = nlohmann::json::parse(slurp(dir / kManifestFile));
    EXPECT_EQ(manifest["seed"], 7);
    EXPECT_EQ(manifest["seedOverridden"], false);
    EXPECT_EQ(manifest["configDigest"].get<std::string>().size(), 64u);
    EXPECT_NE(slurp(dir / kReportFile).find("\"amount\":\"82.11707399\""), std::string::npos);
    EXPECT_FALSE(fs::exists(dir.string() + ".partial"));
}

TEST(CliRun, SeedOverrideGoesIntoTheManifest) {
    const auto dir = scratch("seed");
    ASSERT_EQ(run(kScenarios / "reference_3node.yaml", dir, 1234).code, 0);
    const auto manifest = nlohmann::json::parse(slurp(dir / kManifestFile));
    EXPECT_EQ(manifest["seed"], 1234);
    EXPECT_EQ(manifest["seedOverridden"], true);
}

TEST(CliRun, MissingScenarioLeavesNoOutput) {
    const auto dir = scratch("missing");
    const auto r = run(kScenarios / "does_not_exist.yaml", dir);
    EXPECT_NE(r.code, 0);
    EXPECT_FALSE(fs::exists(dir));
    EXPECT_NE(r.err.find("does_not_exist"), std::string::npos);
}

TEST(CliRun, ConfigErrorIsLineAnchored) {
    const auto dir = scratch("badcfg");
    const auto bad = fs::temp_directory_path() / "poai_cli_bad.yaml";
    spit(bad, "name: x\nseed: 1\nregions:\n  - {name: a, validator: v}\nnodes:\n  - {deedId: n, region: a, balance: -4}\n");
    const auto r = run(bad, dir);
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.err.find(":6:"), std::string::npos) << r.err;
    EXPECT_FALSE(fs::exists(dir));
}

TEST(CliRun, RepeatedRunsAreByteIdentical) {
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    ASSERT_EQ(run(kScenarios / "annex_three_workers.yaml", a).code, 0);
    ASSERT_EQ(run(kScenarios / "annex_three_workers.yaml", b).code, 0);
    for (const char* f : {kReportFile, kLedgerFile, kManifestFile}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(CliRun, SummaryFormatIsTwoLines) {
    const auto dir = scratch("summary");
    ASSERT_EQ(run(kScenarios / "reference_3node.yaml", dir, std::nullopt, simnet::ReportFormat::Summary).code, 0);
    const auto recs = lines(slurp(dir / kReportFile));
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(recs[0]["type"], "run");
    EXPECT_EQ(recs[1]["type"], "summary");
}

TEST(CliVerify, AcceptsProducedDump) {
    const auto dir = scratch("verify_ok");
    ASSERT_EQ(run(kScenarios / "reference_3node.yaml", dir).code, 0);
    const auto r = verify(dir / kLedgerFile);
    EXPECT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(r.out.rfind("ok:", 0), 0u);
}

TEST(CliVerify, FlippedByteReportsHeight) {
    const auto dir = scratch("verify_flip");
    ASSERT_EQ(run(kScenarios / "reference_3node.yaml", dir).code, 0);
    auto bytes = slurp(dir / kLedgerFile);
    bytes[bytes.size() - 10] ^= 0x04;
    spit(dir / kLedgerFile, bytes);
    const auto r = verify(dir / kLedgerFile);
    EXPECT_EQ(r.code, kExitIntegrity);
    EXPECT_NE(r.err.find("height"), std::string::npos) << r.err;
}

TEST(CliVerify, TruncatedAndUnreadableHaveDistinctCodes) {
    const auto dir = scratch("verify_trunc");
    ASSERT_EQ(run(kScenarios / "reference_3node.yaml", dir).code, 0);
    const auto bytes = slurp(dir / kLedgerFile);
    spit(dir / "cut.bin", bytes.substr(0, bytes.size() / 2));
    const auto t = verify(dir / "cut.bin");
    EXPECT_EQ(t.code, kExitTruncated);
    EXPECT_NE(t.err.find("truncated"), std::string::npos);

    const auto u = verify(dir / "absent.bin");
    EXPECT_EQ(u.code, kExitUnreadable);
    EXPECT_NE(u.code, t.code);

    auto header = bytes;
    header[2] ^= 0x01;
    spit(dir / "header.bin", header);
    EXPECT_EQ(verify(dir / "header.bin").code, kExitMalformed);
}

TEST(CliInspect, EpochQueryReturnsThatEpochsRows) {
    const auto dir = scratch("inspect_epoch");
    ASSERT_EQ(run(kScenarios / "reference_3node.yaml", dir).code, 0);
    const auto r = inspect(dir, "epoch=1");
    ASSERT_EQ(r.code, 0);
    const auto rows = lines(r.out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0]["deedId"], "n1");
    EXPECT_EQ(rows[1]["amount"], "15.104591644");
    for (const auto& row : rows) EXPECT_EQ(row["epoch"], 1);
    EXPECT_TRUE(inspect(dir, "epoch=2").out.empty());
}

TEST(CliInspect, JobTimelineIsOrdered) {
    const auto dir = scratch("inspect_job");
    ASSERT_EQ(run(kScenarios / "reference_3node.yaml", dir).code, 0);
    const auto r = inspect(dir, "job=(n1,1)");
    ASSERT_EQ(r.code, 0);
    std::vector<std::string> events;
    for (const auto& l : lines(r.out)) {
        if (l["type"] == "timeline") events.push_back(l["event"]);
    }
    auto pos = [&](const std::string& e) {
        return std::find(events.begin(), events.end(), e) - events.begin();
    };
    ASSERT_LT(pos("settled"), static_cast<long>(events.size()));
    EXPECT_LT(pos("assigned"), pos("proof"));
    EXPECT_LT(pos("proof"), pos("gathered"));
    EXPECT_LT(pos("gathered"), pos("settled"));
    EXPECT_EQ(inspect(dir, "job=n1/1").out, r.out);
}

TEST(CliInspect, UnknownDeedIsEmptyButUnknownKeyFails) {
    const auto dir = scratch("inspect_misc");
    ASSERT_EQ(run(kScenarios / "reference_3node.yaml", dir).code, 0);
    const auto none = inspect(dir, "deed=nobody");
    EXPECT_EQ(none.code, 0);
    EXPECT_TRUE(none.out.empty());
    EXPECT_NE(inspect(dir, "color=blue").code, 0);
    EXPECT_NE(inspect(dir, "epoch=one").code, 0);
    EXPECT_NE(inspect(scratch("inspect_none"), "epoch=1").code, 0);
    EXPECT_EQ(lines(inspect(dir, "deed=n2").out).size(), 1u);
}
