#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "poai/simnet/report.h"

namespace poai::cli {

// Exit statuses shared by the subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIntegrity = 1;   // verify: chain or block check failed
inline constexpr int kExitUnreadable = 2;  // missing/unreadable input, bad config, bad query
inline constexpr int kExitTruncated = 3;   // verify: file shorter than its header declares
inline constexpr int kExitMalformed = 4;   // verify: damaged file header

struct RunOptions {
    std::filesystem::path scenarioPath;
    std::optional<std::uint64_t> seedOverride;
    std::filesystem::path outputDir;
    simnet::ReportFormat reportFormat = simnet::ReportFormat::Records;
};

inline constexpr const char* kReportFile = "report.jsonl";
inline constexpr const char* kLedgerFile = "ledger.bin";
inline constexpr const char* kManifestFile = "manifest.json";

// Writes report.jsonl, ledger.bin and manifest.json into outputDir. Nothing
// is written unless the scenario loads and the run completes.
int cmdRun(const RunOptions& opts, std::ostream& out, std::ostream& err);

int cmdVerify(const std::filesystem::path& dumpPath, std::ostream& out, std::ostream& err);

// query: epoch=<n> | deed=<id> | job=<sender/seq or (sender,seq)>.
int cmdInspect(const std::filesystem::path& reportDir, const std::string& query, std::ostream& out,
               std::ostream& err);

}  // namespace poai::cli
