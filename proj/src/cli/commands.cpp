#include "poai/cli/commands.h"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "poai/common/error.h"
#include "poai/ledger/dump.h"
#include "poai/simnet/simulator.h"
#include "poai/version.h"

namespace poai::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

void writeFile(const fs::path& path, std::string_view data) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!f) throw std::runtime_error("cannot write " + path.string());
}

std::string asString(const Bytes& b) { return {b.begin(), b.end()}; }

}  // namespace

int cmdRun(const RunOptions& opts, std::ostream& out, std::ostream& err) {
    simnet::ScenarioConfig cfg;
    try {
        cfg = simnet::loadScenario(opts.scenarioPath);
    } catch (const ProtocolError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUnreadable;
    }
    const auto report = simnet::runScenario(cfg, opts.seedOverride);
    const auto reportText = simnet::renderReport(report, opts.reportFormat);
    const auto dumpBytes = ledger::encodeDump(simnet::ledgerDump(report));

    ordered_json manifest{
        {"version", kArtifactVersion},
        {"scenario", report.scenario},
        {"configDigest", toHex(report.configDigest)},
        {"seed", report.seed},
        {"seedOverridden", report.seedOverridden},
        {"reportFormat", opts.reportFormat == simnet::ReportFormat::Records ? "records" : "summary"},
        {"files",
         {{kReportFile, toHex(sha256(reportText))}, {kLedgerFile, toHex(sha256(dumpBytes))}}},
    };

    // Stage into a sibling directory and move files into place only once all
    // three are written.
    std::error_code ec;
    const auto stage = opts.outputDir.string() + ".partial";
    try {
        fs::remove_all(stage, ec);
        fs::create_directories(stage);
        writeFile(fs::path(stage) / kReportFile, reportText);
        writeFile(fs::path(stage) / kLedgerFile, asString(dumpBytes));
        writeFile(fs::path(stage) / kManifestFile, manifest.dump(2) + "\n");
        fs::create_directories(opts.outputDir);
        for (const char* name : {kReportFile, kLedgerFile, kManifestFile}) {
            fs::rename(fs::path(stage) / name, opts.outputDir / name);
        }
        fs::remove_all(stage, ec);
    } catch (const std::exception& e) {
        fs::remove_all(stage, ec);
        err << "error: " << e.what() << '\n';
        return kExitUnreadable;
    }
    out << "ran " << report.scenario << " seed " << report.seed << ": " << report.epochs.size() << " epochs, "
        << report.blocks.size() << " blocks, " << report.eventsProcessed << " events\n";
    if (report.conservationViolation) {
        err << "warning: conservation violated: " << *report.conservationViolation << '\n';
    }
    return kExitOk;
}

int cmdVerify(const fs::path& dumpPath, std::ostream& out, std::ostream& err) {
    using Kind = ledger::DumpError::Kind;
    ledger::LedgerDump dump;
    try {
        dump = ledger::readDump(dumpPath);
    } catch (const ledger::DumpError& e) {
        switch (e.kind()) {
            case Kind::Unreadable:
                err << "unreadable: " << e.what() << '\n';
                return kExitUnreadable;
            case Kind::Truncated:
                err << "truncated: " << e.what() << '\n';
                return kExitTruncated;
            case Kind::BadHeader:
                err << "malformed header: " << e.what() << '\n';
                return kExitMalformed;
            case Kind::BadBlock:
                err << "integrity failure at height " << e.height().value_or(0) << ": " << e.what() << '\n';
                return kExitIntegrity;
        }
    }
    const auto verdict = ledger::verifyChain(dump.blocks);
    if (!verdict.ok) {
        err << "integrity failure at height " << verdict.failedHeight.value_or(0) << ": " << verdict.reason << '\n';
        return kExitIntegrity;
    }
    out << "ok: " << dump.blocks.size() << " blocks, head " << toHex(dump.blocks.back().hash) << ", config "
        << toHex(dump.configDigest) << '\n';
    return kExitOk;
}

int cmdInspect(const fs::path& reportDir, const std::string& query, std::ostream& out, std::ostream& err) {
    const auto eq = query.find('=');
    const std::string key = eq == std::string::npos ? query : query.substr(0, eq);
    const std::string value = eq == std::string::npos ? "" : query.substr(eq + 1);
    if (key != "epoch" && key != "deed" && key != "job") {
        err << "unknown query key '" << key << "' (expected epoch=, deed= or job=)\n";
        return kExitUnreadable;
    }
    if (eq == std::string::npos || value.empty()) {
        err << "query needs a value: " << key << "=<value>\n";
        return kExitUnreadable;
    }
    std::optional<std::uint64_t> epoch;
    std::string job;
    if (key == "epoch") {
        try {
            std::size_t used = 0;
            epoch = std::stoull(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            err << "epoch must be a non-negative integer\n";
            return kExitUnreadable;
        }
    }
    if (key == "job") {
        const auto id = JobId::parse(value);
        if (!id) {
            err << "job must look like sender/seq or (sender,seq)\n";
            return kExitUnreadable;
        }
        job = id->toString();
    }

    std::ifstream in(reportDir / kReportFile);
    if (!in) {
        err << "unreadable: no " << kReportFile << " in " << reportDir.string() << '\n';
        return kExitUnreadable;
    }
    std::ostringstream buf;
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        ordered_json rec;
        try {
            rec = ordered_json::parse(line);
        } catch (const std::exception& e) {
            err << "unreadable: " << kReportFile << ":" << lineNo << ": " << e.what() << '\n';
            return kExitUnreadable;
        }
        const auto type = rec.value("type", "");
        if (key == "epoch" && type == "epoch" && rec.value("epoch", std::uint64_t{0}) == *epoch) {
            for (const auto& row : rec["rows"]) {
                ordered_json o{{"epoch", *epoch}};
                o.update(row);
                buf << o.dump() << '\n';
            }
        } else if (key == "deed" && type == "epoch") {
            for (const auto& row : rec["rows"]) {
                if (row.value("deedId", "") != value) continue;
                ordered_json o{{"epoch", rec["epoch"]}};
                o.update(row);
                buf << o.dump() << '\n';
            }
        } else if (key == "deed" && type == "penalty" && rec.value("deedId", "") == value) {
            buf << rec.dump() << '\n';
        } else if (key == "job" && (type == "timeline" || type == "settlement" || type == "challenge") &&
                   rec.value("job", "") == job) {
            buf << rec.dump() << '\n';
        }
    }
    out << buf.str();
    return kExitOk;
}

}  // namespace poai::cli
