#include <CLI11.hpp>

#include <iostream>

#include "poai/cli/commands.h"
#include "poai/version.h"

int main(int argc, char** argv) {
    using namespace poai::cli;
    CLI::App app{"Proof-of-AI network simulator"};
    app.set_version_flag("--version", poai::kArtifactVersion);
    app.require_subcommand(1);

    RunOptions runOpts;
    std::uint64_t seed = 0;
    std::string format = "records";
    auto* run = app.add_subcommand("run", "Run a scenario and write report, ledger dump and manifest");
    run->add_option("--scenario", runOpts.scenarioPath, "Scenario file")->required();
    auto* seedOpt = run->add_option("--seed", seed, "Override the scenario's seed");
    run->add_option("--out", runOpts.outputDir, "Output directory")->required();
    run->add_option("--format", format, "Report format")->check(CLI::IsMember({"records", "summary"}));

    std::string dumpPath;
    auto* verify = app.add_subcommand("verify", "Check a ledger dump's hash chain and signatures");
    verify->add_option("dump", dumpPath, "Ledger dump file")->required();

    std::string reportDir;
    std::string query;
    auto* inspect = app.add_subcommand("inspect", "Filter a run's report");
    inspect->add_option("--out", reportDir, "Directory written by run")->required();
    inspect->add_option("--query", query, "epoch=<n>, deed=<id> or job=<sender/seq>")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUnreadable;
    }

    if (*run) {
        if (*seedOpt) runOpts.seedOverride = seed;
        runOpts.reportFormat = format == "summary" ? poai::simnet::ReportFormat::Summary
                                                   : poai::simnet::ReportFormat::Records;
        return cmdRun(runOpts, std::cout, std::cerr);
    }
    if (*verify) return cmdVerify(dumpPath, std::cout, std::cerr);
    return cmdInspect(reportDir, query, std::cout, std::cerr);
}
