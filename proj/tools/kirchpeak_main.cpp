#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "kirchpeak/errors.hpp"
#include "kirchpeak/runner.hpp"

using namespace kirchpeak;
using nlohmann::json;

namespace {

void print_failure(const RunResult& r) {
    std::cerr << json{{"exit_code", r.exit_code},
                      {"error", r.error_kind},
                      {"message", r.message},
                      {"stage", r.stage},
                      {"directory", r.directory.string()}}
                     .dump()
              << '\n';
}

// The subcommand fills in a missing command or check and must agree with
// one that is present.
RunResult run_with(const std::string& command, const std::string& check, const std::string& path,
                   const RunOptions& opts) {
    RunResult bad;
    bad.exit_code = kExitInvalid;
    bad.stage = "validation";
    try {
        std::ifstream in(path);
        if (!in) throw InputError("cannot read manifest " + path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw InputError("manifest " + path + " is not valid JSON: " + e.what());
        }
        if (!j.is_object()) throw InputError("manifest must be a JSON object");
        if (!j.contains("command")) j["command"] = command;
        if (j["command"] != command)
            throw InputError("manifest command '" + j["command"].get<std::string>() + "' does not match '" + command +
                             "'");
        if (!check.empty()) {
            if (!j.contains("check")) j["check"] = check;
            if (j["check"] != check)
                throw InputError("manifest check '" + j["check"].get<std::string>() + "' does not match '" + check +
                                 "'");
        }
        return run(RunManifest::from_json(j), opts);
    } catch (const Error& e) {
        bad.error_kind = e.kind();
        bad.message = e.what();
    } catch (const json::exception& e) {
        bad.error_kind = "input";
        bad.message = e.what();
    }
    return bad;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pseudospectral solver and verifier for multi-peak solutions of the fractional Kirchhoff equation"};
    app.require_subcommand(1);
    // Subcommands inherit this, so the global flags may follow the subcommand.
    app.fallthrough();

    std::string manifest;
    RunOptions opts;
    std::string check;
    app.add_option("--manifest", manifest, "Run manifest (JSON)")->required()->check(CLI::ExistingFile);
    app.add_option("--out", opts.out_dir, "Run directory (default: $KIRCHPEAK_OUT/<command>)");
    app.add_option("--threads", opts.threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);
    app.add_flag("--strict", opts.strict, "Treat profile truncation warnings as errors");
    app.add_flag("--verbose", opts.verbose, "Write one JSON line per solver iteration to log.jsonl");

    for (const std::string& name : RunManifest::commands()) {
        auto* sub = app.add_subcommand(name);
        if (name == "verify")
            sub->add_option("check", check, "Check to run")->required()->check(CLI::IsMember(RunManifest::checks()));
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInvalid;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    const RunResult r = run_with(command, check, manifest, opts);
    if (r.exit_code == kExitInvalid || r.exit_code == kExitCompute) {
        print_failure(r);
        return r.exit_code;
    }
    json summary = {{"exit_code", r.exit_code}, {"directory", r.directory.string()}, {"reports", json::array()}};
    for (const auto& rep : r.reports)
        summary["reports"].push_back({{"check", rep.name},
                                      {"pass", rep.passed ? json(*rep.passed) : json(nullptr)},
                                      {"value", rep.measured.value("value", json(nullptr))}});
    std::cout << summary.dump() << '\n';
    return r.exit_code;
}
