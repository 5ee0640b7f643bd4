#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "kirchpeak/manifest.hpp"
#include "kirchpeak/verify.hpp"

namespace kirchpeak {

enum ExitCode : int {
    kExitOk = 0,
    kExitCheckFailed = 1,  // computation finished but a gated check failed
    kExitInvalid = 2,      // manifest rejected before any compute
    kExitCompute = 3,      // a stage raised an error
};

struct RunOptions {
    std::string out_dir;  // wins over the manifest's output field
    int threads = 1;
    bool strict = false;
    bool verbose = false;  // one JSON line per solver iteration in log.jsonl
};

struct RunResult {
    int exit_code = kExitOk;
    std::filesystem::path directory;
    std::vector<CheckReport> reports;
    std::string stage;  // failing stage when exit_code is kExitCompute
    std::string error_kind;
    std::string message;
};

// Run directory: explicit option, then manifest.output, then
// $KIRCHPEAK_OUT/<command>[-<check>], then ./runs/<command>[-<check>].
std::filesystem::path resolve_run_directory(const RunManifest& m, const RunOptions& opts);

// Validates, computes and writes the run directory. Never throws for
// library errors; they are mapped to exit codes and written to error.json.
RunResult run(const RunManifest& m, const RunOptions& opts);
RunResult run_file(const std::string& manifest_path, const RunOptions& opts);

// Calls fn(i) for i in [0, n) on up to `threads` workers. Every index runs
// even if another fails; the lowest failing index's exception is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace kirchpeak
