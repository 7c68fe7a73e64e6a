#pragma once

#include <string>
#include <vector>

#include "rdslab/config.hpp"

namespace rdslab {

/// Exit codes of run(): ok, failed check, bad config, runtime error.
enum ExitCode { kExitOk = 0, kExitFailed = 1, kExitConfig = 2, kExitRuntime = 3 };

struct RunResult {
  int status = kExitOk;
  std::string message;             // first failing row, or the error
  std::vector<std::string> files;  // artifacts written under config.out
};

const std::vector<std::string>& subcommands();

/**
 * @brief Runs one subcommand and writes <out>/<subcommand>.csv plus <out>/<subcommand>_summary.txt.
 *
 * Every CSV ends with a footer line "# config_hash=<hex> seed=<n>". Output is
 * a function of (config, seed) only; the thread count does not change it.
 */
RunResult run(const ExperimentConfig& config, const std::string& subcommand);

}  // namespace rdslab
