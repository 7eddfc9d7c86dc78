#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ddrbench/ddr.hpp"
#include "ddrbench/error.hpp"

namespace ddrbench::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitData = 2,
  kExitProvider = 3,
  kExitExcessFailures = 4,
};

int exit_code_for(ErrorCode code);

struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path lexicon;
  std::filesystem::path vocab;
  std::string provider_url;
  std::string provider_token;
  std::filesystem::path corpus;
  std::filesystem::path cache_dir;  // empty: <out>/cache
  bool no_cache = false;
  std::uint64_t seed = 0;
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  std::vector<int> depths{1, 2, 3};
  std::filesystem::path out = "ddrbench-out";
  int concurrency = 4;
  double bin_width = 5.0;
  bool resume = false;
  bool centroid_includes_eos = false;
};

// Each command writes into config.out and returns an ExitCode. Library
// errors propagate as ddrbench::Error; run_cli maps them to exit codes.
int cmd_perturb(RunConfig const& config, std::ostream& log);
int cmd_embed(RunConfig const& config, std::ostream& log);
int cmd_score(RunConfig const& config, std::ostream& log);
int cmd_analyze(RunConfig const& config, std::ostream& log);
int cmd_stats(RunConfig const& config, std::ostream& log);

/// Full command line entry point (argv[0] is the program name).
int run_cli(int argc, char const* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ddrbench::cli
