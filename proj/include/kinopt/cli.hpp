#ifndef KINOPT_CLI_HPP
#define KINOPT_CLI_HPP

#include <map>
#include <string>
#include <vector>

namespace kinopt {

// Exit codes shared by all subcommands: 0 success, 1 experiment failure,
// 2 usage/config error, 3 numeric divergence.
inline constexpr int kExitSuccess = 0;
inline constexpr int kExitExperimentFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDiverged = 3;

struct RunOutput {
  std::vector<double> best_point;
  double best_energy = 0.0;
  long steps = 0;
};

/// Runs one algorithm from a resolved key-value configuration; writes
/// <out>.csv and <out>.json next to each other when `write_files` is set.
/// The resolved configuration (defaults applied) is embedded in both files.
RunOutput execute_run(const std::map<std::string, std::string>& config, bool write_files,
                      std::map<std::string, std::string>* resolved_out = nullptr);

int cmd_run(const std::map<std::string, std::string>& config);
int cmd_scale(const std::map<std::string, std::string>& config);
int cmd_bench(const std::map<std::string, std::string>& config, const std::string& suite_text);
int cmd_diag(const std::map<std::string, std::string>& config);

/// Full command-line entry point (subcommands run, scale, bench, diag).
int run_cli(int argc, const char* const* argv);

}  // namespace kinopt

#endif
