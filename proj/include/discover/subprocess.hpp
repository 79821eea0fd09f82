#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace discover {

struct ProcessOutcome {
  bool timed_out = false;
  std::optional<int> exit_code;    // set when the process exited normally
  std::optional<int> term_signal;  // set when it was killed by a signal
  double duration_s = 0.0;
};

struct ProcessOptions {
  std::filesystem::path workdir;
  std::filesystem::path stdout_path;
  std::filesystem::path stderr_path;
  std::vector<std::pair<std::string, std::string>> extra_env;
  double timeout_s = 60.0;
};

/// Runs argv[0] (resolved through PATH) in its own process group with cwd =
/// options.workdir and stdout/stderr redirected to files. On timeout the
/// whole group is SIGKILLed. After the leader exits the group is killed
/// and reaped as well, so no descendant outlives the call unless it left
/// the group.
ProcessOutcome run_process(const std::vector<std::string>& argv, const ProcessOptions& options);

/// Absolute path of an executable: `name` itself when it contains a slash,
/// otherwise the first PATH entry holding it. nullopt when not executable.
std::optional<std::filesystem::path> find_executable(const std::string& name);

/// Process ids of live (non-zombie) processes whose command line contains
/// `needle`. Linux only; used to check for leaked evaluator processes.
std::vector<int> find_processes_with_cmdline(const std::string& needle);

}  // namespace discover
