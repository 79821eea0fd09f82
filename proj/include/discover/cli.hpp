#pragma once

#include <atomic>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace discover::cli {

// Exit codes shared by every command.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;
inline constexpr int kConfigError = 2;

struct RunArgs {
  std::filesystem::path config_path;
  std::optional<std::filesystem::path> resume_dir;
  std::filesystem::path runs_root = "runs";
  std::optional<std::string> run_id;
  bool quiet = false;
};

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err,
            const std::atomic<bool>* abort = nullptr);

struct EvalArgs {
  std::optional<std::string> task;
  std::optional<std::string> command;  // whitespace-split into argv
  std::filesystem::path program;
  double timeout_s = 60.0;
  std::string direction = "maximize";  // external evaluators only
  std::string formulation = "complement_correlation";
  double tol = 1e-9;
};

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);

struct ReportArgs {
  std::filesystem::path run_dir;
  bool plot = false;
  std::optional<double> scale_c;
};

int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err);

struct CompareArgs {
  std::filesystem::path run_a;
  std::filesystem::path run_b;
  double threshold = 0.0;
};

int cmd_bench_compare(const CompareArgs& args, std::ostream& out, std::ostream& err);

/// Full command-line entry point (argument parsing included).
int main(int argc, char** argv);

}  // namespace discover::cli
