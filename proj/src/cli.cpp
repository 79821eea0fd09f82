#include "discover/cli.hpp"

#include <csignal>
#include <ctime>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "discover/config.hpp"
#include "discover/engine.hpp"
#include "discover/harness.hpp"
#include "discover/run_store.hpp"
#include "discover/serialize.hpp"
#include "discover/tasks/builtin.hpp"
#include "discover/trajectory.hpp"

namespace discover::cli {

namespace fs = std::filesystem;

namespace {

std::string default_run_id(std::uint64_t seed) {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  return std::string(buf) + "-s" + std::to_string(seed);
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> words;
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

}  // namespace

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err,
            const std::atomic<bool>* abort) {
  RunConfig config;
  try {
    config = load_run_config(args.config_path);
    apply_environment_overrides(config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    const Harness harness(config.evaluator, config.direction);
    harness.check_usable();
    auto provider = make_provider(config.provider);

    fs::path run_dir;
    std::optional<RunStore> store;
    if (args.resume_dir) {
      run_dir = *args.resume_dir;
      store.emplace(RunStore::open(run_dir));
    } else {
      run_dir = args.runs_root / args.run_id.value_or(default_run_id(config.seed));
      store.emplace(RunStore::create(run_dir, config));
    }

    EngineHooks hooks;
    hooks.progress = args.quiet ? nullptr : &out;
    hooks.abort = abort;
    const RunReport report = run_discovery(config, *provider, harness, *store, hooks);

    const ProgramDatabase db = load_database(run_dir);
    out << "run directory: " << run_dir.string() << "\n";
    if (report.best_candidate_id) {
      out << "best score: " << format_double(db.get(*report.best_candidate_id).result->score)
          << " (candidate " << *report.best_candidate_id << ")\n";
    } else {
      out << "best score: none (no valid candidate)\n";
    }
    out << "iterations used: " << report.iterations_used << ", attempts: " << report.attempts
        << ", stop reason: " << to_string(report.stop_reason) << "\n";

    if (report.attempts > 0 && db.size() == 1) {
      err << "error: every generation attempt failed; check the provider endpoint\n";
      return kRuntimeError;
    }
    return kOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  if (args.task.has_value() == args.command.has_value()) {
    err << "eval: give exactly one of --task or --cmd\n";
    return kConfigError;
  }
  try {
    EvaluatorSpec spec;
    spec.timeout_s = args.timeout_s;
    spec.feasibility_tol = args.tol;
    Direction direction = parse_direction(args.direction);
    if (args.task) {
      spec.kind = EvaluatorSpec::Kind::builtin;
      spec.task_id = *args.task;
      if (args.formulation == "self_convolution") {
        spec.formulation = OverlapFormulation::self_convolution;
      } else if (args.formulation != "complement_correlation") {
        err << "eval: unknown formulation '" << args.formulation << "'\n";
        return kConfigError;
      }
      const auto d = tasks::builtin_direction(*args.task);
      if (!d) {
        err << "eval: unknown builtin task '" << *args.task << "'\n";
        return kConfigError;
      }
      direction = *d;
    } else {
      const auto words = split_words(*args.command);
      if (words.empty()) {
        err << "eval: --cmd is empty\n";
        return kConfigError;
      }
      spec.kind = EvaluatorSpec::Kind::external;
      spec.command = words.front();
      spec.args.assign(words.begin() + 1, words.end());
    }
    const Harness harness(spec, direction);
    harness.check_usable();
    const std::string program = read_file(args.program);
    out << serialize_result(harness.evaluate(program)) << std::endl;
    return kOk;
  } catch (const ConfigError& e) {
    err << "eval: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "eval: " << e.what() << "\n";
    return kRuntimeError;
  }
}

int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err) {
  try {
    if (args.scale_c && *args.scale_c == 0.0) {
      err << "report: --scale-c must be nonzero\n";
      return kConfigError;
    }
    const TrajectoryTable table = load_trajectory(args.run_dir);
    out << to_csv(table, args.scale_c);
    if (args.plot) {
      const fs::path svg = args.run_dir / "trajectory.svg";
      write_file_atomic(svg, to_svg(table, args.scale_c));
      err << "wrote " << svg.string() << "\n";
    }
    return kOk;
  } catch (const std::exception& e) {
    err << "report: " << e.what() << "\n";
    return kRuntimeError;
  }
}

int cmd_bench_compare(const CompareArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const TrajectoryTable a = load_trajectory(args.run_a);
    const TrajectoryTable b = load_trajectory(args.run_b);
    const ThresholdComparison cmp = compare_runs(a, b, args.threshold);
    const auto describe = [](const std::optional<std::uint64_t>& it) {
      return it ? std::to_string(*it) : std::string("not reached");
    };
    out << "threshold: " << format_double(args.threshold) << "\n";
    out << "run_a iterations-to-threshold: " << describe(cmp.iterations_a) << "\n";
    out << "run_b iterations-to-threshold: " << describe(cmp.iterations_b) << "\n";
    if (cmp.speedup) {
      out << "speedup: " << format_double(*cmp.speedup) << "x\n";
    } else if (cmp.iterations_a && cmp.iterations_b) {
      out << "speedup: undefined (threshold met by an initial program)\n";
    } else {
      out << "speedup: undefined (not reached)\n";
    }
    return kOk;
  } catch (const std::exception& e) {
    err << "bench compare: " << e.what() << "\n";
    return kRuntimeError;
  }
}

namespace {

std::atomic<bool> g_abort{false};

void on_sigint(int) { g_abort.store(true); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Program-discovery engine: evolve, evaluate and benchmark candidate programs"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Launch (or resume) a discovery run");
  run->add_option("--config", run_args.config_path, "Run configuration (JSON)")->required();
  run->add_option("--resume", run_args.resume_dir, "Existing run directory to continue");
  run->add_option("--runs-root", run_args.runs_root, "Parent directory for new runs")
      ->capture_default_str();
  run->add_option("--run-id", run_args.run_id, "Name of the new run directory");
  run->add_flag("--quiet", run_args.quiet, "Suppress per-iteration progress lines");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Evaluate one program and print the result JSON");
  auto* task_opt = eval->add_option("--task", eval_args.task, "Builtin task id");
  auto* cmd_opt = eval->add_option("--cmd", eval_args.command, "External evaluator command");
  task_opt->excludes(cmd_opt);
  eval->add_option("--program", eval_args.program, "Candidate program file")->required();
  eval->add_option("--timeout", eval_args.timeout_s, "Evaluation timeout in seconds")
      ->capture_default_str();
  eval->add_option("--direction", eval_args.direction, "maximize|minimize (external only)")
      ->capture_default_str();
  eval->add_option("--formulation", eval_args.formulation,
                   "complement_correlation|self_convolution (min_overlap only)")
      ->capture_default_str();
  eval->add_option("--tol", eval_args.tol, "Feasibility tolerance")->capture_default_str();

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Print the best-score trajectory of a run as CSV");
  report->add_option("run_dir", report_args.run_dir, "Run directory")->required();
  report->add_flag("--plot", report_args.plot, "Also write <run_dir>/trajectory.svg");
  report->add_option("--scale-c", report_args.scale_c, "Add display column c/score");

  CompareArgs cmp_args;
  auto* bench = app.add_subcommand("bench", "Benchmark utilities");
  bench->require_subcommand(1);
  auto* compare = bench->add_subcommand("compare", "Iterations-to-threshold speedup of two runs");
  compare->add_option("run_a", cmp_args.run_a, "Baseline run directory")->required();
  compare->add_option("run_b", cmp_args.run_b, "Compared run directory")->required();
  compare->add_option("--threshold", cmp_args.threshold, "Score threshold")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (*run) {
    std::signal(SIGINT, on_sigint);
    return cmd_run(run_args, std::cout, std::cerr, &g_abort);
  }
  if (*eval) return cmd_eval(eval_args, std::cout, std::cerr);
  if (*report) return cmd_report(report_args, std::cout, std::cerr);
  if (*compare) return cmd_bench_compare(cmp_args, std::cout, std::cerr);
  return kConfigError;
}

}  // namespace discover::cli
