#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <sstream>

#include "discover/cli.hpp"
#include "discover/run_store.hpp"
#include "discover/serialize.hpp"
#include "support.hpp"

using namespace discover;

namespace {

std::string packing_config_json(const std::string& extra = "") {
  return R"({
  "task_prompt": "Pack circles.",
  "initial_program": "packing n=1\n0.4 0.4 0.3\n",
  "evaluator": {"kind": "builtin", "task_id": "circle_packing"},
  "direction": "maximize",
  "max_iterations": 3,
  "seed": 7,
  "reproducible": true)" +
         extra + "\n}\n";
}

// A run whose best score at iteration i is scores[i] (one candidate per
// iteration, each a child of the previous one).
void write_run(const std::filesystem::path& dir, const std::vector<double>& scores,
               Direction direction = Direction::maximize) {
  RunConfig config;
  config.initial_program = "x";
  config.direction = direction;
  auto store = RunStore::create(dir, config);
  ProgramDatabase db;
  RunReport report;
  report.direction = direction;
  report.stop_reason = StopReason::budget;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    Candidate c;
    c.parent_id = i == 0 ? std::nullopt : std::optional<CandidateId>(i - 1);
    c.iteration = i;
    c.program = "program " + std::to_string(i) + "\n";
    c.provider_id = i == 0 ? "initial" : "mock";
    c.created_at = logical_timestamp(i);
    c.result = EvaluationResult::success(scores[i], direction);
    const auto id = db.insert(c);
    store.append(db.get(id));
    const auto& best = db.best(direction);
    report.best_candidate_id = best.id;
    report.best_score_trajectory.push_back({i, best.result->score, best.id, i});
  }
  report.attempts = scores.size() - 1;
  report.iterations_used = scores.size() - 1;
  store.write_report(report);
}

// Runs a shell command, capturing stdout and the exit status.
std::pair<int, std::string> shell(const std::string& command) {
  std::string output;
  FILE* pipe = ::popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) output.append(buf.data(), n);
  const int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, output};
}

}  // namespace

TEST_CASE("run: valid config completes and writes the run directory") {
  testing::TempDir tmp;
  testing::write_text(tmp / "config.json", packing_config_json());
  std::ostringstream out;
  std::ostringstream err;
  cli::RunArgs args;
  args.config_path = tmp / "config.json";
  args.runs_root = tmp / "runs";
  args.run_id = "r1";
  CHECK(cli::cmd_run(args, out, err) == cli::kOk);
  CHECK(out.str().find("\"iteration\":3") != std::string::npos);
  CHECK(out.str().find("best score:") != std::string::npos);
  for (const char* f : {"config.json", "db.jsonl", "report.json", "programs/0.txt"}) {
    CHECK(std::filesystem::exists(tmp / "runs/r1" / f));
  }
  const auto report = load_report(tmp / "runs/r1");
  REQUIRE(report);
  CHECK(report->iterations_used == 3);
  CHECK(report->stop_reason == StopReason::budget);

  // Resuming a finished run changes nothing.
  const auto db_before = read_file(tmp / "runs/r1/db.jsonl");
  cli::RunArgs resume = args;
  resume.resume_dir = tmp / "runs/r1";
  CHECK(cli::cmd_run(resume, out, err) == cli::kOk);
  CHECK(read_file(tmp / "runs/r1/db.jsonl") == db_before);
}

TEST_CASE("run: initial_program_file is read relative to the config") {
  testing::TempDir tmp;
  testing::write_text(tmp / "seed.txt", testing::inscribed_circle_program());
  testing::write_text(tmp / "config.json", R"({
  "initial_program_file": "seed.txt",
  "evaluator": {"kind": "builtin", "task_id": "circle_packing"},
  "max_iterations": 1
})");
  std::ostringstream out;
  std::ostringstream err;
  cli::RunArgs args;
  args.config_path = tmp / "config.json";
  args.runs_root = tmp / "runs";
  args.run_id = "r";
  args.quiet = true;
  CHECK(cli::cmd_run(args, out, err) == cli::kOk);
  CHECK(read_file(tmp / "runs/r/programs/0.txt") == testing::inscribed_circle_program());
}

TEST_CASE("run: bad weights are a config error naming model_weights") {
  testing::TempDir tmp;
  testing::write_text(tmp / "config.json",
                      packing_config_json(",\n  \"model_weights\": {\"A\": 0.8, \"B\": 0.1}"));
  std::ostringstream out;
  std::ostringstream err;
  cli::RunArgs args;
  args.config_path = tmp / "config.json";
  args.runs_root = tmp / "runs";
  CHECK(cli::cmd_run(args, out, err) == cli::kConfigError);
  CHECK(err.str().find("model_weights") != std::string::npos);
  CHECK(err.str().find("0.9") != std::string::npos);
  CHECK(!std::filesystem::exists(tmp / "runs"));
}

TEST_CASE("run: other config errors") {
  testing::TempDir tmp;
  std::ostringstream out;
  std::ostringstream err;
  cli::RunArgs args;
  args.config_path = tmp / "config.json";
  args.runs_root = tmp / "runs";

  testing::write_text(tmp / "config.json", packing_config_json(",\n  \"colour\": 1"));
  CHECK(cli::cmd_run(args, out, err) == cli::kConfigError);
  CHECK(err.str().find("colour") != std::string::npos);

  testing::write_text(tmp / "config.json",
                      packing_config_json(",\n  \"parallelism\": 0"));
  CHECK(cli::cmd_run(args, out, err) == cli::kConfigError);

  testing::write_text(
      tmp / "config.json",
      R"({"initial_program": "x", "evaluator": {"kind": "builtin", "task_id": "circle_packing"},
          "direction": "minimize"})");
  CHECK(cli::cmd_run(args, out, err) == cli::kConfigError);

  testing::write_text(tmp / "config.json",
                      R"({"initial_program": "x",
                          "evaluator": {"kind": "external", "command": "/no/such/evaluator"}})");
  CHECK(cli::cmd_run(args, out, err) == cli::kConfigError);

  args.config_path = tmp / "missing.json";
  CHECK(cli::cmd_run(args, out, err) == cli::kConfigError);
}

TEST_CASE("run: an unreachable endpoint fails with a runtime error") {
  testing::TempDir tmp;
  testing::write_text(
      tmp / "config.json",
      packing_config_json(R"(,
  "model_weights": {"some-model": 1.0},
  "provider": {"kind": "http", "base_url": "http://127.0.0.1:9/v1",
               "request_timeout_s": 2, "retry": {"max_attempts": 1}})"));
  std::ostringstream out;
  std::ostringstream err;
  cli::RunArgs args;
  args.config_path = tmp / "config.json";
  args.runs_root = tmp / "runs";
  args.run_id = "r";
  CHECK(cli::cmd_run(args, out, err) == cli::kRuntimeError);
  CHECK(err.str().find("provider endpoint") != std::string::npos);
  // The failed attempts are still accounted for.
  const auto report = load_report(tmp / "runs/r");
  REQUIRE(report);
  CHECK(report->attempts == 3);
}

TEST_CASE("run: an invalid initial program is a runtime error") {
  testing::TempDir tmp;
  testing::write_text(tmp / "config.json", R"({
  "initial_program": "packing n=1\n0.5 0.5 0.9\n",
  "evaluator": {"kind": "builtin", "task_id": "circle_packing"}
})");
  std::ostringstream out;
  std::ostringstream err;
  cli::RunArgs args;
  args.config_path = tmp / "config.json";
  args.runs_root = tmp / "runs";
  CHECK(cli::cmd_run(args, out, err) == cli::kRuntimeError);
  CHECK(err.str().find("initial program") != std::string::npos);
}

TEST_CASE("report: CSV, display scale and plot") {
  testing::TempDir tmp;
  write_run(tmp / "run", {0.0182, 0.0175, 0.0175, 0.017}, Direction::minimize);
  std::ostringstream out;
  std::ostringstream err;
  cli::ReportArgs args;
  args.run_dir = tmp / "run";
  CHECK(cli::cmd_report(args, out, err) == cli::kOk);
  CHECK(out.str() ==
        "iteration,attempts_cumulative,best_score,best_id\n"
        "0,0,0.0182,0\n"
        "1,1,0.0175,1\n"
        "2,2,0.0175,1\n"
        "3,3,0.017,3\n");

  std::ostringstream scaled;
  args.scale_c = 0.017;
  args.plot = true;
  CHECK(cli::cmd_report(args, scaled, err) == cli::kOk);
  std::istringstream lines(scaled.str());
  std::string header;
  std::string row0;
  std::getline(lines, header);
  std::getline(lines, row0);
  CHECK(header == "iteration,attempts_cumulative,best_score,best_id,display_score");
  const double display = std::stod(row0.substr(row0.rfind(',') + 1));
  CHECK(display == doctest::Approx(0.934066).epsilon(1e-6));
  const auto svg = read_file(tmp / "run/trajectory.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("report: a directory without a run fails") {
  testing::TempDir tmp;
  std::filesystem::create_directories(tmp / "empty");
  std::ostringstream out;
  std::ostringstream err;
  cli::ReportArgs args;
  args.run_dir = tmp / "empty";
  CHECK(cli::cmd_report(args, out, err) == cli::kRuntimeError);
  CHECK(!err.str().empty());
}

TEST_CASE("bench compare: speedup, identical runs, not reached") {
  testing::TempDir tmp;
  std::vector<double> slow(116, 2.0);
  slow[115] = 2.64;
  std::vector<double> fast(6, 2.0);
  fast[5] = 2.6353;
  write_run(tmp / "slow", slow);
  write_run(tmp / "fast", fast);

  std::ostringstream err;
  cli::CompareArgs args{tmp / "slow", tmp / "fast", 2.634};
  std::ostringstream out;
  CHECK(cli::cmd_bench_compare(args, out, err) == cli::kOk);
  CHECK(out.str().find("run_a iterations-to-threshold: 115") != std::string::npos);
  CHECK(out.str().find("run_b iterations-to-threshold: 5") != std::string::npos);
  CHECK(out.str().find("speedup: 23x") != std::string::npos);

  std::ostringstream same;
  args.run_a = tmp / "fast";
  CHECK(cli::cmd_bench_compare(args, same, err) == cli::kOk);
  CHECK(same.str().find("speedup: 1x") != std::string::npos);

  std::ostringstream never;
  args.threshold = 2.7;
  CHECK(cli::cmd_bench_compare(args, never, err) == cli::kOk);
  CHECK(never.str().find("not reached") != std::string::npos);
  CHECK(never.str().find("speedup: undefined") != std::string::npos);
}

TEST_CASE("eval through the built binary: builtin task and external command") {
  testing::TempDir tmp;
  const std::string bin = DISCOVER_BINARY;
  testing::write_text(tmp / "one.txt", testing::inscribed_circle_program());
  auto [code, output] =
      shell(bin + " eval --task circle_packing --program " + (tmp / "one.txt").string());
  CHECK(code == 0);
  const auto r = Json::parse(output);
  CHECK(r.at("valid") == true);
  CHECK(r.at("score") == 0.5);
  CHECK(r.at("direction") == "maximize");

  testing::write_text(tmp / "step.txt", "step m=2\n1 0\n");
  std::tie(code, output) = shell(bin + " eval --task min_overlap --formulation self_convolution " +
                                 "--program " + (tmp / "step.txt").string());
  CHECK(code == 0);
  CHECK(Json::parse(output).at("score").get<double>() == doctest::Approx(1.0));

  const auto script = testing::write_script(
      tmp / "ev.sh", "[ \"$1\" = \"--scale\" ] || exit 4\n"
                     "echo '{\"valid\":true,\"score\":0.25,\"metrics\":{\"mse\":4}}'\n");
  std::tie(code, output) = shell(bin + " eval --cmd '" + script.string() +
                                 " --scale' --direction minimize --program " +
                                 (tmp / "one.txt").string());
  CHECK(code == 0);
  const auto ext = Json::parse(output);
  CHECK(ext.at("score") == 0.25);
  CHECK(ext.at("direction") == "minimize");
  CHECK(ext.at("metrics").at("mse") == 4.0);

  std::tie(code, output) = shell(bin + " eval --task nope --program " +
                                 (tmp / "one.txt").string() + " 2>/dev/null");
  CHECK(code == cli::kConfigError);
  std::tie(code, output) = shell(bin + " eval --task circle_packing --cmd x --program " +
                                 (tmp / "one.txt").string() + " 2>/dev/null");
  CHECK(code == cli::kConfigError);
  std::tie(code, output) = shell(bin + " 2>/dev/null");
  CHECK(code == cli::kConfigError);
}
