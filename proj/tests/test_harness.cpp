#include <doctest.h>

#include <chrono>
#include <future>
#include <random>
#include <thread>

#include "discover/harness.hpp"
#include "discover/subprocess.hpp"
#include "support.hpp"

using namespace discover;

namespace {

EvaluatorSpec external(const std::filesystem::path& script, double timeout_s = 10.0) {
  EvaluatorSpec spec;
  spec.kind = EvaluatorSpec::Kind::external;
  spec.command = script.string();
  spec.timeout_s = timeout_s;
  return spec;
}

}  // namespace

TEST_CASE("parse_result accepts the protocol subset") {
  const auto r = parse_result(R"({"valid":true,"score":2.6353})", Direction::maximize);
  CHECK(r.valid);
  CHECK(r.score == 2.6353);
  CHECK(!r.failure_reason);

  const auto bad = parse_result(R"({"valid":false,"score":0,"metrics":{"poisson":0.09}})",
                                Direction::minimize);
  CHECK(!bad.valid);
  CHECK(bad.failure_reason == FailureReason::constraint);
  CHECK(bad.metrics.at("poisson") == 0.09);

  CHECK_THROWS_AS(parse_result(R"({"score":1})", Direction::maximize), ProtocolError);
  CHECK_THROWS_AS(parse_result(R"({"valid":true})", Direction::maximize), ProtocolError);
  CHECK_THROWS_AS(parse_result(R"({"valid":"yes","score":1})", Direction::maximize), ProtocolError);
  CHECK_THROWS_AS(parse_result(R"({"valid":true,"score":"1"})", Direction::maximize), ProtocolError);
  CHECK_THROWS_AS(parse_result(R"({"valid":true,"score":NaN})", Direction::maximize), ProtocolError);
  CHECK_THROWS_AS(parse_result(R"({"valid":true,"score":1e999})", Direction::maximize),
                  ProtocolError);
  CHECK_THROWS_AS(parse_result(R"({"valid":true,"score":1,"metrics":[1]})", Direction::maximize),
                  ProtocolError);
  CHECK_THROWS_AS(parse_result("all good!", Direction::maximize), ProtocolError);
  CHECK_THROWS_AS(parse_result("[1,2]", Direction::maximize), ProtocolError);
  CHECK_THROWS_AS(parse_result(R"({"valid":true,"score":1,"direction":"minimize"})",
                               Direction::maximize),
                  ProtocolError);
}

TEST_CASE("property: parse_result inverts serialize_result") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int trial = 0; trial < 200; ++trial) {
    EvaluationResult r;
    r.direction = rng() % 2 ? Direction::maximize : Direction::minimize;
    r.valid = rng() % 2;
    r.score = u(rng);
    if (!r.valid) {
      r.failure_reason = static_cast<FailureReason>(rng() % 4);
    }
    for (int k = 0; k < static_cast<int>(rng() % 4); ++k) {
      r.metrics["m" + std::to_string(k)] = u(rng);
    }
    r.duration_s = std::abs(u(rng));
    r.log_excerpt = trial % 3 ? "" : "line one\nline \"two\"\t\x01";
    CHECK(parse_result(serialize_result(r), r.direction) == r);
  }
}

TEST_CASE("mean_of_normalized") {
  const std::map<std::string, Normalizer> identity{{"a", {}}, {"b", {}}};
  CHECK(mean_of_normalized({{"a", 0.5}, {"b", 0.7}}, identity) == doctest::Approx(0.6));

  const std::map<std::string, Normalizer> mae{{"mae", {NormalizerOp::reciprocal_scale, 0.017}}};
  // 0.017 / 0.0182 = 0.934065934...
  CHECK(mean_of_normalized({{"mae", 0.0182}}, mae) == doctest::Approx(0.9340659340659341));
  CHECK(mean_of_normalized({{"mae", 0.017}}, mae) == 1.0);

  CHECK_THROWS_AS(mean_of_normalized({{"a", 0.5}}, identity), MetricError);
  CHECK_THROWS_AS(mean_of_normalized({{"mae", 0.0}}, mae), MetricError);
}

TEST_CASE("property: mean_of_normalized ignores metric order") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<std::string, double>> metrics;
    std::map<std::string, Normalizer> norms;
    for (int k = 0; k < 5; ++k) {
      const std::string name = "k" + std::to_string(k);
      metrics.emplace_back(name, u(rng));
      norms[name] = k % 2 ? Normalizer{NormalizerOp::reciprocal_scale, u(rng)} : Normalizer{};
    }
    std::map<std::string, double> forward(metrics.begin(), metrics.end());
    std::shuffle(metrics.begin(), metrics.end(), rng);
    std::map<std::string, double> shuffled;
    for (const auto& [k, v] : metrics) shuffled.emplace(k, v);
    CHECK(mean_of_normalized(forward, norms) == mean_of_normalized(shuffled, norms));
  }
}

TEST_CASE("threshold_validity is inclusive") {
  const std::vector<ThresholdRule> rule{{"poisson", 0.050}};
  CHECK(threshold_validity({{"poisson", 0.049}}, rule));
  CHECK(threshold_validity({{"poisson", 0.050}}, rule));
  CHECK(!threshold_validity({{"poisson", 0.051}}, rule));
  CHECK_THROWS_AS(threshold_validity({{"mse", 0.1}}, rule), MetricError);
}

TEST_CASE("external evaluator: echo, prose, crash, declared-invalid") {
  testing::TempDir tmp;
  const auto echo = testing::write_script(
      tmp / "echo.sh", "echo 'some log line'\necho '{\"valid\":true,\"score\":1.0}'\n");
  auto r = evaluate_external("program", external(echo), Direction::maximize);
  CHECK(r.valid);
  CHECK(r.score == 1.0);
  CHECK(r.duration_s > 0.0);

  const auto prose = testing::write_script(tmp / "prose.sh", "echo 'looks great to me'\n");
  r = evaluate_external("program", external(prose), Direction::maximize);
  CHECK(!r.valid);
  CHECK(r.failure_reason == FailureReason::protocol);

  const auto crash = testing::write_script(tmp / "crash.sh", "echo oops >&2\nexit 3\n");
  r = evaluate_external("program", external(crash), Direction::maximize);
  CHECK(r.failure_reason == FailureReason::crash);
  CHECK(r.log_excerpt.find("oops") != std::string::npos);

  const auto declared = testing::write_script(
      tmp / "declared.sh", "echo '{\"valid\":false,\"score\":0,\"metrics\":{\"poisson\":0.09}}'\n");
  r = evaluate_external("program", external(declared), Direction::maximize);
  CHECK(r.failure_reason == FailureReason::constraint);
  CHECK(r.metrics.at("poisson") == 0.09);
}

TEST_CASE("external evaluator sees candidate.txt as last argument and EVAL_TIMEOUT_S") {
  testing::TempDir tmp;
  const auto script = testing::write_script(tmp / "check.sh", R"sh(
last=""
for a in "$@"; do last="$a"; done
case "$last" in */candidate.txt) ;; *) exit 9 ;; esac
[ "$1" = "--flag" ] || exit 8
[ "$(cat "$last")" = "hello world" ] || exit 7
[ "$EVAL_TIMEOUT_S" = "7.5" ] || exit 6
[ "$(pwd)" = "$(dirname "$last")" ] || exit 5
echo '{"valid":true,"score":3}'
)sh");
  auto spec = external(script, 7.5);
  spec.args = {"--flag"};
  const auto r = evaluate_external("hello world", spec, Direction::maximize);
  CHECK(r.valid);
  CHECK(r.score == 3.0);
}

TEST_CASE("working directory is removed on success and kept on failure") {
  testing::TempDir tmp;
  const auto ok = testing::write_script(
      tmp / "ok.sh", "dirname \"$1\" > " + (tmp / "where").string() +
                         "\necho '{\"valid\":true,\"score\":1}'\n");
  CHECK(evaluate_external("p", external(ok), Direction::maximize).valid);
  std::ifstream where(tmp / "where");
  std::string dir;
  std::getline(where, dir);
  CHECK(!dir.empty());
  CHECK(!std::filesystem::exists(dir));

  const auto bad = testing::write_script(
      tmp / "bad.sh", "dirname \"$1\" > " + (tmp / "where2").string() + "\nexit 1\n");
  CHECK(!evaluate_external("p", external(bad), Direction::maximize).valid);
  std::ifstream where2(tmp / "where2");
  std::getline(where2, dir);
  CHECK(std::filesystem::exists(dir));
  std::filesystem::remove_all(dir);
}

TEST_CASE("timeout kills the whole process tree") {
  testing::TempDir tmp;
  const std::string marker = "discover-timeout-marker-" + std::to_string(::getpid());
  // The evaluator starts a background grandchild that would outlive it, then
  // blocks; the marker rides along in each shell's command line.
  const auto script = testing::write_script(
      tmp / "sleepy.sh",
      "sh -c 'sleep 30; : " + marker + "' &\nsh -c 'sleep 30; : " + marker + "'\n");
  const auto start = std::chrono::steady_clock::now();
  const auto r = evaluate_external("p", external(script, 1.0), Direction::maximize);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(r.failure_reason == FailureReason::timeout);
  CHECK(r.duration_s >= 1.0);
  CHECK(elapsed < 1.0 + 5.0);
  CHECK(find_processes_with_cmdline(marker).empty());
}

TEST_CASE("a finished evaluator's background children are reaped") {
  testing::TempDir tmp;
  const std::string marker = "discover-leftover-marker-" + std::to_string(::getpid());
  const auto script = testing::write_script(
      tmp / "leaky.sh", "sh -c 'sleep 30; : " + marker +
                            "' >/dev/null 2>&1 &\necho '{\"valid\":true,\"score\":2}'\n");
  const auto r = evaluate_external("p", external(script), Direction::maximize);
  CHECK(r.valid);
  CHECK(find_processes_with_cmdline(marker).empty());
}

TEST_CASE("Harness applies validity rules and normalizers") {
  testing::TempDir tmp;
  const auto script = testing::write_script(
      tmp / "metrics.sh",
      "echo '{\"valid\":true,\"score\":0,\"metrics\":{\"mse\":0.5,\"poisson\":0.049}}'\n");
  EvaluatorSpec spec = external(script);
  spec.normalizers = {{"mse", {NormalizerOp::reciprocal_scale, 0.25}},
                      {"poisson", {NormalizerOp::reciprocal_scale, 0.049}}};
  spec.validity_rules = {{"poisson", 0.050}};
  const Harness harness(spec, Direction::maximize);
  harness.check_usable();
  auto r = harness.evaluate("p");
  CHECK(r.valid);
  CHECK(r.score == doctest::Approx(0.75));

  spec.validity_rules = {{"poisson", 0.040}};
  r = Harness(spec, Direction::maximize).evaluate("p");
  CHECK(!r.valid);
  CHECK(r.failure_reason == FailureReason::constraint);

  spec.validity_rules = {{"absent", 1.0}};
  r = Harness(spec, Direction::maximize).evaluate("p");
  CHECK(r.failure_reason == FailureReason::protocol);
}

TEST_CASE("Harness::check_usable rejects unusable evaluators") {
  EvaluatorSpec spec;
  spec.kind = EvaluatorSpec::Kind::external;
  spec.command = "/nonexistent/evaluator";
  CHECK_THROWS_AS(Harness(spec, Direction::maximize).check_usable(), ConfigError);
  spec.kind = EvaluatorSpec::Kind::builtin;
  spec.task_id = "circle_packing";
  CHECK_NOTHROW(Harness(spec, Direction::maximize).check_usable());
  CHECK_THROWS_AS(Harness(spec, Direction::minimize).check_usable(), ConfigError);
}

TEST_CASE("concurrent evaluations stay isolated") {
  testing::TempDir tmp;
  const auto script = testing::write_script(
      tmp / "cat.sh", "v=$(cat \"$1\")\necho \"{\\\"valid\\\":true,\\\"score\\\":$v}\"\n");
  const Harness harness(external(script), Direction::maximize);
  std::vector<std::future<EvaluationResult>> futures;
  for (int i = 0; i < 16; ++i) {
    futures.push_back(std::async(std::launch::async,
                                 [&harness, i] { return harness.evaluate(std::to_string(i)); }));
  }
  for (int i = 0; i < 16; ++i) {
    const auto r = futures[i].get();
    CHECK(r.valid);
    CHECK(r.score == static_cast<double>(i));
  }
}
