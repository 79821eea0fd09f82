#include <doctest.h>

#include <random>

#include "discover/database.hpp"
#include "discover/run_store.hpp"
#include "discover/serialize.hpp"
#include "support.hpp"

using namespace discover;

namespace {

Candidate make(std::optional<CandidateId> parent, std::optional<double> score,
               Direction d = Direction::maximize, std::uint64_t iteration = 0) {
  Candidate c;
  c.parent_id = parent;
  c.iteration = iteration;
  c.program = "p";
  c.provider_id = "mock";
  c.created_at = logical_timestamp(0);
  if (score) {
    c.result = EvaluationResult::success(*score, d);
  } else {
    c.result = EvaluationResult::failure(FailureReason::constraint, d, "bad");
  }
  return c;
}

}  // namespace

TEST_CASE("insert assigns dense ids and checks parents") {
  ProgramDatabase db;
  CHECK(db.insert(make(std::nullopt, 1.0)) == 0);
  CHECK(db.size() == 1);
  CHECK(db.insert(make(0, 2.0)) == 1);
  const auto chain = db.lineage(1);
  REQUIRE(chain.size() == 2);
  CHECK(chain[0].id == 0);
  CHECK(chain[1].id == 1);
  CHECK_THROWS_AS(db.insert(make(99, 1.0)), LineageError);
  CHECK(db.size() == 2);
}

TEST_CASE("insert rejects decreasing iterations") {
  ProgramDatabase db;
  db.insert(make(std::nullopt, 1.0, Direction::maximize, 3));
  CHECK_THROWS_AS(db.insert(make(0, 1.0, Direction::maximize, 2)), LineageError);
}

TEST_CASE("best honours direction and breaks ties by insertion order") {
  ProgramDatabase db;
  db.insert(make(std::nullopt, 1.0));
  db.insert(make(0, 2.0));
  db.insert(make(0, 2.0));
  CHECK(db.best(Direction::maximize).id == 1);

  ProgramDatabase mins;
  mins.insert(make(std::nullopt, 5.0, Direction::minimize));
  mins.insert(make(0, 3.0, Direction::minimize));
  CHECK(mins.best(Direction::minimize).id == 1);
}

TEST_CASE("best skips invalid candidates and fails when none is valid") {
  ProgramDatabase db;
  db.insert(make(std::nullopt, std::nullopt));
  CHECK_THROWS_AS(db.best(Direction::maximize), EmptyResultError);
  db.insert(make(0, std::nullopt));
  CHECK_THROWS_AS(db.best(Direction::minimize), EmptyResultError);
  db.insert(make(0, -1.0));
  CHECK(db.best(Direction::maximize).id == 2);
}

TEST_CASE("lineage of root and of a chain; unknown id fails") {
  ProgramDatabase db;
  db.insert(make(std::nullopt, 1.0));
  db.insert(make(0, 1.0));
  db.insert(make(1, 1.0));
  CHECK(db.lineage(0).size() == 1);
  const auto chain = db.lineage(2);
  REQUIRE(chain.size() == 3);
  CHECK(!chain.front().parent_id);
  CHECK(chain[1].id == 1);
  CHECK_THROWS_AS(db.lineage(7), NotFoundError);
}

TEST_CASE("property: random insertion sequences replay identically from disk") {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 20; ++trial) {
    testing::TempDir tmp;
    RunConfig config;
    config.initial_program = testing::inscribed_circle_program();
    config.evaluator.task_id = "circle_packing";
    auto store = RunStore::create(tmp / "run", config);

    ProgramDatabase db;
    std::uniform_real_distribution<double> score(-10.0, 10.0);
    const int n = 1 + static_cast<int>(rng() % 40);
    std::uint64_t iteration = 0;
    for (int i = 0; i < n; ++i) {
      std::optional<CandidateId> parent;
      if (i > 0) parent = rng() % db.size();
      iteration += rng() % 2;
      Candidate c = make(parent, (rng() % 4 == 0) ? std::nullopt : std::optional(score(rng)),
                         Direction::maximize, iteration);
      c.program = "program " + std::to_string(i) + "\nline two\n";
      c.result->metrics["m"] = score(rng);
      c.result->duration_s = score(rng) + 10.0;
      c.result->log_excerpt = "log \"quoted\"\n" + std::to_string(i);
      const auto id = db.insert(c);
      store.append(db.get(id));
    }

    const ProgramDatabase replay = load_database(tmp / "run");
    REQUIRE(replay.size() == db.size());
    for (CandidateId id = 0; id < db.size(); ++id) {
      CHECK(replay.get(id) == db.get(id));
      CHECK(replay.lineage(id).size() == db.lineage(id).size());
    }
    if (db.valid_count() > 0) {
      const auto& best = replay.best(Direction::maximize);
      CHECK(best.is_valid());
      CHECK(best.id == db.best(Direction::maximize).id);
      const auto chain = replay.lineage(best.id);
      CHECK(chain.size() <= replay.size());
      for (std::size_t i = 1; i < chain.size(); ++i) CHECK(chain[i - 1].id < chain[i].id);
    }
  }
}

TEST_CASE("truncate_after drops later iterations and their program files") {
  testing::TempDir tmp;
  RunConfig config;
  config.initial_program = "x";
  auto store = RunStore::create(tmp / "run", config);
  ProgramDatabase db;
  for (std::uint64_t it = 0; it < 4; ++it) {
    const auto id = db.insert(make(it == 0 ? std::nullopt : std::optional<CandidateId>(0), 1.0,
                                   Direction::maximize, it));
    store.append(db.get(id));
  }
  store.truncate_after(1);
  const auto replay = load_database(tmp / "run");
  CHECK(replay.size() == 2);
  CHECK(!std::filesystem::exists(tmp / "run/programs/3.txt"));
  // Appending continues after the truncation point.
  Candidate c = make(0, 4.0, Direction::maximize, 2);
  c.id = 2;
  store.append(c);
  CHECK(load_database(tmp / "run").size() == 3);
}

TEST_CASE("create refuses an existing run and corrupt lines are reported") {
  testing::TempDir tmp;
  RunConfig config;
  config.initial_program = "x";
  { auto store = RunStore::create(tmp / "run", config); }
  CHECK_THROWS_AS(RunStore::create(tmp / "run", config), StorageError);
  testing::write_text(tmp / "run/db.jsonl", "{not json\n");
  CHECK_THROWS_AS(load_database(tmp / "run"), StorageError);
}

TEST_CASE("scores round-trip exactly through the record format") {
  for (double v : {0.1, 2.6353, 2.635983, 0.380874, 1e-300, -0.0, 1.0 / 3.0}) {
    EvaluationResult r = EvaluationResult::success(v, Direction::minimize);
    const auto back = evaluation_result_from_json(Json::parse(to_json(r).dump()));
    CHECK(back.score == v);
    CHECK(std::signbit(back.score) == std::signbit(v));
  }
}
