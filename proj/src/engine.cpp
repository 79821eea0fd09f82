#include "discover/engine.hpp"

#include <algorithm>
#include <future>
#include <ostream>
#include <unordered_map>

#include "discover/serialize.hpp"

namespace discover {

namespace {

std::mt19937_64 iteration_rng(std::uint64_t seed, std::uint64_t iteration) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(iteration),
                    static_cast<std::uint32_t>(iteration >> 32)};
  return std::mt19937_64(seq);
}

std::unordered_map<std::string_view, long> line_counts(std::string_view text) {
  std::unordered_map<std::string_view, long> counts;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++counts[text.substr(pos, end - pos)];
    pos = end + 1;
  }
  return counts;
}

struct SlotOutcome {
  std::string model_id;
  std::optional<std::string> program;
  EvaluationResult result;
  std::string error;
};

SlotOutcome run_slot(Provider& provider, const Harness& harness, GenerationRequest request) {
  SlotOutcome out;
  out.model_id = request.model_id;
  try {
    out.program = provider.generate(request);
  } catch (const std::exception& e) {
    out.error = e.what();
    return out;
  }
  try {
    out.result = harness.evaluate(*out.program);
  } catch (const std::exception& e) {
    out.result = EvaluationResult::failure(FailureReason::crash, harness.direction(),
                                           std::string("evaluator error: ") + e.what());
  }
  return out;
}

class LoopState {
 public:
  LoopState(const RunConfig& config, RunStore& store, const EngineHooks& hooks)
      : config_(config), store_(store), hooks_(hooks) {
    report_.direction = config.direction;
    report_.stop_reason = StopReason::aborted;
  }

  ProgramDatabase& db() { return db_; }
  RunReport& report() { return report_; }

  void add(Candidate c) {
    c.id = db_.size();
    if (config_.reproducible) {
      c.created_at = logical_timestamp(c.id);
      if (c.result) c.result->duration_s = 0.0;
    } else {
      c.created_at = utc_timestamp();
    }
    db_.insert(c);
    store_.append(db_.get(c.id));
  }

  /// Appends the trajectory point for `iteration` and checkpoints the report.
  void close_iteration(std::uint64_t iteration, std::uint64_t failed_generations = 0) {
    report_.iterations_used = iteration;
    if (db_.valid_count() > 0) {
      const Candidate& best = db_.best(config_.direction);
      report_.best_candidate_id = best.id;
      report_.best_score_trajectory.push_back(
          {iteration, best.result->score, best.id, report_.attempts});
    }
    store_.write_report(report_);
    if (hooks_.progress != nullptr) {
      Json line;
      line["iteration"] = iteration;
      line["best_score"] = report_.best_candidate_id
                               ? Json(db_.get(*report_.best_candidate_id).result->score)
                               : Json(nullptr);
      line["attempts"] = report_.attempts;
      line["failed_generations"] = failed_generations;
      *hooks_.progress << line.dump() << std::endl;
    }
  }

  bool target_met() const {
    if (!config_.target_score || !report_.best_candidate_id) return false;
    return meets(db_.get(*report_.best_candidate_id).result->score, *config_.target_score,
                 config_.direction);
  }

  void finish(StopReason why) {
    report_.stop_reason = why;
    store_.write_report(report_);
  }

  void restore(ProgramDatabase db, RunReport report) {
    db_ = std::move(db);
    report_ = std::move(report);
  }

 private:
  const RunConfig& config_;
  RunStore& store_;
  const EngineHooks& hooks_;
  ProgramDatabase db_;
  RunReport report_;
};

// Report for a run directory holding only iteration 0 (a crash before the
// first checkpoint).
RunReport report_for_seed_only(const ProgramDatabase& db, Direction direction) {
  RunReport r;
  r.direction = direction;
  r.stop_reason = StopReason::aborted;
  if (db.valid_count() > 0) {
    const Candidate& best = db.best(direction);
    r.best_candidate_id = best.id;
    r.best_score_trajectory.push_back({0, best.result->score, best.id, 0});
  }
  return r;
}

}  // namespace

const Candidate& select_parent(const ProgramDatabase& db, const SelectionPolicy& policy,
                               Direction direction, std::mt19937_64& rng) {
  const Candidate& best = db.best(direction);
  if (!(unit_uniform(rng) < policy.epsilon)) return best;
  const auto pool = db.top(direction, std::max<std::size_t>(policy.top_k, 1));
  const auto pick = std::min(pool.size() - 1,
                             static_cast<std::size_t>(unit_uniform(rng) *
                                                      static_cast<double>(pool.size())));
  return *pool[pick];
}

std::string diff_summary(std::string_view before, std::string_view after) {
  auto old_lines = line_counts(before);
  long added = 0;
  for (const auto& [line, count] : line_counts(after)) {
    auto it = old_lines.find(line);
    const long matched = it == old_lines.end() ? 0 : std::min(it->second, count);
    added += count - matched;
    if (it != old_lines.end()) it->second -= matched;
  }
  long removed = 0;
  for (const auto& [line, count] : old_lines) removed += count;
  return "+" + std::to_string(added) + " -" + std::to_string(removed) + " lines";
}

PromptBundle build_prompt(const ProgramDatabase& db, const Candidate& parent,
                          const std::string& task_prompt, std::size_t history_cap) {
  PromptBundle bundle;
  bundle.task_prompt = task_prompt;
  bundle.parent_program = parent.program;
  bundle.parent_score = parent.result ? parent.result->score : 0.0;

  const auto chain = db.lineage(parent.id);
  // chain ends with the parent itself; ancestors are everything before it.
  const std::size_t ancestors = chain.size() - 1;
  const std::size_t first = ancestors > history_cap ? ancestors - history_cap : 0;
  for (std::size_t i = first; i < ancestors; ++i) {
    const Candidate& c = chain[i];
    AncestorNote note;
    note.score = c.result ? c.result->score : 0.0;
    note.summary = i == 0 ? "initial program" : diff_summary(chain[i - 1].program, c.program);
    if (!c.is_valid()) note.summary += " (invalid)";
    bundle.history.push_back(std::move(note));
  }
  return bundle;
}

RunReport run_discovery(const RunConfig& config, Provider& provider, const Harness& harness,
                        RunStore& store, const EngineHooks& hooks) {
  validate(config);
  harness.check_usable();
  const ModelEnsemble ensemble = ModelEnsemble::from_weights(config.model_weights);

  LoopState state(config, store, hooks);

  ProgramDatabase existing = load_database(store.dir());
  if (existing.empty()) {
    Candidate seed;
    seed.iteration = 0;
    seed.program = config.initial_program;
    seed.provider_id = "initial";
    seed.result = harness.evaluate(config.initial_program);
    if (!seed.result->valid && !config.allow_invalid_seed) {
      throw RunError("initial program is invalid (" +
                     std::string(to_string(seed.result->failure_reason.value_or(
                         FailureReason::constraint))) +
                     "): " + seed.result->log_excerpt);
    }
    state.add(std::move(seed));
    state.close_iteration(0);
  } else {
    auto report = load_report(store.dir());
    if (!report) {
      store.truncate_after(0);
      existing = load_database(store.dir());
      report = report_for_seed_only(existing, config.direction);
    } else {
      store.truncate_after(report->iterations_used);
      existing = load_database(store.dir());
    }
    if (report->direction != config.direction) {
      throw ConfigError("direction", "does not match the run being resumed");
    }
    state.restore(std::move(existing), std::move(*report));
    if (state.report().stop_reason == StopReason::target_reached) {
      return state.report();
    }
  }

  if (state.target_met()) {
    state.finish(StopReason::target_reached);
    return state.report();
  }

  for (std::uint64_t iteration = state.report().iterations_used + 1;
       iteration <= config.max_iterations; ++iteration) {
    if (hooks.abort != nullptr && hooks.abort->load()) {
      state.finish(StopReason::aborted);
      return state.report();
    }
    auto rng = iteration_rng(config.seed, iteration);
    const ProgramDatabase& db = state.db();
    const Candidate* parent = nullptr;
    try {
      parent = &select_parent(db, config.selection, config.direction, rng);
    } catch (const EmptyResultError&) {
      parent = &db.get(db.size() - 1);
    }
    const CandidateId parent_id = parent->id;
    const PromptBundle prompt = build_prompt(db, *parent, config.task_prompt, config.history_cap);

    std::vector<GenerationRequest> requests;
    for (std::uint64_t slot = 0; slot < config.parallelism; ++slot) {
      GenerationRequest req;
      req.prompt = prompt;
      req.model_id = route_model(ensemble, rng);
      req.max_output_tokens = config.provider.max_output_tokens;
      req.temperature = config.provider.temperature;
      req.seed = rng();
      requests.push_back(std::move(req));
    }

    std::vector<SlotOutcome> outcomes;
    if (requests.size() == 1) {
      outcomes.push_back(run_slot(provider, harness, std::move(requests.front())));
    } else {
      std::vector<std::future<SlotOutcome>> futures;
      for (auto& req : requests) {
        futures.push_back(std::async(std::launch::async, run_slot, std::ref(provider),
                                     std::cref(harness), std::move(req)));
      }
      for (auto& f : futures) outcomes.push_back(f.get());
    }

    std::uint64_t failed = 0;
    for (auto& out : outcomes) {
      ++state.report().attempts;
      if (!out.program) {
        ++failed;
        continue;
      }
      Candidate c;
      c.parent_id = parent_id;
      c.iteration = iteration;
      c.program = std::move(*out.program);
      c.provider_id = out.model_id;
      c.result = std::move(out.result);
      state.add(std::move(c));
    }
    state.close_iteration(iteration, failed);

    if (state.target_met()) {
      state.finish(StopReason::target_reached);
      return state.report();
    }
  }
  state.finish(StopReason::budget);
  return state.report();
}

}  // namespace discover
