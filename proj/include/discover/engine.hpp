#pragma once

#include <atomic>
#include <filesystem>
#include <iosfwd>
#include <random>

#include "discover/config.hpp"
#include "discover/database.hpp"
#include "discover/harness.hpp"
#include "discover/providers.hpp"
#include "discover/run_store.hpp"

namespace discover {

/// With probability 1 - epsilon the best valid candidate, otherwise a
/// uniform pick among the top_k valid candidates (earliest insertion wins
/// score ties). Throws EmptyResultError when nothing is valid.
const Candidate& select_parent(const ProgramDatabase& db, const SelectionPolicy& policy,
                               Direction direction, std::mt19937_64& rng);

/// Prompt for refining `parent`: its program and score plus up to
/// `history_cap` of its nearest ancestors with a line-diff summary each.
PromptBundle build_prompt(const ProgramDatabase& db, const Candidate& parent,
                          const std::string& task_prompt, std::size_t history_cap);

/// "+a -b lines": lines of `after` not in `before` and vice versa (multiset).
std::string diff_summary(std::string_view before, std::string_view after);

struct RunError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EngineHooks {
  std::ostream* progress = nullptr;        // one JSON line per iteration
  const std::atomic<bool>* abort = nullptr;  // checked between iterations
};

/// The discovery loop.
///
/// Iteration 0 evaluates the initial program. Each later iteration selects
/// one parent, routes `parallelism` prompts to models by weight, generates
/// and evaluates them concurrently, then stores every generated candidate
/// (invalid ones included) in slot order. A failed generation costs an
/// attempt and stores nothing. The loop stops after max_iterations or at
/// the end of the first iteration whose best meets target_score.
///
/// When `store` already holds a run, the loop resumes after the last
/// completed iteration; a finished run is returned unchanged.
///
/// Throws ConfigError when the evaluator is unusable and RunError when the
/// initial program is invalid and the config does not allow it.
RunReport run_discovery(const RunConfig& config, Provider& provider, const Harness& harness,
                        RunStore& store, const EngineHooks& hooks = {});

}  // namespace discover
