#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "discover/types.hpp"

namespace discover {

// Append-only store of every candidate produced during a run.
//
// Ids are dense and equal to insertion order, so `id < other.id` means
// "inserted earlier". A parent must already be stored when its child is
// inserted, which makes every lineage a strictly increasing id chain.
//
// Not internally synchronized: one owner mutates, readers may share a const
// reference between mutations.
class ProgramDatabase {
 public:
  ProgramDatabase() = default;

  /// Stores `candidate`, overwriting its id with the next dense id.
  /// Throws LineageError if parent_id names a candidate not yet stored.
  CandidateId insert(Candidate candidate);

  const Candidate& get(CandidateId id) const;
  bool contains(CandidateId id) const { return id < candidates_.size(); }

  std::size_t size() const { return candidates_.size(); }
  bool empty() const { return candidates_.empty(); }

  std::span<const Candidate> all() const { return candidates_; }

  /// Valid candidate with the extremal score; earliest insertion wins ties.
  /// Throws EmptyResultError when no candidate is valid.
  const Candidate& best(Direction direction) const;

  /// Valid candidates ordered best-first (stable on insertion order), at most `limit`.
  std::vector<const Candidate*> top(Direction direction, std::size_t limit) const;

  /// Root-to-`id` chain following parent links.
  std::vector<Candidate> lineage(CandidateId id) const;

  std::size_t valid_count() const;

 private:
  std::vector<Candidate> candidates_;
};

}  // namespace discover
