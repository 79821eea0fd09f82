#include "discover/database.hpp"

#include <algorithm>
#include <string>

namespace discover {

CandidateId ProgramDatabase::insert(Candidate candidate) {
  if (candidate.parent_id && !contains(*candidate.parent_id)) {
    throw LineageError("parent " + std::to_string(*candidate.parent_id) +
                       " is not in the database");
  }
  if (!candidates_.empty() && candidate.iteration < candidates_.back().iteration) {
    throw LineageError("iteration " + std::to_string(candidate.iteration) +
                       " precedes the last stored iteration " +
                       std::to_string(candidates_.back().iteration));
  }
  candidate.id = candidates_.size();
  candidates_.push_back(std::move(candidate));
  return candidates_.back().id;
}

const Candidate& ProgramDatabase::get(CandidateId id) const {
  if (!contains(id)) {
    throw NotFoundError("unknown candidate id " + std::to_string(id));
  }
  return candidates_[id];
}

const Candidate& ProgramDatabase::best(Direction direction) const {
  const Candidate* winner = nullptr;
  for (const auto& c : candidates_) {
    if (!c.is_valid()) continue;
    if (winner == nullptr || better(c.result->score, winner->result->score, direction)) {
      winner = &c;
    }
  }
  if (winner == nullptr) {
    throw EmptyResultError("database holds no valid candidate");
  }
  return *winner;
}

std::vector<const Candidate*> ProgramDatabase::top(Direction direction,
                                                   std::size_t limit) const {
  std::vector<const Candidate*> valid;
  for (const auto& c : candidates_) {
    if (c.is_valid()) valid.push_back(&c);
  }
  std::stable_sort(valid.begin(), valid.end(), [direction](const Candidate* a, const Candidate* b) {
    return better(a->result->score, b->result->score, direction);
  });
  if (valid.size() > limit) valid.resize(limit);
  return valid;
}

std::vector<Candidate> ProgramDatabase::lineage(CandidateId id) const {
  std::vector<Candidate> chain;
  const Candidate* cur = &get(id);
  chain.push_back(*cur);
  while (cur->parent_id) {
    cur = &candidates_[*cur->parent_id];
    chain.push_back(*cur);
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

std::size_t ProgramDatabase::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(candidates_.begin(), candidates_.end(),
                    [](const Candidate& c) { return c.is_valid(); }));
}

}  // namespace discover
