#pragma once

#include <filesystem>
#include <fstream>
#include <optional>

#include "discover/config.hpp"
#include "discover/database.hpp"

namespace discover {

// On-disk layout of one run:
//
//   <dir>/config.json        normalized RunConfig
//   <dir>/db.jsonl           one record per candidate, append-only
//   <dir>/programs/<id>.txt  program text of candidate <id>
//   <dir>/report.json        latest RunReport (rewritten atomically)
//
// The program file is written before its db.jsonl line, so every record
// that made it to disk has its program.
class RunStore {
 public:
  /// Creates a fresh run directory; fails if `dir` already holds a db.jsonl.
  static RunStore create(const std::filesystem::path& dir, const RunConfig& config);

  /// Opens an existing run directory for appending.
  static RunStore open(const std::filesystem::path& dir);

  const std::filesystem::path& dir() const { return dir_; }

  void append(const Candidate& candidate);
  void write_report(const RunReport& report);

  /// Drops every record whose iteration exceeds `last_iteration` and rewrites
  /// db.jsonl. Used when resuming after an interrupted iteration.
  void truncate_after(std::uint64_t last_iteration);

 private:
  explicit RunStore(std::filesystem::path dir);
  void reopen_log();

  std::filesystem::path dir_;
  std::ofstream log_;
};

/// Rebuilds the database (programs included) from a run directory.
ProgramDatabase load_database(const std::filesystem::path& dir);

std::optional<RunReport> load_report(const std::filesystem::path& dir);

RunConfig load_stored_config(const std::filesystem::path& dir);

/// Writes `text` to `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

std::string read_file(const std::filesystem::path& path);

}  // namespace discover
