#include "discover/run_store.hpp"

#include <sstream>
#include <string>
#include <vector>

#include "discover/serialize.hpp"

namespace discover {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kConfigFile = "config.json";
constexpr std::string_view kDbFile = "db.jsonl";
constexpr std::string_view kReportFile = "report.json";
constexpr std::string_view kProgramsDir = "programs";

fs::path program_path(const fs::path& dir, CandidateId id) {
  return dir / kProgramsDir / (std::to_string(id) + ".txt");
}

std::vector<Json> read_records(const fs::path& dir) {
  const fs::path db = dir / kDbFile;
  std::ifstream in(db);
  if (!in) {
    throw StorageError("cannot open " + db.string());
  }
  std::vector<Json> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      records.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw StorageError(db.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw StorageError("cannot read " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw StorageError("cannot write " + tmp.string());
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out.flush()) {
      throw StorageError("short write to " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

RunStore::RunStore(fs::path dir) : dir_(std::move(dir)) {}

void RunStore::reopen_log() {
  log_ = std::ofstream(dir_ / kDbFile, std::ios::binary | std::ios::app);
  if (!log_) {
    throw StorageError("cannot open " + (dir_ / kDbFile).string() + " for append");
  }
}

RunStore RunStore::create(const fs::path& dir, const RunConfig& config) {
  if (fs::exists(dir / kDbFile)) {
    throw StorageError(dir.string() + " already contains a run");
  }
  fs::create_directories(dir / kProgramsDir);
  write_file_atomic(dir / kConfigFile, dump_run_config(config));
  RunStore store(dir);
  store.reopen_log();
  return store;
}

RunStore RunStore::open(const fs::path& dir) {
  if (!fs::exists(dir / kDbFile)) {
    throw StorageError(dir.string() + " is not a run directory (no db.jsonl)");
  }
  fs::create_directories(dir / kProgramsDir);
  RunStore store(dir);
  store.reopen_log();
  return store;
}

void RunStore::append(const Candidate& candidate) {
  write_file_atomic(program_path(dir_, candidate.id), candidate.program);
  log_ << to_json_record(candidate).dump() << '\n';
  log_.flush();
  if (!log_) {
    throw StorageError("append to db.jsonl failed");
  }
}

void RunStore::write_report(const RunReport& report) {
  write_file_atomic(dir_ / kReportFile, to_json(report).dump(2) + "\n");
}

void RunStore::truncate_after(std::uint64_t last_iteration) {
  log_.close();
  std::string kept;
  for (const auto& record : read_records(dir_)) {
    if (record.at("iteration").get<std::uint64_t>() > last_iteration) {
      fs::remove(program_path(dir_, record.at("id").get<CandidateId>()));
      continue;
    }
    kept += record.dump();
    kept += '\n';
  }
  write_file_atomic(dir_ / kDbFile, kept);
  reopen_log();
}

ProgramDatabase load_database(const fs::path& dir) {
  ProgramDatabase db;
  for (const auto& record : read_records(dir)) {
    Candidate c;
    try {
      c = candidate_from_record(record);
    } catch (const std::exception& e) {
      throw StorageError("corrupt record in db.jsonl: " + std::string(e.what()));
    }
    c.program = read_file(program_path(dir, c.id));
    const CandidateId expected = c.id;
    if (db.insert(std::move(c)) != expected) {
      throw StorageError("db.jsonl ids are not dense at id " + std::to_string(expected));
    }
  }
  return db;
}

std::optional<RunReport> load_report(const fs::path& dir) {
  const fs::path path = dir / kReportFile;
  if (!fs::exists(path)) return std::nullopt;
  try {
    return run_report_from_json(Json::parse(read_file(path)));
  } catch (const Json::exception& e) {
    throw StorageError("corrupt report.json: " + std::string(e.what()));
  }
}

RunConfig load_stored_config(const fs::path& dir) {
  return parse_run_config(read_file(dir / kConfigFile), dir);
}

}  // namespace discover
