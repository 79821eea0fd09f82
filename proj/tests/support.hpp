#pragma once

#include <stdlib.h>
#include <sys/stat.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "discover/tasks/packing.hpp"

namespace discover::testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string pattern = (std::filesystem::temp_directory_path() / "discover-test-XXXXXX").string();
    if (::mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::filesystem::path write_script(const std::filesystem::path& p, const std::string& body) {
  write_text(p, "#!/bin/sh\n" + body);
  ::chmod(p.c_str(), 0755);
  return p;
}

/// Feasible random packing with slack: circles are placed by rejection so
/// that every constraint holds with margin >= 1e-6.
inline tasks::Packing random_feasible_packing(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  tasks::Packing p;
  while (p.circles.size() < n) {
    tasks::Circle c{unit(rng), unit(rng), 0.0};
    double room = std::min({c.x, 1.0 - c.x, c.y, 1.0 - c.y});
    for (const auto& o : p.circles) {
      room = std::min(room, std::hypot(c.x - o.x, c.y - o.y) - o.r);
    }
    if (room <= 2e-6) continue;
    c.r = (room - 1e-6) * unit(rng);
    p.circles.push_back(c);
  }
  return p;
}

inline std::string inscribed_circle_program() { return "packing n=1\n0.5 0.5 0.5\n"; }

/// 5x5 grid of radius-0.08 circles plus one small circle in a gap: feasible
/// with slack, sum of radii 2.02.
inline std::string grid26_program() {
  std::string s = "packing n=26\n";
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      s += std::to_string(0.1 + 0.2 * i) + " " + std::to_string(0.1 + 0.2 * j) + " 0.08\n";
    }
  }
  s += "0.2 0.2 0.02\n";
  return s;
}

}  // namespace discover::testing
