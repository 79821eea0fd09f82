#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace discover::tasks::detail {

// Whitespace tokenizer over the builtin candidate formats.
class Tokens {
 public:
  explicit Tokens(std::string_view text) : text_(text) {}

  bool next(std::string_view& token);
  double next_double(const char* what);

  /// Reads a header line `<keyword> <key>=<count>`.
  std::size_t header(std::string_view keyword, std::string_view key);

  void expect_end();

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace discover::tasks::detail
