#include "discover/tasks/text_format.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "discover/types.hpp"

namespace discover::tasks::detail {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

}  // namespace

bool Tokens::next(std::string_view& token) {
  while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  if (pos_ == text_.size()) return false;
  const std::size_t start = pos_;
  while (pos_ < text_.size() && !is_space(text_[pos_])) ++pos_;
  token = text_.substr(start, pos_ - start);
  return true;
}

double Tokens::next_double(const char* what) {
  std::string_view tok;
  if (!next(tok)) {
    throw FormatError(std::string("unexpected end of input reading ") + what);
  }
  const char* first = tok.data();
  if (*first == '+') ++first;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw FormatError(std::string("bad number '") + std::string(tok) + "' for " + what);
  }
  if (!std::isfinite(v)) {
    throw FormatError(std::string("non-finite ") + what);
  }
  return v;
}

std::size_t Tokens::header(std::string_view keyword, std::string_view key) {
  std::string_view tok;
  if (!next(tok) || tok != keyword) {
    throw FormatError("expected header '" + std::string(keyword) + " " + std::string(key) +
                      "=<count>'");
  }
  if (!next(tok) || tok.substr(0, key.size() + 1) != std::string(key) + "=") {
    throw FormatError("expected '" + std::string(key) + "=<count>' after '" +
                      std::string(keyword) + "'");
  }
  const auto digits = tok.substr(key.size() + 1);
  std::size_t count = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), count);
  if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size()) {
    throw FormatError("bad count '" + std::string(digits) + "'");
  }
  return count;
}

void Tokens::expect_end() {
  std::string_view tok;
  if (next(tok)) {
    throw FormatError("trailing data starting at '" + std::string(tok) + "'");
  }
}

}  // namespace discover::tasks::detail
