#include "discover/tasks/packing.hpp"

#include <cmath>

#include "discover/serialize.hpp"
#include "discover/tasks/text_format.hpp"

namespace discover::tasks {

namespace {

std::string_view side_name(Side s) {
  switch (s) {
    case Side::left:
      return "left";
    case Side::right:
      return "right";
    case Side::bottom:
      return "bottom";
    case Side::top:
      return "top";
  }
  return "?";
}

std::string summarize(const std::vector<PackingViolation>& v) {
  std::string msg = std::to_string(v.size()) + " violation(s)";
  if (!v.empty()) msg += ", first: " + v.front().describe();
  return msg;
}

}  // namespace

std::string PackingViolation::describe() const {
  if (kind == Kind::boundary) {
    return "circle " + std::to_string(i) + " crosses the " + std::string(side_name(*side)) +
           " edge by " + format_double(amount);
  }
  return "circles " + std::to_string(i) + " and " + std::to_string(*j) + " overlap by " +
         format_double(amount);
}

InfeasiblePacking::InfeasiblePacking(std::vector<PackingViolation> v)
    : ConstraintError("infeasible packing: " + summarize(v)), violations(std::move(v)) {}

std::vector<PackingViolation> validate_packing(const Packing& p, double tol) {
  std::vector<PackingViolation> out;
  const auto& c = p.circles;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto boundary = [&](Side side, double excess) {
      if (excess > tol) {
        out.push_back({PackingViolation::Kind::boundary, i, std::nullopt, side, excess});
      }
    };
    boundary(Side::left, c[i].r - c[i].x);
    boundary(Side::right, c[i].x + c[i].r - 1.0);
    boundary(Side::bottom, c[i].r - c[i].y);
    boundary(Side::top, c[i].y + c[i].r - 1.0);
  }
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      const double dist = std::hypot(c[i].x - c[j].x, c[i].y - c[j].y);
      const double reach = c[i].r + c[j].r;
      if (dist < reach - tol) {
        out.push_back({PackingViolation::Kind::overlap, i, j, std::nullopt, reach - dist});
      }
    }
  }
  return out;
}

double score_packing(const Packing& p, double tol) {
  if (p.circles.empty()) {
    throw ConstraintError("packing has no circles");
  }
  for (const auto& c : p.circles) {
    if (!std::isfinite(c.x) || !std::isfinite(c.y) || !std::isfinite(c.r)) {
      throw ConstraintError("packing has a non-finite coordinate or radius");
    }
    if (c.r < 0) {
      throw ConstraintError("packing has a negative radius");
    }
  }
  if (auto v = validate_packing(p, tol); !v.empty()) {
    throw InfeasiblePacking(std::move(v));
  }
  double sum = 0.0;
  for (const auto& c : p.circles) sum += c.r;
  return sum;
}

Packing parse_packing(std::string_view text) {
  detail::Tokens tokens(text);
  const std::size_t n = tokens.header("packing", "n");
  Packing p;
  p.circles.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Circle c;
    c.x = tokens.next_double("x");
    c.y = tokens.next_double("y");
    c.r = tokens.next_double("r");
    p.circles.push_back(c);
  }
  tokens.expect_end();
  return p;
}

std::string format_packing(const Packing& p) {
  std::string out = "packing n=" + std::to_string(p.size()) + "\n";
  for (const auto& c : p.circles) {
    out += format_double(c.x);
    out += ' ';
    out += format_double(c.y);
    out += ' ';
    out += format_double(c.r);
    out += '\n';
  }
  return out;
}

}  // namespace discover::tasks
