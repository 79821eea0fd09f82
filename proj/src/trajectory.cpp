#include "discover/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "discover/metrics.hpp"
#include "discover/run_store.hpp"
#include "discover/serialize.hpp"

namespace discover {

namespace {

double display(double score, std::optional<double> scale_c) {
  return scale_c ? *scale_c / score : score;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string tick_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

TrajectoryTable build_trajectory(const RunReport& report, const ProgramDatabase& db) {
  TrajectoryTable table;
  table.direction = report.direction;
  for (const auto& p : report.best_score_trajectory) {
    if (!db.contains(p.best_id)) {
      throw StorageError("trajectory names candidate " + std::to_string(p.best_id) +
                         " which is not in db.jsonl");
    }
    const Candidate& c = db.get(p.best_id);
    if (!c.is_valid() || c.result->score != p.best_score) {
      throw StorageError("trajectory score for candidate " + std::to_string(p.best_id) +
                         " disagrees with db.jsonl");
    }
    if (!table.rows.empty()) {
      const auto& prev = table.rows.back();
      if (p.iteration <= prev.iteration) {
        throw StorageError("trajectory iterations are not strictly increasing");
      }
      if (better(prev.best_score, p.best_score, report.direction)) {
        throw StorageError("trajectory is not monotone at iteration " +
                           std::to_string(p.iteration));
      }
    }
    table.rows.push_back({p.iteration, p.attempts_cumulative, p.best_score, p.best_id});
  }
  return table;
}

TrajectoryTable load_trajectory(const std::filesystem::path& run_dir) {
  if (!std::filesystem::is_directory(run_dir)) {
    throw StorageError(run_dir.string() + " is not a directory");
  }
  const ProgramDatabase db = load_database(run_dir);
  const auto report = load_report(run_dir);
  if (!report) throw StorageError("missing report.json in " + run_dir.string());
  return build_trajectory(*report, db);
}

std::string to_csv(const TrajectoryTable& table, std::optional<double> scale_c) {
  std::string out = "iteration,attempts_cumulative,best_score,best_id";
  if (scale_c) out += ",display_score";
  out += '\n';
  for (const auto& r : table.rows) {
    out += std::to_string(r.iteration) + "," + std::to_string(r.attempts_cumulative) + "," +
           format_double(r.best_score) + "," + std::to_string(r.best_id);
    if (scale_c) out += "," + format_double(display(r.best_score, scale_c));
    out += '\n';
  }
  return out;
}

std::string to_svg(const TrajectoryTable& table, std::optional<double> scale_c) {
  constexpr double kWidth = 640;
  constexpr double kHeight = 400;
  constexpr double kLeft = 80;
  constexpr double kRight = 20;
  constexpr double kTop = 30;
  constexpr double kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double x_max = 1;
  double y_min = 0;
  double y_max = 1;
  if (!table.rows.empty()) {
    x_max = std::max<double>(1.0, static_cast<double>(table.rows.back().iteration));
    y_min = y_max = display(table.rows.front().best_score, scale_c);
    for (const auto& r : table.rows) {
      const double y = display(r.best_score, scale_c);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
    if (y_max == y_min) {
      const double pad = std::abs(y_max) > 0 ? std::abs(y_max) * 0.05 : 1.0;
      y_min -= pad;
      y_max += pad;
    }
  }
  const auto px = [&](double x) { return kLeft + x / x_max * plot_w; };
  const auto py = [&](double y) { return kTop + (y_max - y) / (y_max - y_min) * plot_h; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
         "viewBox=\"0 0 640 400\">\n";
  svg += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  svg += "<text x=\"320\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">Best program found</text>\n";
  // Axes.
  svg += "<line x1=\"" + fixed(kLeft, 1) + "\" y1=\"" + fixed(kTop + plot_h, 1) + "\" x2=\"" +
         fixed(kLeft + plot_w, 1) + "\" y2=\"" + fixed(kTop + plot_h, 1) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fixed(kLeft, 1) + "\" y1=\"" + fixed(kTop, 1) + "\" x2=\"" +
         fixed(kLeft, 1) + "\" y2=\"" + fixed(kTop + plot_h, 1) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double yv = y_min + (y_max - y_min) * i / 4.0;
    const double xv = x_max * i / 4.0;
    svg += "<text x=\"" + fixed(kLeft - 6, 1) + "\" y=\"" + fixed(py(yv) + 4, 1) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" +
           tick_label(yv) + "</text>\n";
    svg += "<text x=\"" + fixed(px(xv), 1) + "\" y=\"" + fixed(kTop + plot_h + 16, 1) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
           tick_label(xv) + "</text>\n";
  }
  svg += "<text x=\"" + fixed(kLeft + plot_w / 2, 1) + "\" y=\"" + fixed(kHeight - 10, 1) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">iteration</text>\n";
  svg += "<text x=\"16\" y=\"" + fixed(kTop + plot_h / 2, 1) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 16 " +
         fixed(kTop + plot_h / 2, 1) + ")\">" +
         (scale_c ? "normalized score (" + format_double(*scale_c) + "/score)"
                  : std::string("best score")) +
         "</text>\n";
  if (!table.rows.empty()) {
    // Step line: best-so-far holds until the next improvement.
    std::string points;
    double prev_y = 0;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const double x = px(static_cast<double>(table.rows[i].iteration));
      const double y = py(display(table.rows[i].best_score, scale_c));
      if (i > 0) points += fixed(x, 2) + "," + fixed(prev_y, 2) + " ";
      points += fixed(x, 2) + "," + fixed(y, 2) + " ";
      prev_y = y;
    }
    points.pop_back();
    svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"" + points +
           "\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

ThresholdComparison compare_runs(const TrajectoryTable& a, const TrajectoryTable& b,
                                 double threshold) {
  if (a.direction != b.direction) {
    throw std::invalid_argument("runs optimize in different directions");
  }
  const auto points = [](const TrajectoryTable& t) {
    std::vector<TrajectoryPoint> out;
    for (const auto& r : t.rows) {
      out.push_back({r.iteration, r.best_score, r.best_id, r.attempts_cumulative});
    }
    return out;
  };
  ThresholdComparison cmp;
  cmp.iterations_a = iterations_to_threshold(points(a), threshold, a.direction);
  cmp.iterations_b = iterations_to_threshold(points(b), threshold, b.direction);
  if (cmp.iterations_a && cmp.iterations_b && *cmp.iterations_a >= 1 && *cmp.iterations_b >= 1) {
    cmp.speedup = compute_speedup(static_cast<double>(*cmp.iterations_a),
                                  static_cast<double>(*cmp.iterations_b));
  }
  return cmp;
}

}  // namespace discover
