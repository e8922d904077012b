#include "roaddbn/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <tuple>

#include "roaddbn/errors.hpp"

namespace roaddbn {

std::vector<Point> resample(const RoadGraph& graph, double spacing) {
  if (!(spacing > 0.0)) throw ArgumentError("resampling spacing must be positive");
  std::vector<Point> points = graph.vertices();
  for (const auto& [ia, ib] : graph.edges()) {
    const Point& a = graph.vertex(ia);
    const Point& b = graph.vertex(ib);
    const auto pieces = static_cast<long>(std::ceil(distance(a, b) / spacing - 1e-9));
    for (long k = 1; k < pieces; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(pieces);
      points.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
  }
  return points;
}

MatchResult match_points(const std::vector<Point>& pred, const std::vector<Point>& truth, double radius) {
  if (!(radius > 0.0)) throw ArgumentError("match radius must be positive");
  std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    for (std::size_t t = 0; t < truth.size(); ++t) {
      const double d = distance(pred[p], truth[t]);
      if (d <= radius) candidates.emplace_back(d, p, t);
    }
  }
  std::sort(candidates.begin(), candidates.end());

  MatchResult result;
  result.radius = radius;
  std::vector<bool> pred_used(pred.size(), false);
  std::vector<bool> truth_used(truth.size(), false);
  for (const auto& [d, p, t] : candidates) {
    if (pred_used[p] || truth_used[t]) continue;
    pred_used[p] = truth_used[t] = true;
    result.pairs.emplace_back(p, t);
  }
  result.tp = result.pairs.size();
  result.fp = pred.size() - result.tp;
  result.fn = truth.size() - result.tp;
  return result;
}

MatchResult match_vertices(const RoadGraph& pred, const RoadGraph& truth, double radius, double spacing) {
  return match_points(resample(pred, spacing), resample(truth, spacing), radius);
}

double precision(const MatchResult& match) {
  const std::size_t total = match.tp + match.fp;
  return total == 0 ? 1.0 : static_cast<double>(match.tp) / static_cast<double>(total);
}

double recall(const MatchResult& match) {
  const std::size_t total = match.tp + match.fn;
  return total == 0 ? 1.0 : static_cast<double>(match.tp) / static_cast<double>(total);
}

namespace {

std::string percent(double ratio) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.1f%%", 100.0 * ratio);
  return buffer;
}

std::string minutes(double seconds) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.1f", seconds / 60.0);
  return buffer;
}

}  // namespace

std::string report_table(const std::vector<EvalRun>& runs) {
  std::vector<std::vector<std::string>> rows{{"Model", "Precision", "Recall", "Time(minutes)"}};
  for (const auto& run : runs) {
    rows.push_back({run.label, percent(precision(run.match)), percent(recall(run.match)), minutes(run.seconds)});
  }
  std::vector<std::size_t> widths(4, 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < 4; ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  std::ostringstream out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      const std::string& cell = rows[r][c];
      const std::string pad(widths[c] - cell.size(), ' ');
      if (c > 0) out << " | ";
      out << (c == 0 ? cell + pad : pad + cell);
    }
    out << '\n';
    if (r == 0) {
      for (std::size_t c = 0; c < 4; ++c) {
        if (c > 0) out << "-|-";
        out << std::string(widths[c], '-');
      }
      out << '\n';
    }
  }
  return out.str();
}

std::string report_dsv(const std::vector<EvalRun>& runs, char delimiter) {
  std::ostringstream out;
  out << "Model" << delimiter << "Precision" << delimiter << "Recall" << delimiter << "Time(minutes)"
      << delimiter << "TP" << delimiter << "FP" << delimiter << "FN" << '\n';
  for (const auto& run : runs) {
    out << run.label << delimiter << percent(precision(run.match)) << delimiter << percent(recall(run.match))
        << delimiter << minutes(run.seconds) << delimiter << run.match.tp << delimiter << run.match.fp
        << delimiter << run.match.fn << '\n';
  }
  return out.str();
}

}  // namespace roaddbn
