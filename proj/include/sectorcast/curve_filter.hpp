#pragma once

// Rejects anomalous daily count curves before training. A linear trend is
// fit through each curve's mean over a short reference window (noon quarter
// hour by default) against day index; curves whose summed absolute deviation
// from that trend stands out are dropped.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "sector_counts.hpp"
#include "time.hpp"

namespace sectorcast {

struct TooFewCurves : std::runtime_error {
  explicit TooFewCurves(std::size_t n)
      : std::runtime_error("trend needs at least 2 curves, got " + std::to_string(n)) {}
};

struct EmptyWindow : std::runtime_error {
  EmptyWindow(int begin, int end)
      : std::runtime_error("empty reference window [" + std::to_string(begin) + ", " +
                           std::to_string(end) + ")") {}
};

// Half-open minute-of-day range.
struct MinuteWindow {
  int begin = 720;
  int end = 735;

  int length() const { return end - begin; }
  void validate() const {
    if (begin < 0 || end > kMinutesPerDay || begin >= end) throw EmptyWindow(begin, end);
  }
};

struct DailyCurve {
  std::string sector;
  UtcDate day;
  Weekday weekday = Weekday::Mon;  // weekday_of(day)
  std::array<int, kMinutesPerDay> values{};

  static DailyCurve from_series(const SectorCountSeries& s) {
    DailyCurve c;
    c.sector = s.sector;
    c.day = s.day;
    c.weekday = weekday_of(s.day);
    for (int m = 0; m < kMinutesPerDay; ++m)
      c.values[static_cast<std::size_t>(m)] = s.count_at(m);
    return c;
  }

  double window_mean(MinuteWindow w) const {
    w.validate();
    long sum = 0;
    for (int m = w.begin; m < w.end; ++m) sum += values[static_cast<std::size_t>(m)];
    return static_cast<double>(sum) / w.length();
  }
};

struct LinearTrend {
  double slope = 0;
  double intercept = 0;

  double at(int day_index) const { return intercept + slope * day_index; }
};

namespace filterdetail {

inline void require_group(const std::vector<DailyCurve>& curves) {
  if (curves.size() < 2) throw TooFewCurves(curves.size());
  for (const DailyCurve& c : curves)
    if (c.sector != curves.front().sector || c.weekday != curves.front().weekday)
      throw std::invalid_argument("trend group mixes sectors or weekdays");
}

// Input index -> rank when ordered by day (stable for equal days).
inline std::vector<int> day_ranks(const std::vector<DailyCurve>& curves) {
  std::vector<std::size_t> order(curves.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return day_start(curves[a].day) < day_start(curves[b].day);
  });
  std::vector<int> rank(curves.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = static_cast<int>(r);
  return rank;
}

}  // namespace filterdetail

// Least-squares line through per-curve window means against day index.
// Curves are ordered by day internally, so input order does not matter.
inline LinearTrend fit_reference_trend(const std::vector<DailyCurve>& curves,
                                       MinuteWindow window = {}) {
  window.validate();
  filterdetail::require_group(curves);
  std::vector<int> rank = filterdetail::day_ranks(curves);

  const double n = static_cast<double>(curves.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    double x = rank[i];
    double y = curves[i].window_mean(window);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double denom = n * sxx - sx * sx;  // zero only if every day index coincides
  LinearTrend t;
  if (denom != 0) t.slope = (n * sxy - sx * sy) / denom;
  t.intercept = (sy - t.slope * sx) / n;
  return t;
}

// Summed absolute deviation of the window samples from the trend level at
// this curve's day index.
inline double score_curve(const DailyCurve& curve, const LinearTrend& trend, int day_index,
                          MinuteWindow window = {}) {
  window.validate();
  double level = trend.at(day_index);
  double score = 0;
  for (int m = window.begin; m < window.end; ++m)
    score += std::abs(curve.values[static_cast<std::size_t>(m)] - level);
  return score;
}

struct RejectionResult {
  LinearTrend trend;
  std::vector<double> raw_scores;        // per input curve
  std::vector<double> scores;            // normalized so the maximum is 1
  double threshold = 0;                  // mean of normalized scores
  std::set<std::size_t> rejected;        // input indices with score strictly above threshold
  std::vector<std::size_t> accepted;     // remaining input indices, ascending
};

inline RejectionResult reject_outliers(const std::vector<DailyCurve>& curves,
                                       MinuteWindow window = {}) {
  window.validate();
  filterdetail::require_group(curves);
  std::vector<int> rank = filterdetail::day_ranks(curves);

  RejectionResult result;
  result.trend = fit_reference_trend(curves, window);
  result.raw_scores.reserve(curves.size());
  for (std::size_t i = 0; i < curves.size(); ++i)
    result.raw_scores.push_back(score_curve(curves[i], result.trend, rank[i], window));

  double max_score = *std::max_element(result.raw_scores.begin(), result.raw_scores.end());
  result.scores.reserve(curves.size());
  for (double s : result.raw_scores)
    result.scores.push_back(max_score > 0 ? s / max_score : 0.0);
  result.threshold = std::accumulate(result.scores.begin(), result.scores.end(), 0.0) /
                     static_cast<double>(curves.size());
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (result.scores[i] > result.threshold)
      result.rejected.insert(i);
    else
      result.accepted.push_back(i);
  }
  return result;
}

}  // namespace sectorcast
