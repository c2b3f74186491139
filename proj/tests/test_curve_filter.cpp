#include "sectorcast/curve_filter.hpp"

#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "sectorcast/rng.hpp"

using namespace sectorcast;

namespace {

// Monday 2018-03-05 plus whole weeks keeps the group on one weekday.
DailyCurve flat_curve(int week, int level) {
  DailyCurve c;
  c.sector = "ZNY01";
  c.day = add_days({2018, 3, 5}, 7 * week);
  c.weekday = weekday_of(c.day);
  c.values.fill(level);
  return c;
}

}  // namespace

TEST_CASE("trend through equal means is the constant line") {
  std::vector<DailyCurve> curves{flat_curve(0, 4), flat_curve(1, 4), flat_curve(2, 4)};
  LinearTrend t = fit_reference_trend(curves);
  REQUIRE(t.slope == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(t.intercept == Catch::Approx(4.0).margin(1e-12));
}

TEST_CASE("trend through means 1,2,3 is slope 1 intercept 1") {
  std::vector<DailyCurve> curves{flat_curve(0, 1), flat_curve(1, 2), flat_curve(2, 3)};
  LinearTrend t = fit_reference_trend(curves);
  REQUIRE(t.slope == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(t.intercept == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(t.at(2) == Catch::Approx(3.0).margin(1e-12));

  // Day order, not input order, defines the index.
  std::vector<DailyCurve> shuffled{curves[2], curves[0], curves[1]};
  LinearTrend t2 = fit_reference_trend(shuffled);
  REQUIRE(t2.slope == Catch::Approx(t.slope).margin(1e-12));
  REQUIRE(t2.intercept == Catch::Approx(t.intercept).margin(1e-12));
}

TEST_CASE("fitting fewer than two curves fails") {
  REQUIRE_THROWS_AS(fit_reference_trend({}), TooFewCurves);
  REQUIRE_THROWS_AS(fit_reference_trend({flat_curve(0, 1)}), TooFewCurves);
}

TEST_CASE("degenerate windows fail") {
  std::vector<DailyCurve> curves{flat_curve(0, 1), flat_curve(1, 2)};
  REQUIRE_THROWS_AS(fit_reference_trend(curves, {100, 100}), EmptyWindow);
  REQUIRE_THROWS_AS(fit_reference_trend(curves, {735, 720}), EmptyWindow);
  REQUIRE_THROWS_AS(fit_reference_trend(curves, {-1, 10}), EmptyWindow);
  REQUIRE_THROWS_AS(fit_reference_trend(curves, {1430, 1441}), EmptyWindow);
  REQUIRE_NOTHROW(fit_reference_trend(curves, {1430, 1440}));
}

TEST_CASE("mixed groups are a caller bug") {
  DailyCurve other = flat_curve(1, 2);
  other.sector = "ZNY02";
  REQUIRE_THROWS_AS(fit_reference_trend({flat_curve(0, 1), other}), std::invalid_argument);
  DailyCurve tuesday = flat_curve(1, 2);
  tuesday.day = add_days(tuesday.day, 1);
  tuesday.weekday = weekday_of(tuesday.day);
  REQUIRE_THROWS_AS(fit_reference_trend({flat_curve(0, 1), tuesday}), std::invalid_argument);
}

TEST_CASE("a curve on the trend scores zero and a flat offset scores its area") {
  std::vector<DailyCurve> curves{flat_curve(0, 4), flat_curve(1, 4)};
  LinearTrend t = fit_reference_trend(curves);
  REQUIRE(score_curve(curves[0], t, 0) == Catch::Approx(0.0).margin(1e-12));

  // +2 over the default 15-minute window: 15 * 2 = 30.
  DailyCurve off = flat_curve(2, 6);
  REQUIRE(score_curve(off, t, 2) == Catch::Approx(30.0).margin(1e-12));
}

TEST_CASE("score equals an independent re-summation on a random curve") {
  SplitMix64 rng(0xC0FFEEull);
  DailyCurve c = flat_curve(0, 0);
  for (auto& v : c.values) v = static_cast<int>(rng.next_below(12));
  LinearTrend t{0.37, 2.25};
  MinuteWindow w{600, 660};

  double expected = 0;
  for (int m = w.begin; m < w.end; ++m) {
    double level = t.intercept + t.slope * 5;
    expected += std::fabs(static_cast<double>(c.values[static_cast<std::size_t>(m)]) - level);
  }
  REQUIRE(score_curve(c, t, 5, w) == Catch::Approx(expected).margin(1e-9));
}

TEST_CASE("identical curves reject nothing") {
  std::vector<DailyCurve> curves;
  for (int i = 0; i < 8; ++i) curves.push_back(flat_curve(i, 5));
  RejectionResult r = reject_outliers(curves);
  REQUIRE(r.rejected.empty());
  REQUIRE(r.accepted.size() == 8);
  for (double s : r.scores) REQUIRE(s == 0.0);
  REQUIRE(r.threshold == 0.0);
}

TEST_CASE("one shifted curve among twenty is rejected alone") {
  // The shifted curve sits near the middle of the day range so the fitted
  // slope stays tiny (25/665). Hand computation: every inlier deviation is
  // negative, so their summed magnitude equals the outlier's residual and
  // the threshold lands at exactly 2/20 = 0.1, while the worst inlier
  // normalizes to 2.857/47.481 = 0.060. An outlier at the edge of the range
  // tilts the trend enough to take the opposite edge with it; that is a
  // property of the scheme, not a bug.
  std::vector<DailyCurve> curves;
  for (int i = 0; i < 20; ++i) curves.push_back(flat_curve(i, i == 10 ? 54 : 4));
  RejectionResult r = reject_outliers(curves);
  REQUIRE(r.rejected == std::set<std::size_t>{10});
  REQUIRE(r.accepted.size() == 19);
  REQUIRE(r.scores[10] == 1.0);
  REQUIRE(r.threshold == Catch::Approx(0.1).margin(1e-9));
}

TEST_CASE("four symmetric outliers among twenty carry frozen scores") {
  // Outliers at day indices 2, 7, 12, 17. These sum to 38 = 4 * 9.5, the
  // balance point of indices 0..19, so the fitted slope is exactly zero and
  // the intercept is the global mean 4 + 50 * 4/20 = 14.
  // Raw scores: inlier 15 * 10 = 150, outlier 15 * 40 = 600.
  // Normalized: 0.25 and 1. Threshold: (16 * 0.25 + 4 * 1) / 20 = 0.4.
  std::set<std::size_t> shifted{2, 7, 12, 17};
  std::vector<DailyCurve> curves;
  for (int i = 0; i < 20; ++i)
    curves.push_back(flat_curve(i, shifted.count(static_cast<std::size_t>(i)) ? 54 : 4));

  RejectionResult r = reject_outliers(curves);
  REQUIRE(r.trend.slope == Catch::Approx(0.0).margin(1e-9));
  REQUIRE(r.trend.intercept == Catch::Approx(14.0).margin(1e-9));
  for (std::size_t i = 0; i < 20; ++i) {
    INFO("curve " << i);
    double want_raw = shifted.count(i) ? 600.0 : 150.0;
    REQUIRE(r.raw_scores[i] == Catch::Approx(want_raw).margin(1e-9));
    REQUIRE(r.scores[i] == Catch::Approx(shifted.count(i) ? 1.0 : 0.25).margin(1e-12));
  }
  REQUIRE(r.threshold == Catch::Approx(0.4).margin(1e-12));
  REQUIRE(r.rejected == shifted);
}

TEST_CASE("rejection is scale free") {
  SplitMix64 rng(0xABCDull);
  std::vector<DailyCurve> curves;
  for (int i = 0; i < 12; ++i) {
    DailyCurve c = flat_curve(i, 0);
    int base = 3 + static_cast<int>(rng.next_below(4));
    for (auto& v : c.values) v = base + static_cast<int>(rng.next_below(3));
    curves.push_back(std::move(c));
  }
  curves[4].values.fill(60);  // a clear outlier

  RejectionResult plain = reject_outliers(curves);
  std::vector<DailyCurve> scaled = curves;
  for (DailyCurve& c : scaled)
    for (auto& v : c.values) v *= 7;
  RejectionResult big = reject_outliers(scaled);
  REQUIRE(plain.rejected == big.rejected);
  REQUIRE(plain.rejected.count(4) == 1);
}

TEST_CASE("at least one curve always survives") {
  SplitMix64 rng(0x5EEDull);
  for (int round = 0; round < 25; ++round) {
    std::vector<DailyCurve> curves;
    int n = 2 + static_cast<int>(rng.next_below(9));
    for (int i = 0; i < n; ++i) {
      DailyCurve c = flat_curve(i, 0);
      for (auto& v : c.values) v = static_cast<int>(rng.next_below(40));
      curves.push_back(std::move(c));
    }
    RejectionResult r = reject_outliers(curves);
    REQUIRE_FALSE(r.accepted.empty());
    REQUIRE(r.accepted.size() + r.rejected.size() == curves.size());
  }
}

TEST_CASE("permuting input permutes ids but not membership") {
  SplitMix64 rng(0x9999ull);
  std::vector<DailyCurve> curves;
  for (int i = 0; i < 10; ++i) {
    DailyCurve c = flat_curve(i, 0);
    for (auto& v : c.values) v = static_cast<int>(rng.next_below(6));
    curves.push_back(std::move(c));
  }
  curves[7].values.fill(80);

  RejectionResult before = reject_outliers(curves);

  // Rotate by 3: new index j holds old index (j + 3) % 10.
  std::vector<DailyCurve> rotated;
  for (int j = 0; j < 10; ++j) rotated.push_back(curves[static_cast<std::size_t>((j + 3) % 10)]);
  RejectionResult after = reject_outliers(rotated);

  std::set<std::string> days_before, days_after;
  for (std::size_t i : before.rejected) days_before.insert(format_date(curves[i].day));
  for (std::size_t j : after.rejected) days_after.insert(format_date(rotated[j].day));
  REQUIRE(days_before == days_after);
  REQUIRE(before.threshold == Catch::Approx(after.threshold).margin(1e-12));
}

TEST_CASE("curves derive from count series") {
  SectorCountSeries s;
  s.sector = "ZDC12";
  s.day = {2018, 3, 7};
  s.add(100, "AAL1", UncertaintyLevel::Consistent);
  s.add(100, "UAL2", UncertaintyLevel::Consistent);
  s.add(101, "UAL2", UncertaintyLevel::Consistent);

  DailyCurve c = DailyCurve::from_series(s);
  REQUIRE(c.sector == "ZDC12");
  REQUIRE(c.weekday == Weekday::Wed);  // 2018-03-07
  REQUIRE(c.values[100] == 2);
  REQUIRE(c.values[101] == 1);
  REQUIRE(c.values[102] == 0);
}
