#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "sectorcast/model_store.hpp"
#include "sectorcast/pi_store.hpp"
#include "sectorcast/training.hpp"
#include "sectorcast/weather.hpp"
#include "test_helpers.hpp"

using namespace sectorcast;
using testutil::ScratchDir;

namespace {

// Constant-count series: `count` distinct flights occupy every minute.
SectorCountSeries make_series(const std::string& sector, UtcDate day, int count,
                              UncertaintyLevel level = UncertaintyLevel::Consistent) {
  SectorCountSeries s;
  s.sector = sector;
  s.day = day;
  for (int m = 0; m < kMinutesPerDay; ++m) {
    for (int i = 0; i < count; ++i) s.add(m, "F" + std::to_string(i), level);
  }
  return s;
}

TrainingConfig quick_config(int learners = 8) {
  TrainingConfig cfg;
  cfg.boost.n_learners = learners;
  cfg.boost.tree.max_depth = 2;
  cfg.created_at = require_timestamp("2018-03-20T00:00:00Z");
  return cfg;
}

}  // namespace

TEST_CASE("ten sectors over fourteen days yield ten stored models") {
  ScratchDir scratch("train_ten");
  PiStore pi(scratch.path());
  ModelStore store(scratch.path());
  UtcDate from{2018, 3, 1};
  UtcDate to{2018, 3, 14};
  std::vector<std::string> sectors;
  for (int i = 1; i <= 10; ++i) {
    char name[8];
    std::snprintf(name, sizeof name, "S%02d", i);
    sectors.emplace_back(name);
  }
  for (UtcDate d = from; day_start(d) <= day_start(to); d = add_days(d, 1)) {
    std::map<std::string, SectorCountSeries> day;
    for (std::size_t i = 0; i < sectors.size(); ++i) {
      day.emplace(sectors[i], make_series(sectors[i], d, 1 + static_cast<int>(i % 4)));
    }
    pi.write_dms_b(d, day);
  }

  TrainingConfig cfg = quick_config();
  TrainingReport report = train_all_sectors(pi, store, from, to, cfg);

  REQUIRE(report.sectors.size() == 10);
  CHECK(report.total_duration_s > 0.0);
  for (std::size_t i = 0; i < report.sectors.size(); ++i) {
    const SectorTrainingOutcome& out = report.sectors[i];
    INFO(out.sector << ": " << out.error);
    CHECK(out.sector == sectors[i]);
    CHECK(out.ok());
    CHECK(out.model_id == 1);
    CHECK(out.curves_total == 14);
    CHECK(out.curves_accepted == 14);
    CHECK(out.sample_count == 14u * kMinutesPerDay);
    CHECK(out.duration_s >= 0.0);
  }
  CHECK(store.sectors() == sectors);

  // Constant target: f0 is the constant, every tree degenerates to a zero
  // leaf, so the stored model reproduces the count exactly.
  StoredModel s03 = store.load_active("S03");
  CHECK(s03.trained_through == to);
  CHECK(s03.created_at == cfg.created_at);
  REQUIRE(s03.mse_trace.size() == 8);
  for (double e : s03.mse_trace) CHECK(e == 0.0);
  std::vector<double> x =
      encode_features(cfg.schema, require_timestamp("2018-03-07T12:00:00Z"), std::nullopt, 1);
  CHECK(s03.model.predict(x).count == Catch::Approx(3.0).margin(1e-12));
}

TEST_CASE("empty day range reports zero sectors and writes nothing") {
  ScratchDir scratch("train_empty");
  PiStore pi(scratch.path());
  ModelStore store(scratch.path());
  TrainingReport report =
      train_all_sectors(pi, store, UtcDate{2018, 3, 10}, UtcDate{2018, 3, 9}, quick_config());
  CHECK(report.sectors.empty());
  CHECK(report.total_duration_s >= 0.0);
  CHECK(store.sectors().empty());
}

TEST_CASE("rerun over the same range replaces models and keeps priors") {
  ScratchDir scratch("train_rerun");
  PiStore pi(scratch.path());
  ModelStore store(scratch.path());
  UtcDate from{2018, 3, 5};
  UtcDate to{2018, 3, 11};
  for (UtcDate d = from; day_start(d) <= day_start(to); d = add_days(d, 1)) {
    pi.write_dms_b(d, {{"ZAB42", make_series("ZAB42", d, 2)}});
  }
  TrainingConfig cfg = quick_config(4);
  TrainingReport first = train_all_sectors(pi, store, from, to, cfg);
  TrainingReport second = train_all_sectors(pi, store, from, to, cfg);
  REQUIRE(first.sectors.size() == 1);
  REQUIRE(second.sectors.size() == 1);
  CHECK(first.sectors[0].model_id == 1);
  CHECK(second.sectors[0].model_id == 2);
  CHECK(store.active_id("ZAB42") == 2);
  CHECK(store.list_ids("ZAB42") == std::vector<int>{1, 2});
  // Same inputs, same model: the rerun's predictions match bit for bit.
  std::vector<double> x =
      encode_features(cfg.schema, require_timestamp("2018-03-08T09:30:00Z"), std::nullopt, 1);
  CHECK(store.load_by_id("ZAB42", 1).model.predict(x).raw ==
        store.load_by_id("ZAB42", 2).model.predict(x).raw);
}

TEST_CASE("sector absent on some days trains against zero-filled curves") {
  ScratchDir scratch("train_gap");
  PiStore pi(scratch.path());
  ModelStore store(scratch.path());
  UtcDate from{2018, 3, 1};
  UtcDate to{2018, 3, 14};
  int idx = 0;
  for (UtcDate d = from; day_start(d) <= day_start(to); d = add_days(d, 1), ++idx) {
    std::map<std::string, SectorCountSeries> day;
    day.emplace("BUSY", make_series("BUSY", d, 2));
    if (idx == 0 || idx == 2) day.emplace("GAP", make_series("GAP", d, 4));
    pi.write_dms_b(d, day);
  }
  TrainingReport report = train_all_sectors(pi, store, from, to, quick_config(4));
  REQUIRE(report.sectors.size() == 2);
  const SectorTrainingOutcome& gap = report.sectors[1];
  CHECK(gap.sector == "GAP");
  CHECK(gap.ok());
  // Absent days count as zero-traffic curves, not missing data. Each weekday
  // group holds two curves here and a two-point trend fits both exactly, so
  // nothing is rejected.
  CHECK(gap.curves_total == 14);
  CHECK(gap.curves_accepted == 14);
  CHECK(gap.sample_count == 14u * kMinutesPerDay);
}

TEST_CASE("single-day range trains on one unfiltered curve") {
  ScratchDir scratch("train_one_day");
  PiStore pi(scratch.path());
  ModelStore store(scratch.path());
  UtcDate day{2018, 3, 6};
  pi.write_dms_b(day, {{"SOLO", make_series("SOLO", day, 1)}});
  TrainingReport report = train_all_sectors(pi, store, day, day, quick_config(2));
  REQUIRE(report.sectors.size() == 1);
  CHECK(report.sectors[0].ok());
  CHECK(report.sectors[0].curves_total == 1);
  CHECK(report.sectors[0].curves_accepted == 1);
  CHECK(report.sectors[0].sample_count == static_cast<std::size_t>(kMinutesPerDay));
}

TEST_CASE("per-sector training failures are recorded and the run continues") {
  ScratchDir scratch("train_fail");
  PiStore pi(scratch.path());
  ModelStore store(scratch.path());
  UtcDate from{2018, 3, 5};
  UtcDate to{2018, 3, 7};
  for (UtcDate d = from; day_start(d) <= day_start(to); d = add_days(d, 1)) {
    pi.write_dms_b(d, {{"A1", make_series("A1", d, 1)},
                       {"B2", make_series("B2", d, 2)},
                       {"C3", make_series("C3", d, 3)}});
  }
  TrainingConfig cfg = quick_config(2);
  cfg.boost.tree.min_leaf = 10'000'000;  // no sector can satisfy this
  TrainingReport report = train_all_sectors(pi, store, from, to, cfg);
  REQUIRE(report.sectors.size() == 3);
  for (const SectorTrainingOutcome& out : report.sectors) {
    CHECK_FALSE(out.ok());
    CHECK_FALSE(out.error.empty());
    CHECK(out.model_id == -1);
  }
  CHECK(store.sectors().empty());
}

TEST_CASE("outlier day is dropped before training") {
  ScratchDir scratch("train_outlier");
  PiStore pi(scratch.path());
  ModelStore store(scratch.path());
  UtcDate from{2018, 3, 1};
  UtcDate to{2018, 3, 21};
  for (UtcDate d = from; day_start(d) <= day_start(to); d = add_days(d, 1)) {
    int count = day_start(d) == day_start(UtcDate{2018, 3, 12}) ? 50 : 2;
    pi.write_dms_b(d, {{"OUT", make_series("OUT", d, count)}});
  }
  // Three Mondays (the 5th, 12th, 19th) form one filter group; the inflated
  // middle one sits far off the trend through the other two and is rejected.
  TrainingReport report = train_all_sectors(pi, store, from, to, quick_config(4));
  REQUIRE(report.sectors.size() == 1);
  const SectorTrainingOutcome& out = report.sectors[0];
  INFO(out.error);
  CHECK(out.ok());
  CHECK(out.curves_total == 21);
  CHECK(out.curves_accepted == 20);
  CHECK(out.sample_count == 20u * kMinutesPerDay);
  // With the spike gone the target is the constant 2.
  StoredModel stored = store.load_active("OUT");
  std::vector<double> x = encode_features(TrainingConfig{}.schema,
                                          require_timestamp("2018-03-12T10:00:00Z"), std::nullopt, 1);
  CHECK(stored.model.predict(x).count == Catch::Approx(2.0).margin(1e-9));
}

TEST_CASE("weather lookups feed the temperature feature with the freshest observation") {
  FeatureSchema schema;  // weather on, uncertainty off
  UtcDate day{2018, 3, 5};
  SectorCountSeries series = make_series("WX1", day, 1);
  std::vector<WeatherPoint> points;
  points.push_back({require_timestamp("2018-03-05T00:00:00Z"), "WX1", WeatherObs{10.0, {}, {}, {}, {}}});
  points.push_back({require_timestamp("2018-03-05T12:00:00Z"), "WX1", WeatherObs{25.0, {}, {}, {}, {}}});
  points.push_back({require_timestamp("2018-03-05T05:00:00Z"), "OTHER", WeatherObs{99.0, {}, {}, {}, {}}});
  WeatherTable wx = WeatherTable::from_points(points);

  std::vector<std::vector<double>> features;
  std::vector<double> targets;
  traindetail::append_samples(series, schema, wx, features, targets);
  REQUIRE(features.size() == static_cast<std::size_t>(kMinutesPerDay));
  CHECK(features[0][9] == 10.0);
  CHECK(features[0][10] == 1.0);
  CHECK(features[719][9] == 10.0);
  CHECK(features[720][9] == 25.0);  // exact observation time counts as current
  CHECK(features[1439][9] == 25.0);
  CHECK(targets[600] == 1.0);

  SECTION("minutes before the first observation are masked off") {
    WeatherTable late = WeatherTable::from_points(
        {{require_timestamp("2018-03-05T06:00:00Z"), "WX1", WeatherObs{18.0, {}, {}, {}, {}}}});
    std::vector<std::vector<double>> f2;
    std::vector<double> t2;
    traindetail::append_samples(series, schema, late, f2, t2);
    CHECK(f2[359][9] == 0.0);
    CHECK(f2[359][10] == 0.0);
    CHECK(f2[360][9] == 18.0);
    CHECK(f2[360][10] == 1.0);
  }
}

TEST_CASE("bucket uncertainty levels flow into the uncertainty feature") {
  FeatureSchema schema;
  schema.with_uncertainty = true;
  UtcDate day{2018, 3, 5};
  SectorCountSeries series;
  series.sector = "U1";
  series.day = day;
  series.add(100, "F0", UncertaintyLevel::Severe);
  series.add(200, "F0", UncertaintyLevel::Recoverable);
  series.add(300, "F0", UncertaintyLevel::Consistent);

  std::vector<std::vector<double>> features;
  std::vector<double> targets;
  traindetail::append_samples(series, schema, WeatherTable{}, features, targets);
  REQUIRE(features.size() == static_cast<std::size_t>(kMinutesPerDay));
  REQUIRE(features[0].size() == static_cast<std::size_t>(schema.dimension()));
  CHECK(features[100][19] == 3.0);
  CHECK(features[200][19] == 2.0);
  CHECK(features[300][19] == 1.0);
  CHECK(features[50][19] == 1.0);  // empty bucket reads as consistent
  CHECK(targets[100] == 1.0);
  CHECK(targets[50] == 0.0);
}

TEST_CASE("validation scores constant sectors perfectly") {
  ScratchDir scratch("validate_const");
  PiStore pi(scratch.path());
  UtcDate from{2018, 3, 5};
  UtcDate to{2018, 3, 8};
  for (UtcDate d = from; day_start(d) <= day_start(to); d = add_days(d, 1)) {
    pi.write_dms_b(d, {{"VA", make_series("VA", d, 2)}, {"VB", make_series("VB", d, 5)}});
  }
  TrainingConfig cfg = quick_config(4);
  ValidationReport report = validate_all_sectors(pi, from, to, 4, 7, cfg);
  REQUIRE(report.sectors.size() == 2);
  CHECK(report.k == 4);
  CHECK(report.seed == 7);
  for (const SectorValidationOutcome& out : report.sectors) {
    INFO(out.sector << ": " << out.error);
    CHECK(out.ok());
    CHECK(out.cv.k == 4);
    CHECK(out.cv.mean_score == Catch::Approx(1.0).margin(1e-12));
  }
  CHECK(report.mean_score == Catch::Approx(1.0).margin(1e-12));

  SECTION("invalid fold count is recorded per sector") {
    ValidationReport bad = validate_all_sectors(pi, from, to, 1, 7, cfg);
    REQUIRE(bad.sectors.size() == 2);
    for (const SectorValidationOutcome& out : bad.sectors) {
      CHECK_FALSE(out.ok());
      CHECK_FALSE(out.error.empty());
    }
    CHECK(bad.mean_score == 0.0);
  }
}

TEST_CASE("weather table lookup and directory loading") {
  WeatherTable t = WeatherTable::from_points({
      {require_timestamp("2018-03-05T06:00:00Z"), "A", WeatherObs{1.0, {}, {}, {}, {}}},
      {require_timestamp("2018-03-05T07:00:00Z"), "A", WeatherObs{2.0, {}, {}, {}, {}}},
  });
  CHECK_FALSE(t.empty());
  CHECK(t.size() == 2);
  CHECK_FALSE(t.at_or_before("A", require_timestamp("2018-03-05T05:59:59Z")).has_value());
  CHECK(t.at_or_before("A", require_timestamp("2018-03-05T06:00:00Z"))->temperature_c == 1.0);
  CHECK(t.at_or_before("A", require_timestamp("2018-03-05T06:30:00Z"))->temperature_c == 1.0);
  CHECK(t.at_or_before("A", require_timestamp("2018-03-05T09:00:00Z"))->temperature_c == 2.0);
  CHECK_FALSE(t.at_or_before("B", require_timestamp("2018-03-05T12:00:00Z")).has_value());

  SECTION("repeated observation time overwrites") {
    t.add({require_timestamp("2018-03-05T07:00:00Z"), "A", WeatherObs{9.0, {}, {}, {}, {}}});
    CHECK(t.size() == 2);
    CHECK(t.at_or_before("A", require_timestamp("2018-03-05T08:00:00Z"))->temperature_c == 9.0);
  }

  SECTION("missing directory loads as empty") {
    ScratchDir scratch("wx_missing");
    CHECK(WeatherTable::load_dir(scratch.path() / "nope").empty());
  }

  SECTION("directory load merges every csv") {
    ScratchDir scratch("wx_dir");
    std::filesystem::create_directories(scratch.path() / "wx");
    write_weather_csv(scratch.path() / "wx" / "2018-03-05.csv",
                      {{require_timestamp("2018-03-05T06:00:00Z"), "A", WeatherObs{1.0, 5.0, 90.0, 40.0, 1010.0}}});
    write_weather_csv(scratch.path() / "wx" / "2018-03-06.csv",
                      {{require_timestamp("2018-03-06T06:00:00Z"), "A", WeatherObs{4.0, 5.0, 90.0, 40.0, 1010.0}}});
    WeatherTable loaded = WeatherTable::load_dir(scratch.path() / "wx");
    CHECK(loaded.size() == 2);
    CHECK(loaded.at_or_before("A", require_timestamp("2018-03-06T12:00:00Z"))->temperature_c == 4.0);
  }
}
