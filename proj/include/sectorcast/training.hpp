#pragma once

// Training orchestration over a prepared data root. For every sector seen in
// the day range: assemble one daily count curve per day, reject outlier days
// per (weekday) group, flatten the surviving curves into per-minute samples,
// boost, and persist through the model store. A sector that fails records the
// error in the report and the run moves on; only a missing DMS-B day aborts,
// since that is a precondition of the whole run, not a per-sector defect.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "boosting.hpp"
#include "curve_filter.hpp"
#include "features.hpp"
#include "model_store.hpp"
#include "pi_store.hpp"
#include "scoring.hpp"
#include "sector_counts.hpp"
#include "time.hpp"
#include "weather.hpp"

namespace sectorcast {

struct TrainingConfig {
  BoostConfig boost;
  MinuteWindow filter_window;
  FeatureSchema schema;
  // Stamp written into stored model documents. The caller owns the clock so a
  // replayed run can produce byte-identical artifacts.
  Timestamp created_at = 0;
};

struct SectorTrainingOutcome {
  std::string sector;
  int curves_total = 0;
  int curves_accepted = 0;
  std::size_t sample_count = 0;
  int model_id = -1;
  double duration_s = 0.0;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

struct TrainingReport {
  UtcDate from{};
  UtcDate to{};
  std::vector<SectorTrainingOutcome> sectors;  // ascending by sector name
  double total_duration_s = 0.0;
};

struct SectorValidationOutcome {
  std::string sector;
  std::size_t sample_count = 0;
  CVReport cv;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

struct ValidationReport {
  UtcDate from{};
  UtcDate to{};
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<SectorValidationOutcome> sectors;  // ascending by sector name
  double mean_score = 0.0;                       // over sectors that validated
};

namespace traindetail {

inline std::vector<UtcDate> days_in_range(UtcDate from, UtcDate to) {
  std::vector<UtcDate> out;
  for (UtcDate d = from; day_start(d) <= day_start(to); d = add_days(d, 1)) out.push_back(d);
  return out;
}

// Every day's reduced counts plus the sorted union of sector names. A sector
// absent on some day genuinely held zero aircraft that day, so its curve for
// that day is all zeros rather than a gap; the weekday outlier filter then
// treats a dead day among busy ones as the anomaly it is.
struct Corpus {
  std::vector<UtcDate> days;
  std::vector<std::map<std::string, SectorCountSeries>> per_day;
  std::vector<std::string> sectors;
};

inline Corpus read_corpus(const PiStore& pi, UtcDate from, UtcDate to) {
  Corpus c;
  c.days = days_in_range(from, to);
  std::map<std::string, int> seen;
  for (UtcDate d : c.days) {
    c.per_day.push_back(pi.read_dms_b(d));
    for (const auto& [sector, series] : c.per_day.back()) seen.emplace(sector, 0);
  }
  for (const auto& [sector, unused] : seen) c.sectors.push_back(sector);
  return c;
}

inline std::vector<SectorCountSeries> sector_series(const Corpus& c, const std::string& sector) {
  std::vector<SectorCountSeries> out;
  for (std::size_t i = 0; i < c.days.size(); ++i) {
    auto it = c.per_day[i].find(sector);
    if (it != c.per_day[i].end()) {
      out.push_back(it->second);
    } else {
      SectorCountSeries empty;
      empty.sector = sector;
      empty.day = c.days[i];
      out.push_back(std::move(empty));
    }
  }
  return out;
}

// Indices into `curves` that survive outlier rejection. Rejection needs at
// least two curves per (weekday) group to fit a trend, so smaller groups pass
// through unfiltered.
inline std::vector<std::size_t> accept_days(const std::vector<DailyCurve>& curves,
                                            const MinuteWindow& window) {
  std::map<Weekday, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < curves.size(); ++i) groups[curves[i].weekday].push_back(i);
  std::vector<std::size_t> accepted;
  for (const auto& [wd, members] : groups) {
    if (members.size() < 2) {
      accepted.insert(accepted.end(), members.begin(), members.end());
      continue;
    }
    std::vector<DailyCurve> group;
    for (std::size_t i : members) group.push_back(curves[i]);
    RejectionResult r = reject_outliers(group, window);
    for (std::size_t j : r.accepted) accepted.push_back(members[j]);
  }
  std::sort(accepted.begin(), accepted.end());
  return accepted;
}

// One sample per minute of the day: features from the bucket time (plus the
// freshest weather observation and the bucket's uncertainty level when the
// schema asks for them), target = aircraft count.
inline void append_samples(const SectorCountSeries& s, const FeatureSchema& schema,
                           const WeatherTable& wx, std::vector<std::vector<double>>& features,
                           std::vector<double>& targets) {
  Timestamp t0 = day_start(s.day);
  for (int m = 0; m < kMinutesPerDay; ++m) {
    Timestamp t = t0 + 60 * static_cast<Timestamp>(m);
    std::optional<WeatherObs> obs;
    if (schema.with_weather) obs = wx.at_or_before(s.sector, t);
    int level = level_value(s.buckets[static_cast<std::size_t>(m)].uncertainty);
    features.push_back(encode_features(schema, t, obs, level));
    targets.push_back(static_cast<double>(s.count_at(m)));
  }
}

struct SectorSamples {
  int curves_total = 0;
  int curves_accepted = 0;
  std::vector<std::vector<double>> features;
  std::vector<double> targets;
};

inline SectorSamples assemble_sector(const Corpus& corpus, const std::string& sector,
                                     const TrainingConfig& cfg, const WeatherTable& wx) {
  SectorSamples out;
  std::vector<SectorCountSeries> series = sector_series(corpus, sector);
  std::vector<DailyCurve> curves;
  for (const SectorCountSeries& s : series) curves.push_back(DailyCurve::from_series(s));
  out.curves_total = static_cast<int>(curves.size());
  std::vector<std::size_t> accepted = accept_days(curves, cfg.filter_window);
  out.curves_accepted = static_cast<int>(accepted.size());
  for (std::size_t i : accepted) append_samples(series[i], cfg.schema, wx, out.features, out.targets);
  return out;
}

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace traindetail

inline TrainingReport train_all_sectors(const PiStore& pi, ModelStore& store, UtcDate from,
                                        UtcDate to, const TrainingConfig& cfg = {},
                                        const WeatherTable& wx = {}) {
  auto run_start = std::chrono::steady_clock::now();
  TrainingReport report;
  report.from = from;
  report.to = to;
  traindetail::Corpus corpus = traindetail::read_corpus(pi, from, to);
  for (const std::string& sector : corpus.sectors) {
    SectorTrainingOutcome out;
    out.sector = sector;
    auto start = std::chrono::steady_clock::now();
    try {
      traindetail::SectorSamples samples = traindetail::assemble_sector(corpus, sector, cfg, wx);
      out.curves_total = samples.curves_total;
      out.curves_accepted = samples.curves_accepted;
      out.sample_count = samples.targets.size();
      std::vector<double> trace;
      BoostedModel model =
          train_boosted(samples.features, samples.targets, cfg.boost, cfg.schema, sector, &trace);
      out.duration_s = traindetail::seconds_since(start);
      StoredModel doc;
      doc.sector = sector;
      doc.model = std::move(model);
      doc.trained_through = to;
      doc.training_duration_s = out.duration_s;
      doc.created_at = cfg.created_at;
      doc.mse_trace = std::move(trace);
      out.model_id = store.save_model(doc);
    } catch (const std::exception& e) {
      out.error = e.what();
      out.duration_s = traindetail::seconds_since(start);
    }
    report.sectors.push_back(std::move(out));
  }
  report.total_duration_s = traindetail::seconds_since(run_start);
  return report;
}

inline ValidationReport validate_all_sectors(const PiStore& pi, UtcDate from, UtcDate to, int k,
                                             std::uint64_t seed, const TrainingConfig& cfg = {},
                                             const WeatherTable& wx = {}) {
  ValidationReport report;
  report.from = from;
  report.to = to;
  report.k = k;
  report.seed = seed;
  traindetail::Corpus corpus = traindetail::read_corpus(pi, from, to);
  double sum = 0.0;
  int scored = 0;
  for (const std::string& sector : corpus.sectors) {
    SectorValidationOutcome out;
    out.sector = sector;
    try {
      traindetail::SectorSamples samples = traindetail::assemble_sector(corpus, sector, cfg, wx);
      out.sample_count = samples.targets.size();
      out.cv = cross_validate(samples.features, samples.targets, k, cfg.boost, seed, cfg.schema);
      sum += out.cv.mean_score;
      ++scored;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    report.sectors.push_back(std::move(out));
  }
  if (scored > 0) report.mean_score = sum / scored;
  return report;
}

}  // namespace sectorcast
