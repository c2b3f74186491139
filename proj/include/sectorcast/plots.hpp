#pragma once

// Plot artifacts as deterministic CSV files. Each kind mirrors one of the
// figures an analyst would ask for: a predicted-vs-actual day curve, the
// training error per boosting iteration, prediction score against daily
// traffic volume, and an hourly per-sector occupancy table. CSV keeps the
// artifacts diffable and testable; any charting tool can render them.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "model_store.hpp"
#include "pi_store.hpp"
#include "scoring.hpp"
#include "sector_counts.hpp"
#include "time.hpp"
#include "training.hpp"

namespace sectorcast {

enum class PlotKind { SectorCurve, Convergence, ScoreScatter, Heatmap };

class MissingData : public std::runtime_error {
 public:
  explicit MissingData(const std::string& what) : std::runtime_error(what) {}
};

struct PlotParams {
  std::string sector;  // sectorCurve, convergence
  UtcDate day{};       // sectorCurve, heatmap
  UtcDate from{};      // scoreScatter
  UtcDate to{};        // scoreScatter
};

inline PlotKind plot_kind_from_name(const std::string& name) {
  if (name == "sectorCurve") return PlotKind::SectorCurve;
  if (name == "convergence") return PlotKind::Convergence;
  if (name == "scoreScatter") return PlotKind::ScoreScatter;
  if (name == "heatmap") return PlotKind::Heatmap;
  throw std::invalid_argument("unknown plot kind: " + name);
}

namespace plotdetail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::map<std::string, SectorCountSeries> day_counts(const PiStore& pi, UtcDate day) {
  try {
    return pi.read_dms_b(day);
  } catch (const DayNotPrepared& e) {
    throw MissingData(e.what());
  }
}

inline StoredModel active_model(const ModelStore& store, const std::string& sector) {
  try {
    return store.load_active(sector);
  } catch (const ModelNotFound& e) {
    throw MissingData(e.what());
  }
}

// Model predictions for every minute of the day, weather masked off.
inline std::vector<double> predict_day(const BoostedModel& model, UtcDate day) {
  std::vector<double> out;
  Timestamp t0 = day_start(day);
  for (int m = 0; m < kMinutesPerDay; ++m) {
    std::vector<double> x =
        encode_features(model.schema, t0 + 60 * static_cast<Timestamp>(m), std::nullopt, 1);
    out.push_back(model.predict(x).count);
  }
  return out;
}

inline int unique_flights(const SectorCountSeries& s) {
  std::set<std::string> refs;
  for (const MinuteBucket& b : s.buckets) refs.insert(b.flights.begin(), b.flights.end());
  return static_cast<int>(refs.size());
}

inline void write_csv(const std::filesystem::path& out, const std::string& text) {
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw std::runtime_error("failed writing " + out.string());
}

inline std::string sector_curve_csv(const PiStore& pi, const ModelStore& store,
                                    const PlotParams& p) {
  std::map<std::string, SectorCountSeries> day = day_counts(pi, p.day);
  auto it = day.find(p.sector);
  if (it == day.end()) {
    throw MissingData("sector " + p.sector + " has no counts on " + format_date(p.day));
  }
  StoredModel stored = active_model(store, p.sector);
  std::vector<double> predicted = predict_day(stored.model, p.day);
  std::string text = "minute,actual,predicted\n";
  for (int m = 0; m < kMinutesPerDay; ++m) {
    text += std::to_string(m);
    text += ',';
    text += std::to_string(it->second.count_at(m));
    text += ',';
    text += num(predicted[static_cast<std::size_t>(m)]);
    text += '\n';
  }
  return text;
}

inline std::string convergence_csv(const ModelStore& store, const PlotParams& p) {
  StoredModel stored = active_model(store, p.sector);
  if (stored.mse_trace.empty()) {
    throw MissingData("model for " + p.sector + " has no training trace");
  }
  std::string text = "iteration,mse\n";
  for (std::size_t i = 0; i < stored.mse_trace.size(); ++i) {
    text += std::to_string(i + 1);
    text += ',';
    text += num(stored.mse_trace[i]);
    text += '\n';
  }
  return text;
}

inline std::string score_scatter_csv(const PiStore& pi, const ModelStore& store,
                                     const PlotParams& p) {
  std::string text = "sector,date,dailyFlights,score\n";
  int rows = 0;
  std::map<std::string, StoredModel> models;
  for (UtcDate d : traindetail::days_in_range(p.from, p.to)) {
    if (!pi.has_day(d)) continue;
    for (const auto& [sector, series] : pi.read_dms_b(d)) {
      auto it = models.find(sector);
      if (it == models.end()) {
        try {
          it = models.emplace(sector, store.load_active(sector)).first;
        } catch (const ModelNotFound&) {
          continue;  // unmodeled sectors have no score to plot
        }
      }
      std::vector<double> actual;
      for (int m = 0; m < kMinutesPerDay; ++m) {
        actual.push_back(static_cast<double>(series.count_at(m)));
      }
      double score = score_scc(actual, predict_day(it->second.model, d));
      text += sector;
      text += ',';
      text += format_date(d);
      text += ',';
      text += std::to_string(unique_flights(series));
      text += ',';
      text += num(score);
      text += '\n';
      ++rows;
    }
  }
  if (rows == 0) throw MissingData("no prepared days with modeled sectors in range");
  return text;
}

inline std::string heatmap_csv(const PiStore& pi, const PlotParams& p) {
  std::map<std::string, SectorCountSeries> day = day_counts(pi, p.day);
  if (day.empty()) throw MissingData("no occupied sectors on " + format_date(p.day));
  std::string text = "sector";
  for (int h = 0; h < 24; ++h) {
    char buf[8];
    std::snprintf(buf, sizeof buf, ",h%02d", h);
    text += buf;
  }
  text += '\n';
  for (const auto& [sector, series] : day) {
    text += sector;
    for (int h = 0; h < 24; ++h) {
      int sum = 0;
      for (int m = h * 60; m < (h + 1) * 60; ++m) sum += series.count_at(m);
      text += ',';
      text += num(sum / 60.0);
    }
    text += '\n';
  }
  return text;
}

}  // namespace plotdetail

inline void emit_plot(PlotKind kind, const PlotParams& params, const PiStore& pi,
                      const ModelStore& store, const std::filesystem::path& out) {
  std::string text;
  switch (kind) {
    case PlotKind::SectorCurve:
      text = plotdetail::sector_curve_csv(pi, store, params);
      break;
    case PlotKind::Convergence:
      text = plotdetail::convergence_csv(store, params);
      break;
    case PlotKind::ScoreScatter:
      text = plotdetail::score_scatter_csv(pi, store, params);
      break;
    case PlotKind::Heatmap:
      text = plotdetail::heatmap_csv(pi, params);
      break;
  }
  plotdetail::write_csv(out, text);
}

}  // namespace sectorcast
