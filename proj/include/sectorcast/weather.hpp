#pragma once

// Weather observations on disk and in memory. Observations arrive as per-day
// CSV files (one row per sector per observation time); training looks them up
// by sector with most-recent-at-or-before semantics, the natural reading of an
// hourly METAR-style feed. A sector with no observation at or before the
// requested time yields no value, which the feature encoder masks off.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "features.hpp"
#include "time.hpp"

namespace sectorcast {

struct WeatherPoint {
  Timestamp time = 0;
  std::string sector;
  WeatherObs obs;
};

inline void write_weather_csv(const std::filesystem::path& path,
                              const std::vector<WeatherPoint>& points) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << "time,sector,temperatureC,windSpeedKts,windDirDeg,humidityPct,pressureHpa\n";
  char buf[64];
  for (const WeatherPoint& p : points) {
    std::snprintf(buf, sizeof buf, "%.1f,%.1f,%.0f,%.0f,%.1f", p.obs.temperature_c.value_or(0),
                  p.obs.wind_speed_kts.value_or(0), p.obs.wind_dir_deg.value_or(0),
                  p.obs.humidity_pct.value_or(0), p.obs.pressure_hpa.value_or(0));
    out << format_timestamp(p.time) << ',' << p.sector << ',' << buf << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

inline std::vector<WeatherPoint> read_weather_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<WeatherPoint> out;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t pos = 0;
    while (true) {
      std::size_t c = line.find(',', pos);
      cols.push_back(line.substr(pos, c - pos));
      if (c == std::string::npos) break;
      pos = c + 1;
    }
    if (cols.size() != 7) throw std::runtime_error("bad weather row: " + line);
    WeatherPoint p;
    p.time = require_timestamp(cols[0]);
    p.sector = cols[1];
    p.obs.temperature_c = std::stod(cols[2]);
    p.obs.wind_speed_kts = std::stod(cols[3]);
    p.obs.wind_dir_deg = std::stod(cols[4]);
    p.obs.humidity_pct = std::stod(cols[5]);
    p.obs.pressure_hpa = std::stod(cols[6]);
    out.push_back(std::move(p));
  }
  return out;
}

// Per-sector time-ordered observation index. Later add() for the same
// (sector, time) overwrites, so re-loading a corrected file wins.
class WeatherTable {
 public:
  WeatherTable() = default;

  void add(const WeatherPoint& p) { by_sector_[p.sector][p.time] = p.obs; }

  bool empty() const { return by_sector_.empty(); }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [sector, obs] : by_sector_) n += obs.size();
    return n;
  }

  std::optional<WeatherObs> at_or_before(const std::string& sector, Timestamp t) const {
    auto it = by_sector_.find(sector);
    if (it == by_sector_.end()) return std::nullopt;
    auto after = it->second.upper_bound(t);
    if (after == it->second.begin()) return std::nullopt;
    return std::prev(after)->second;
  }

  static WeatherTable from_points(const std::vector<WeatherPoint>& points) {
    WeatherTable t;
    for (const WeatherPoint& p : points) t.add(p);
    return t;
  }

  // Reads every *.csv under dir; a missing directory is an empty table, not an
  // error, because most deployments have no weather feed at all.
  static WeatherTable load_dir(const std::filesystem::path& dir) {
    WeatherTable t;
    if (!std::filesystem::is_directory(dir)) return t;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      for (const WeatherPoint& p : read_weather_csv(f)) t.add(p);
    }
    return t;
  }

 private:
  std::map<std::string, std::map<Timestamp, WeatherObs>> by_sector_;
};

}  // namespace sectorcast
