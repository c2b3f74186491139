#pragma once

// Processed-information store: persists per-flight correlation results
// (DMS-A) and per-sector count series (DMS-B) under `<root>/pi/`, and serves
// exact count lookups for prepared days.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flight_document.hpp"
#include "occupancy.hpp"
#include "pathname.hpp"
#include "sector_counts.hpp"
#include "time.hpp"

namespace sectorcast {

struct DayNotPrepared : std::runtime_error {
  explicit DayNotPrepared(UtcDate day)
      : std::runtime_error("day not prepared: " + format_date(day)) {}
};

namespace detail {

inline nlohmann::json correlated_to_json(const CorrelatedFlight& f) {
  nlohmann::json j;
  j["flightRef"] = f.flight_ref;
  j["uncertainty"] = level_value(f.uncertainty);
  nlohmann::json ivs = nlohmann::json::array();
  for (const SectorInterval& iv : f.intervals) {
    nlohmann::json e;
    e["sector"] = iv.sector;
    e["entry"] = format_timestamp(iv.entry);
    e["exit"] = format_timestamp(iv.exit);
    ivs.push_back(std::move(e));
  }
  j["intervals"] = std::move(ivs);
  nlohmann::json buckets = nlohmann::json::array();
  for (const BucketEntry& b : f.buckets) {
    nlohmann::json e;
    e["time"] = format_timestamp(b.time);
    e["sector"] = b.sector;
    e["hasTrack"] = b.has_track;
    if (b.track) e["track"] = track_to_json(*b.track);
    buckets.push_back(std::move(e));
  }
  j["buckets"] = std::move(buckets);
  return j;
}

inline CorrelatedFlight correlated_from_json(const nlohmann::json& j) {
  CorrelatedFlight f;
  f.flight_ref = j.at("flightRef").get<std::string>();
  f.uncertainty = level_from_value(j.at("uncertainty").get<int>());
  for (const nlohmann::json& e : j.at("intervals")) {
    SectorInterval iv;
    iv.sector = e.at("sector").get<std::string>();
    iv.entry = require_timestamp(e.at("entry").get<std::string>());
    iv.exit = require_timestamp(e.at("exit").get<std::string>());
    f.intervals.push_back(std::move(iv));
  }
  for (const nlohmann::json& e : j.at("buckets")) {
    BucketEntry b;
    b.time = require_timestamp(e.at("time").get<std::string>());
    b.sector = e.at("sector").get<std::string>();
    b.has_track = e.at("hasTrack").get<bool>();
    if (e.contains("track")) b.track = track_from_json(e.at("track"));
    f.buckets.push_back(std::move(b));
  }
  return f;
}

}  // namespace detail

class PiStore {
 public:
  explicit PiStore(std::filesystem::path root) : root_(std::move(root)) {}

  std::filesystem::path dms_a_dir(UtcDate day) const {
    return root_ / "pi" / ("dms-a-" + format_date(day));
  }
  std::filesystem::path dms_b_dir(UtcDate day) const {
    return root_ / "pi" / ("dms-b-" + format_date(day));
  }

  // Replaces the day's DMS-A collection wholesale: the stored state is a
  // pure function of this call's input, so re-preparation is idempotent.
  // One line per flight, in call order; callers pass refs already sorted.
  void write_dms_a(UtcDate day, const std::vector<CorrelatedFlight>& flights) const {
    std::filesystem::path dir = dms_a_dir(day);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "flights.jsonl", std::ios::binary | std::ios::trunc);
    for (const CorrelatedFlight& f : flights) {
      out << detail::correlated_to_json(f).dump() << '\n';
      if (!out) throw std::runtime_error("failed writing DMS-A document for " + f.flight_ref);
    }
    out.flush();
    if (!out) throw std::runtime_error("failed writing DMS-A collection for " + format_date(day));
  }

  std::vector<CorrelatedFlight> read_dms_a(UtcDate day) const {
    std::filesystem::path dir = dms_a_dir(day);
    if (!std::filesystem::is_directory(dir)) throw DayNotPrepared(day);
    std::vector<CorrelatedFlight> out;
    std::ifstream in(dir / "flights.jsonl", std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      out.push_back(detail::correlated_from_json(nlohmann::json::parse(line)));
    }
    return out;
  }

  void write_dms_b(UtcDate day, const std::map<std::string, SectorCountSeries>& series) const {
    std::filesystem::path dir = dms_b_dir(day);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    for (const auto& [sector, s] : series) {
      std::ofstream out(dir / (sanitize_component(sector) + ".doc"),
                        std::ios::binary | std::ios::trunc);
      out << serialize_series(s);
      if (!out) throw std::runtime_error("failed writing DMS-B document for " + sector);
    }
  }

  bool has_day(UtcDate day) const { return std::filesystem::is_directory(dms_b_dir(day)); }

  // Days with a reduced DMS-B collection, ascending.
  std::vector<UtcDate> days() const {
    std::vector<UtcDate> out;
    std::filesystem::path dir = root_ / "pi";
    if (!std::filesystem::is_directory(dir)) return out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      std::string name = entry.path().filename().string();
      if (!entry.is_directory() || name.rfind("dms-b-", 0) != 0) continue;
      try {
        out.push_back(require_date(name.substr(6)));
      } catch (const std::exception&) {
        continue;  // stray directory, not ours
      }
    }
    std::sort(out.begin(), out.end(),
              [](const UtcDate& a, const UtcDate& b) { return day_start(a) < day_start(b); });
    return out;
  }

  std::map<std::string, SectorCountSeries> read_dms_b(UtcDate day) const {
    std::filesystem::path dir = dms_b_dir(day);
    if (!std::filesystem::is_directory(dir)) throw DayNotPrepared(day);
    std::map<std::string, SectorCountSeries> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.path().extension() != ".doc") continue;
      std::ifstream in(entry.path(), std::ios::binary);
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      SectorCountSeries s = parse_series(text);
      out.emplace(s.sector, std::move(s));
    }
    return out;
  }

  std::optional<SectorCountSeries> read_series(UtcDate day, const std::string& sector) const {
    std::filesystem::path dir = dms_b_dir(day);
    if (!std::filesystem::is_directory(dir)) throw DayNotPrepared(day);
    std::filesystem::path file = dir / (sanitize_component(sector) + ".doc");
    if (!std::filesystem::exists(file)) return std::nullopt;
    std::ifstream in(file, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_series(text);
  }

  // Exact lookup; a prepared day with no document for the sector reads as
  // unoccupied at level 1.
  std::pair<int, UncertaintyLevel> query_count(const std::string& sector, Timestamp minute) const {
    UtcDate day = date_of(minute);
    std::optional<SectorCountSeries> s = read_series(day, sector);
    if (!s) return {0, UncertaintyLevel::Consistent};
    int m = static_cast<int>((floor_to_minute(minute) - day_start(day)) / 60);
    const MinuteBucket& b = s->buckets.at(static_cast<std::size_t>(m));
    return {b.count(), b.uncertainty};
  }

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

}  // namespace sectorcast
