#pragma once

// Per-sector, per-day occupancy series: 1440 one-minute buckets, each holding
// the set of flight refs airborne in the sector during that minute plus an
// uncertainty level. This is the final reduced product of the preparation
// pipeline and the input to curve filtering and model training.

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "time.hpp"

namespace sectorcast {

// 1 = message sequence consistent, 2 = recoverable anomaly (count still
// computable), 3 = contradictory times (count not computable).
enum class UncertaintyLevel : int { Consistent = 1, Recoverable = 2, Severe = 3 };

inline int level_value(UncertaintyLevel u) { return static_cast<int>(u); }

inline UncertaintyLevel level_from_value(int v) {
  if (v < 1 || v > 3) throw std::invalid_argument("uncertainty level out of range");
  return static_cast<UncertaintyLevel>(v);
}

inline UncertaintyLevel max_level(UncertaintyLevel a, UncertaintyLevel b) {
  return level_value(a) >= level_value(b) ? a : b;
}

struct MinuteBucket {
  // Sorted, duplicate-free; count is the size of this list.
  std::vector<std::string> flights;
  UncertaintyLevel uncertainty = UncertaintyLevel::Consistent;

  int count() const { return static_cast<int>(flights.size()); }

  bool operator==(const MinuteBucket&) const = default;
};

struct SectorCountSeries {
  std::string sector;
  UtcDate day;
  std::array<MinuteBucket, kMinutesPerDay> buckets;

  bool operator==(const SectorCountSeries&) const = default;

  // Adds one flight to minute `m`, keeping the flight list sorted and unique.
  // Bucket uncertainty is the max over contributing flights.
  void add(int m, const std::string& flight_ref, UncertaintyLevel level) {
    MinuteBucket& b = buckets.at(static_cast<std::size_t>(m));
    auto it = std::lower_bound(b.flights.begin(), b.flights.end(), flight_ref);
    if (it == b.flights.end() || *it != flight_ref) b.flights.insert(it, flight_ref);
    b.uncertainty = max_level(b.uncertainty, level);
  }

  int count_at(int m) const { return buckets.at(static_cast<std::size_t>(m)).count(); }

  long total_flight_minutes() const {
    long total = 0;
    for (const MinuteBucket& b : buckets) total += b.count();
    return total;
  }
};

// Merges `other` into `into`. Associative and commutative: flight lists are
// set unions, uncertainties are maxima, so the result does not depend on
// merge order or on how flights were split across partial series.
inline void merge_series(SectorCountSeries& into, const SectorCountSeries& other) {
  if (into.sector != other.sector || !(into.day == other.day))
    throw std::invalid_argument("merge_series: sector/day mismatch");
  for (int m = 0; m < kMinutesPerDay; ++m) {
    const MinuteBucket& src = other.buckets[static_cast<std::size_t>(m)];
    for (const std::string& f : src.flights) into.add(m, f, src.uncertainty);
  }
}

// Serialized form of one DMS-B document (`<sector>.doc`): a single JSON
// object with sparse buckets (only occupied minutes appear), ascending by
// minute, flight lists sorted. Deterministic byte-for-byte given equal series.
inline std::string serialize_series(const SectorCountSeries& s) {
  nlohmann::json j;
  j["version"] = 1;
  j["sector"] = s.sector;
  j["day"] = format_date(s.day);
  nlohmann::json buckets = nlohmann::json::array();
  for (int m = 0; m < kMinutesPerDay; ++m) {
    const MinuteBucket& b = s.buckets[static_cast<std::size_t>(m)];
    if (b.flights.empty()) continue;
    nlohmann::json e;
    e["minute"] = m;
    e["uncertainty"] = level_value(b.uncertainty);
    e["flights"] = b.flights;
    buckets.push_back(std::move(e));
  }
  j["buckets"] = std::move(buckets);
  return j.dump() + "\n";
}

inline SectorCountSeries parse_series(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw std::runtime_error("sector series: not a JSON object");
  SectorCountSeries s;
  s.sector = j.at("sector").get<std::string>();
  s.day = require_date(j.at("day").get<std::string>());
  for (const nlohmann::json& e : j.at("buckets")) {
    int m = e.at("minute").get<int>();
    if (m < 0 || m >= kMinutesPerDay)
      throw std::runtime_error("sector series: minute out of range");
    MinuteBucket& b = s.buckets[static_cast<std::size_t>(m)];
    b.uncertainty = level_from_value(e.at("uncertainty").get<int>());
    b.flights = e.at("flights").get<std::vector<std::string>>();
    if (!std::is_sorted(b.flights.begin(), b.flights.end()))
      throw std::runtime_error("sector series: flight list not sorted");
  }
  return s;
}

}  // namespace sectorcast
