#pragma once

// Feature encoding for the count regressor: calendar/time features, optional
// weather observation features with presence masks, and an optional
// uncertainty-level feature. The encoded layout is fixed by FeatureSchema
// and persisted with every model, so stored models never silently change
// meaning.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "time.hpp"

namespace sectorcast {

// One surface observation, METAR style. Fields are individually optional;
// absent fields encode as 0 with their presence mask off.
struct WeatherObs {
  std::optional<double> temperature_c;
  std::optional<double> wind_speed_kts;
  std::optional<double> wind_dir_deg;
  std::optional<double> humidity_pct;
  std::optional<double> pressure_hpa;

  bool operator==(const WeatherObs&) const = default;
};

struct FeatureSchema {
  bool with_weather = true;
  bool with_uncertainty = false;

  // Layout: minuteOfDay, dow Mon..Sun one-hot, dayOfYear                (9)
  //         temp, tempMask, windSpeed, windSin, windCos, windMask,
  //         humidity, humidityMask, pressure, pressureMask             (+10)
  //         uncertaintyLevel                                           (+1)
  int dimension() const { return 9 + (with_weather ? 10 : 0) + (with_uncertainty ? 1 : 0); }

  std::vector<std::string> names() const {
    std::vector<std::string> n = {"minuteOfDay", "dowMon", "dowTue", "dowWed", "dowThu",
                                  "dowFri",      "dowSat", "dowSun", "dayOfYear"};
    if (with_weather) {
      for (const char* w : {"temp", "tempMask", "windSpeed", "windSin", "windCos", "windMask",
                            "humidity", "humidityMask", "pressure", "pressureMask"})
        n.push_back(w);
    }
    if (with_uncertainty) n.push_back("uncertaintyLevel");
    return n;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["withWeather"] = with_weather;
    j["withUncertainty"] = with_uncertainty;
    return j;
  }

  static FeatureSchema from_json(const nlohmann::json& j) {
    FeatureSchema s;
    s.with_weather = j.at("withWeather").get<bool>();
    s.with_uncertainty = j.at("withUncertainty").get<bool>();
    return s;
  }

  bool operator==(const FeatureSchema&) const = default;
};

inline constexpr double kPi = 3.14159265358979323846;

// The uncertainty feature is known offline only; clients predicting the
// future pass the consistent level (1).
inline std::vector<double> encode_features(const FeatureSchema& schema, Timestamp bucket_time,
                                           const std::optional<WeatherObs>& wx,
                                           int uncertainty_level = 1) {
  if (bucket_time % 60 != 0) throw std::invalid_argument("bucket time must be minute-aligned");
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(schema.dimension()));
  UtcDate d = date_of(bucket_time);
  x.push_back(static_cast<double>(minute_of_day(bucket_time)));
  int dow = static_cast<int>(weekday_of(d));
  for (int i = 0; i < 7; ++i) x.push_back(i == dow ? 1.0 : 0.0);
  x.push_back(static_cast<double>(day_of_year(d)));

  if (schema.with_weather) {
    auto masked = [&x](const std::optional<double>& v) {
      x.push_back(v.value_or(0.0));
      x.push_back(v ? 1.0 : 0.0);
    };
    masked(wx ? wx->temperature_c : std::nullopt);
    bool wind = wx && wx->wind_speed_kts && wx->wind_dir_deg;
    if (wind) {
      double rad = *wx->wind_dir_deg * kPi / 180.0;
      x.push_back(*wx->wind_speed_kts);
      x.push_back(std::sin(rad));
      x.push_back(std::cos(rad));
      x.push_back(1.0);
    } else {
      x.push_back(0.0);
      x.push_back(0.0);
      x.push_back(0.0);
      x.push_back(0.0);
    }
    masked(wx ? wx->humidity_pct : std::nullopt);
    masked(wx ? wx->pressure_hpa : std::nullopt);
  }
  if (schema.with_uncertainty) {
    if (uncertainty_level < 1 || uncertainty_level > 3)
      throw std::invalid_argument("uncertainty level out of range");
    x.push_back(static_cast<double>(uncertainty_level));
  }
  return x;
}

}  // namespace sectorcast
