#pragma once

// Deterministic synthetic traffic scenarios with ground truth, plus the
// brute-force counting oracle the pipeline is validated against.
//
// Independence rule: this header must not include the correlation or
// reduction code (occupancy.hpp, prep.hpp). The oracle re-states the counting
// convention from scratch with a per-minute membership scan; the only shared
// pieces are plain data types and calendar arithmetic.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "features.hpp"
#include "message.hpp"
#include "rng.hpp"
#include "sector_counts.hpp"
#include "time.hpp"
#include "weather.hpp"

namespace sectorcast {

struct InvalidSpec : std::runtime_error {
  explicit InvalidSpec(const std::string& what) : std::runtime_error("invalid scenario: " + what) {}
};

struct UnknownCase : std::runtime_error {
  explicit UnknownCase(int c)
      : std::runtime_error("unknown confusion case: " + std::to_string(c)) {}
};

struct ScenarioSpec {
  std::uint64_t seed = 1;
  UtcDate start_day{2018, 3, 1};
  int day_count = 1;
  int flights_per_day = 100;
  std::vector<std::string> sectors;
  // Relative demand weight per UTC hour; shapes departure times only.
  std::array<double, 24> hourly_demand{0.2, 0.1, 0.1, 0.1, 0.2, 0.4, 0.8, 1.2,
                                       1.5, 1.4, 1.2, 1.1, 1.2, 1.3, 1.5, 1.6,
                                       1.5, 1.3, 1.1, 0.9, 0.7, 0.5, 0.4, 0.3};
  // Probability of each confusion case (1..4) per flight; at most one case
  // is applied to a flight.
  std::array<double, 4> case_rates{0, 0, 0, 0};
  int route_len_min = 1, route_len_max = 6;
  int dwell_min = 3, dwell_max = 45;
  int tracks_min = 2, tracks_max = 5;
  int duplicate_departures = 1;
  int duplicate_arrivals = 1;
  // Stable schedule: one flight template per index reused every day, with
  // departures jittered by at most schedule_jitter_min minutes.
  bool stable_schedule = false;
  int schedule_jitter_min = 0;
  // The first n catalog sectors act as airport sectors with an observation
  // series; the rest have no weather, like most sectors in a METAR feed.
  int weather_sectors = 0;

  void validate() const {
    if (day_count < 1) throw InvalidSpec("dayCount must be >= 1");
    if (flights_per_day < 0) throw InvalidSpec("flightsPerDay must be >= 0");
    if (flights_per_day > 0 && sectors.empty()) throw InvalidSpec("sector catalog is empty");
    double demand = 0;
    for (double w : hourly_demand) {
      if (w < 0) throw InvalidSpec("hourly demand weights must be >= 0");
      demand += w;
    }
    if (flights_per_day > 0 && demand <= 0) throw InvalidSpec("hourly demand sums to zero");
    double rate_sum = 0;
    for (double r : case_rates) {
      if (r < 0 || r > 1) throw InvalidSpec("anomaly rates must lie in [0,1]");
      rate_sum += r;
    }
    if (rate_sum > 1) throw InvalidSpec("anomaly rates sum above 1");
    if (route_len_min < 1 || route_len_max < route_len_min)
      throw InvalidSpec("bad route length bounds");
    if (dwell_min < 1 || dwell_max < dwell_min) throw InvalidSpec("bad dwell bounds");
    if (tracks_min < 0 || tracks_max < tracks_min) throw InvalidSpec("bad track count bounds");
    if (duplicate_departures < 0 || duplicate_arrivals < 0 || duplicate_departures > 20 ||
        duplicate_arrivals > 20)
      throw InvalidSpec("duplicate counts must lie in [0, 20]");
    if (schedule_jitter_min < 0) throw InvalidSpec("schedule jitter must be >= 0");
    if (weather_sectors < 0 || weather_sectors > static_cast<int>(sectors.size()))
      throw InvalidSpec("weatherSectors exceeds the catalog");
    // A maximal route plus margins must fit one UTC day.
    if (route_len_max * dwell_max > 20 * 60) throw InvalidSpec("routes too long for one day");
  }
};

struct TruthInterval {
  std::string sector;
  Timestamp entry = 0;
  Timestamp exit = 0;

  bool operator==(const TruthInterval&) const = default;
};

// Effective per-flight truth: what a most-recent-message reader is entitled
// to conclude from the emitted stream. For clean flights this coincides with
// the generated schedule.
struct TruthFlight {
  std::string ref;
  int anomaly_case = 0;  // 0 = clean, 1..4 = confusion case applied
  bool counted = false;
  int uncertainty = 1;  // 1..3
  Timestamp departure = 0;
  std::optional<Timestamp> arrival;
  std::vector<TruthInterval> intervals;

  bool operator==(const TruthFlight&) const = default;
};

struct DayScenario {
  UtcDate day;
  std::vector<RawMessage> messages;  // sorted by msgTime, stable
  std::vector<TruthFlight> truth;
};

struct Scenario {
  std::vector<DayScenario> days;
  std::vector<WeatherPoint> weather;  // hourly, airport sectors only
};

namespace synthdetail {

// Mirrors the pipeline's default dwell; duplicated on purpose so the oracle
// side has no code dependency on the counting side.
inline constexpr int kTruthDwellMin = 20;

inline constexpr const char* kCarriers[] = {"AAL", "DAL", "UAL", "SWA", "JBU",
                                            "ASA", "FFT", "NKS", "ENY", "SKW"};

inline int sample_hour(const std::array<double, 24>& weights, SplitMix64& rng) {
  double total = 0;
  for (double w : weights) total += w;
  double r = rng.next_double() * total;
  for (int h = 0; h < 24; ++h) {
    r -= weights[h];
    if (r < 0) return h;
  }
  return 23;
}

struct FlightPlan {
  std::string ref;
  Timestamp departure = 0;
  Timestamp arrival = 0;
  std::vector<std::string> route;
  std::vector<int> offsets_min;  // entry offsets, offsets_min[0] == 0
};

// Route, dwell chain and departure slot. In stable mode everything except
// the jitter comes from a per-index template stream, so every day sees the
// same schedule.
inline FlightPlan plan_flight(const ScenarioSpec& spec, int day_index, int flight_index,
                              SplitMix64& flight_rng) {
  SplitMix64 template_rng(derive_seed(spec.seed ^ 0x5CEDF11Full, 0, flight_index));
  SplitMix64& plan_rng = spec.stable_schedule ? template_rng : flight_rng;

  FlightPlan plan;
  const char* carrier = kCarriers[plan_rng.next_below(std::size(kCarriers))];
  plan.ref = std::string(carrier) + std::to_string(10000 * (day_index + 1) + flight_index);

  int legs = static_cast<int>(
      plan_rng.next_int(spec.route_len_min, spec.route_len_max));
  int total_min = 0;
  plan.offsets_min.push_back(0);
  std::size_t prev = spec.sectors.size();
  for (int k = 0; k < legs; ++k) {
    std::size_t s = plan_rng.next_below(spec.sectors.size());
    if (s == prev) s = (s + 1) % spec.sectors.size();
    prev = s;
    plan.route.push_back(spec.sectors[s]);
    int dwell = static_cast<int>(plan_rng.next_int(spec.dwell_min, spec.dwell_max));
    total_min += dwell;
    if (k + 1 < legs) plan.offsets_min.push_back(total_min);
  }

  // Margin keeps the arrival message chain inside the UTC day: up to 59 s of
  // in-minute jitter on departure and arrival each, plus 90 s to the arrival
  // message, plus one minute per duplicate.
  int latest = kMinutesPerDay - 4 - spec.duplicate_arrivals - total_min;
  int dep_minute = sample_hour(spec.hourly_demand, plan_rng) * 60 +
                   static_cast<int>(plan_rng.next_below(60));
  if (spec.stable_schedule && spec.schedule_jitter_min > 0)
    dep_minute += static_cast<int>(
        flight_rng.next_int(-spec.schedule_jitter_min, spec.schedule_jitter_min));
  dep_minute = std::max(5, std::min(dep_minute, latest));

  Timestamp base = day_start(add_days(spec.start_day, day_index));
  plan.departure = base + 60 * dep_minute + static_cast<Timestamp>(flight_rng.next_below(60));
  plan.arrival = plan.departure + 60 * total_min + static_cast<Timestamp>(flight_rng.next_below(60));
  return plan;
}

inline RawMessage make_dep(const std::string& ref, Timestamp msg_time, Timestamp dep_time,
                           TimeQualifier q) {
  RawMessage m;
  m.type = MsgType::DepartureInformation;
  m.flight_ref = ref;
  m.msg_time = msg_time;
  m.payload = DeparturePayload{dep_time, q};
  return m;
}

inline std::vector<RawMessage> emit_clean_messages(const ScenarioSpec& spec,
                                                   const FlightPlan& plan, SplitMix64& rng) {
  std::vector<RawMessage> out;
  const std::string& ref = plan.ref;

  Timestamp t_dep = plan.departure - rng.next_int(30, 120);
  out.push_back(make_dep(ref, t_dep, plan.departure, TimeQualifier::Actual));
  Timestamp t = t_dep;
  for (int k = 0; k < spec.duplicate_departures; ++k) {
    t += rng.next_int(20, 60);
    out.push_back(make_dep(ref, t, plan.departure, TimeQualifier::Actual));
  }

  int n_tracks = static_cast<int>(rng.next_int(spec.tracks_min, spec.tracks_max));
  Timestamp first_track = plan.departure + rng.next_int(30, 90);
  double lat = -35.0 + static_cast<double>(fnv1a64(plan.route.front()) % 140);
  double lon = -170.0 + static_cast<double>(fnv1a64(plan.ref) % 320);
  double heading = static_cast<double>(rng.next_below(360));
  double speed = 380 + static_cast<double>(rng.next_below(90));
  std::vector<Timestamp> track_times;
  if (n_tracks > 0) track_times.push_back(first_track);
  Timestamp lo = first_track + 60;
  Timestamp hi = std::max(plan.arrival - 60, lo + 1);
  for (int k = 1; k < n_tracks; ++k)
    track_times.push_back(lo + static_cast<Timestamp>(rng.next_below(
                                   static_cast<std::uint64_t>(hi - lo))));
  std::sort(track_times.begin(), track_times.end());
  double duration = static_cast<double>(plan.arrival - plan.departure);
  for (std::size_t k = 0; k < track_times.size(); ++k) {
    RawMessage m;
    m.type = MsgType::TrackInformation;
    m.flight_ref = ref;
    m.msg_time = track_times[k];
    TrackPayload p;
    double progress = static_cast<double>(track_times[k] - plan.departure) / duration;
    p.latitude = std::min(89.0, std::max(-89.0, lat + progress * 4.0));
    p.longitude = std::min(179.0, std::max(-179.0, lon + progress * 6.0));
    p.altitude = 2000 + 32000 * std::sin(kPi * std::min(1.0, std::max(0.0, progress)));
    p.ground_speed = speed + 25 * std::sin(2 * kPi * progress);
    p.heading = std::fmod(heading + progress * 20.0, 360.0);
    m.payload = p;
    out.push_back(std::move(m));
  }

  RawMessage sectors_msg;
  sectors_msg.type = MsgType::FlightSectors;
  sectors_msg.flight_ref = ref;
  sectors_msg.msg_time =
      (n_tracks > 0 ? first_track : plan.departure + 30) + rng.next_int(30, 90);
  SectorsPayload sp;
  for (std::size_t k = 0; k < plan.route.size(); ++k)
    sp.milestones.push_back({plan.route[k], plan.offsets_min[k]});
  sectors_msg.payload = sp;
  out.push_back(std::move(sectors_msg));

  Timestamp t_arr = plan.arrival + rng.next_int(30, 90);
  RawMessage arr;
  arr.type = MsgType::ArrivalInformation;
  arr.flight_ref = ref;
  arr.msg_time = t_arr;
  ArrivalPayload ap;
  ap.arrival_time = plan.arrival;
  ap.arrival_qualifier = TimeQualifier::Actual;
  if (rng.next_below(2)) {
    ap.departure_time = plan.departure;
    ap.departure_qualifier = TimeQualifier::Actual;
  }
  arr.payload = ap;
  out.push_back(arr);
  t = t_arr;
  for (int k = 0; k < spec.duplicate_arrivals; ++k) {
    t += rng.next_int(20, 60);
    RawMessage dup = out.back();
    dup.msg_time = t;
    out.push_back(std::move(dup));
  }
  return out;
}

}  // namespace synthdetail

// Applies exactly one confusion case to a clean flight's message list.
// Payload semantics per case: (1) an extra ESTIMATED departure precedes the
// ACTUAL one; (2) the arrival time moves before the departure; (3) the
// departure messages are issued after the arrival message; (4) a duplicate
// departure carries a conflicting time and, being the most recent, shifts
// what a reader concludes.
inline std::vector<RawMessage> inject_anomalies(const std::vector<RawMessage>& clean,
                                                int confusion_case, std::uint64_t seed) {
  if (confusion_case < 1 || confusion_case > 4) throw UnknownCase(confusion_case);
  SplitMix64 rng(seed);
  std::vector<RawMessage> out = clean;

  auto first_dep = std::find_if(out.begin(), out.end(), [](const RawMessage& m) {
    return m.type == MsgType::DepartureInformation;
  });
  auto last_arr = std::find_if(out.rbegin(), out.rend(), [](const RawMessage& m) {
    return m.type == MsgType::ArrivalInformation;
  });

  switch (confusion_case) {
    case 1: {
      if (first_dep == out.end()) return out;
      const auto& actual = std::get<DeparturePayload>(first_dep->payload);
      RawMessage est;
      est.type = MsgType::DepartureInformation;
      est.flight_ref = first_dep->flight_ref;
      Timestamp floor_time = day_start(date_of(first_dep->msg_time));
      est.msg_time = std::max(floor_time, first_dep->msg_time - rng.next_int(300, 900));
      est.payload = DeparturePayload{actual.departure_time - rng.next_int(300, 1200),
                                     TimeQualifier::Estimated};
      out.insert(out.begin(), std::move(est));
      break;
    }
    case 2: {
      if (first_dep == out.end() || last_arr == out.rend()) return out;
      Timestamp dep_time = std::get<DeparturePayload>(first_dep->payload).departure_time;
      Timestamp bogus = dep_time - rng.next_int(600, 1800);
      for (RawMessage& m : out)
        if (m.type == MsgType::ArrivalInformation)
          std::get<ArrivalPayload>(m.payload).arrival_time = bogus;
      break;
    }
    case 3: {
      if (first_dep == out.end() || last_arr == out.rend()) return out;
      // When the arrival lands close to midnight the desired times would
      // spill into the next day; packing them against the end of the day
      // keeps the inverted order and the one-day confinement.
      Timestamp day_end = day_start(date_of(last_arr->msg_time)) + kSecondsPerDay - 1;
      int deps = 0;
      for (const RawMessage& m : out)
        if (m.type == MsgType::DepartureInformation) ++deps;
      Timestamp after = last_arr->msg_time + rng.next_int(30, 120);
      int placed = 0;
      for (RawMessage& m : out)
        if (m.type == MsgType::DepartureInformation) {
          m.msg_time = std::min(after, day_end - (deps - 1 - placed));
          after += rng.next_int(5, 30);
          ++placed;
        }
      break;
    }
    case 4: {
      if (first_dep == out.end()) return out;
      RawMessage conflict = *first_dep;
      auto& p = std::get<DeparturePayload>(conflict.payload);
      Timestamp limit = 1800;
      if (last_arr != out.rend()) {
        Timestamp room = std::get<ArrivalPayload>(last_arr->payload).arrival_time -
                         p.departure_time - 120;
        limit = std::max<Timestamp>(2, std::min<Timestamp>(limit, room));
      }
      p.departure_time += rng.next_int(1, limit);
      // Latest message time among departures, so a most-recent reader
      // adopts the conflicting value.
      Timestamp latest_dep = 0;
      for (const RawMessage& m : out)
        if (m.type == MsgType::DepartureInformation) latest_dep = std::max(latest_dep, m.msg_time);
      conflict.msg_time = latest_dep + rng.next_int(20, 60);
      out.push_back(std::move(conflict));
      break;
    }
  }
  return out;
}

namespace synthdetail {

// What a most-recent-message reader concludes; restated here with local code
// so truth for anomalous flights never leans on the pipeline under test.
inline TruthFlight derive_truth(const FlightPlan& plan, const std::vector<RawMessage>& sorted_msgs,
                                int anomaly_case) {
  TruthFlight truth;
  truth.ref = plan.ref;
  truth.anomaly_case = anomaly_case;

  const DeparturePayload* last_dep = nullptr;
  const ArrivalPayload* last_arr = nullptr;
  bool have_sectors = false;
  for (const RawMessage& m : sorted_msgs) {
    if (m.type == MsgType::DepartureInformation)
      last_dep = &std::get<DeparturePayload>(m.payload);
    if (m.type == MsgType::ArrivalInformation) last_arr = &std::get<ArrivalPayload>(m.payload);
    if (m.type == MsgType::FlightSectors) have_sectors = true;
  }

  std::optional<Timestamp> dep_eff;
  if (last_dep && last_dep->qualifier == TimeQualifier::Actual)
    dep_eff = last_dep->departure_time;
  else if (last_arr && last_arr->departure_time &&
           last_arr->departure_qualifier == TimeQualifier::Actual)
    dep_eff = *last_arr->departure_time;
  std::optional<Timestamp> arr_eff;
  if (last_arr) arr_eff = last_arr->arrival_time;

  switch (anomaly_case) {
    case 0: truth.uncertainty = 1; break;
    case 2: truth.uncertainty = 3; break;
    default: truth.uncertainty = 2; break;
  }

  if (!dep_eff || !have_sectors) return truth;  // not counted
  truth.departure = *dep_eff;
  truth.arrival = arr_eff;
  if (arr_eff && *arr_eff <= *dep_eff) {
    truth.uncertainty = 3;
    return truth;  // contradictory, not counted
  }

  truth.counted = true;
  for (std::size_t k = 0; k < plan.route.size(); ++k) {
    TruthInterval iv;
    iv.sector = plan.route[k];
    iv.entry = *dep_eff + 60 * static_cast<Timestamp>(plan.offsets_min[k]);
    if (k + 1 < plan.route.size()) {
      iv.exit = *dep_eff + 60 * static_cast<Timestamp>(plan.offsets_min[k + 1]);
    } else if (arr_eff && *arr_eff > iv.entry) {
      iv.exit = *arr_eff;
    } else {
      iv.exit = iv.entry + 60 * kTruthDwellMin;
    }
    truth.intervals.push_back(std::move(iv));
  }
  return truth;
}

inline void sort_messages(std::vector<RawMessage>& msgs) {
  std::stable_sort(msgs.begin(), msgs.end(), [](const RawMessage& a, const RawMessage& b) {
    return a.msg_time < b.msg_time;
  });
}

inline std::vector<WeatherPoint> day_weather(const ScenarioSpec& spec, int day_index) {
  std::vector<WeatherPoint> out;
  UtcDate day = add_days(spec.start_day, day_index);
  int doy = day_of_year(day);
  for (int s = 0; s < spec.weather_sectors; ++s) {
    SplitMix64 rng(derive_seed(spec.seed ^ 0x57EA0000ull, static_cast<std::uint64_t>(day_index),
                               static_cast<std::uint64_t>(s)));
    double base_temp = 8.0 + 12.0 * std::sin(2 * kPi * (doy - 100) / 365.0) +
                       (rng.next_double() - 0.5) * 6.0;
    double dir = static_cast<double>(rng.next_below(360));
    double humidity = 35.0 + rng.next_double() * 50.0;
    double pressure = 995.0 + rng.next_double() * 36.0;
    for (int h = 0; h < 24; ++h) {
      WeatherPoint p;
      p.time = day_start(day) + 3600 * h;
      p.sector = spec.sectors[static_cast<std::size_t>(s)];
      double diurnal = 6.0 * std::sin(2 * kPi * (h - 8) / 24.0);
      p.obs.temperature_c = base_temp + diurnal + (rng.next_double() - 0.5);
      p.obs.wind_speed_kts =
          std::max(0.0, 6.0 + 14.0 * std::fabs(std::sin(2 * kPi * (h + s) / 24.0)) +
                            (rng.next_double() - 0.5) * 4.0);
      dir = std::fmod(dir + (rng.next_double() - 0.5) * 50.0 + 360.0, 360.0);
      // Whole degrees, as a real METAR feed reports, and so the CSV encoding
      // is exact.
      p.obs.wind_dir_deg = std::floor(dir);
      humidity = std::min(98.0, std::max(20.0, humidity + (rng.next_double() - 0.5) * 8.0));
      p.obs.humidity_pct = humidity;
      pressure += (rng.next_double() - 0.5) * 1.2;
      p.obs.pressure_hpa = pressure;
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace synthdetail

inline Scenario generate_scenario(const ScenarioSpec& spec) {
  spec.validate();
  Scenario scn;
  for (int d = 0; d < spec.day_count; ++d) {
    DayScenario day_out;
    day_out.day = add_days(spec.start_day, d);
    for (int i = 0; i < spec.flights_per_day; ++i) {
      SplitMix64 flight_rng(derive_seed(spec.seed, 0xF1100000ull + static_cast<std::uint64_t>(d),
                                        static_cast<std::uint64_t>(i)));
      synthdetail::FlightPlan plan = synthdetail::plan_flight(spec, d, i, flight_rng);
      std::vector<RawMessage> msgs = synthdetail::emit_clean_messages(spec, plan, flight_rng);

      int anomaly_case = 0;
      double u = flight_rng.next_double();
      double acc = 0;
      for (int c = 0; c < 4; ++c) {
        acc += spec.case_rates[static_cast<std::size_t>(c)];
        if (u < acc) {
          anomaly_case = c + 1;
          break;
        }
      }
      if (anomaly_case != 0)
        msgs = inject_anomalies(msgs, anomaly_case,
                                derive_seed(spec.seed ^ 0xA40371Cull,
                                            static_cast<std::uint64_t>(d),
                                            static_cast<std::uint64_t>(i)));

      synthdetail::sort_messages(msgs);
      day_out.truth.push_back(synthdetail::derive_truth(plan, msgs, anomaly_case));
      for (RawMessage& m : msgs) day_out.messages.push_back(std::move(m));
    }
    synthdetail::sort_messages(day_out.messages);
    scn.days.push_back(std::move(day_out));
    auto wx = synthdetail::day_weather(spec, d);
    scn.weather.insert(scn.weather.end(), wx.begin(), wx.end());
  }
  return scn;
}

// Brute force: for every minute of the day and every counted flight, test
// interval membership directly (floored entry inclusive, exit exclusive;
// when several intervals claim the minute the later one in route order
// wins) and tally.
inline std::map<std::string, SectorCountSeries> oracle_sector_counts(
    const std::vector<TruthFlight>& flights, UtcDate day) {
  std::map<std::string, SectorCountSeries> out;
  const Timestamp start = day_start(day);
  for (int m = 0; m < kMinutesPerDay; ++m) {
    const Timestamp t = start + 60 * m;
    for (const TruthFlight& f : flights) {
      if (!f.counted) continue;
      const TruthInterval* hit = nullptr;
      for (const TruthInterval& iv : f.intervals) {
        Timestamp entry_floor = iv.entry - (iv.entry % 60);
        if (entry_floor <= t && t < iv.exit) hit = &iv;
      }
      if (!hit) continue;
      auto [it, inserted] = out.try_emplace(hit->sector);
      if (inserted) {
        it->second.sector = hit->sector;
        it->second.day = day;
      }
      it->second.add(m, f.ref, level_from_value(f.uncertainty));
    }
  }
  return out;
}

// ---- Scenario spec file (JSON) ----

inline ScenarioSpec scenario_spec_from_json(const nlohmann::json& j) {
  ScenarioSpec spec;
  if (!j.is_object()) throw InvalidSpec("spec is not a JSON object");
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("startDay")) {
    auto d = parse_date(j.at("startDay").get<std::string>());
    if (!d) throw InvalidSpec("bad startDay");
    spec.start_day = *d;
  }
  if (j.contains("dayCount")) spec.day_count = j.at("dayCount").get<int>();
  if (j.contains("flightsPerDay")) spec.flights_per_day = j.at("flightsPerDay").get<int>();
  if (j.contains("sectors")) {
    const auto& s = j.at("sectors");
    if (s.is_array()) {
      spec.sectors = s.get<std::vector<std::string>>();
    } else if (s.is_object()) {
      std::string prefix = s.at("prefix").get<std::string>();
      int count = s.at("count").get<int>();
      if (count < 1) throw InvalidSpec("sector count must be >= 1");
      for (int i = 1; i <= count; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%02d", i);
        spec.sectors.push_back(prefix + buf);
      }
    } else {
      throw InvalidSpec("sectors must be a list or {prefix, count}");
    }
  }
  if (j.contains("hourlyDemand")) {
    auto v = j.at("hourlyDemand").get<std::vector<double>>();
    if (v.size() != 24) throw InvalidSpec("hourlyDemand needs 24 weights");
    std::copy(v.begin(), v.end(), spec.hourly_demand.begin());
  }
  if (j.contains("anomalyRates")) {
    const auto& r = j.at("anomalyRates");
    for (int c = 1; c <= 4; ++c) {
      std::string key = "case" + std::to_string(c);
      if (r.contains(key)) spec.case_rates[static_cast<std::size_t>(c - 1)] = r.at(key).get<double>();
    }
  }
  auto pair_of = [&j](const char* key, int& lo, int& hi) {
    if (!j.contains(key)) return;
    auto v = j.at(key).get<std::vector<int>>();
    if (v.size() != 2) throw InvalidSpec(std::string(key) + " needs [min, max]");
    lo = v[0];
    hi = v[1];
  };
  pair_of("routeLength", spec.route_len_min, spec.route_len_max);
  pair_of("dwellMinutes", spec.dwell_min, spec.dwell_max);
  pair_of("tracksPerFlight", spec.tracks_min, spec.tracks_max);
  if (j.contains("duplicateDepartures"))
    spec.duplicate_departures = j.at("duplicateDepartures").get<int>();
  if (j.contains("duplicateArrivals")) spec.duplicate_arrivals = j.at("duplicateArrivals").get<int>();
  if (j.contains("stableSchedule")) spec.stable_schedule = j.at("stableSchedule").get<bool>();
  if (j.contains("scheduleJitterMinutes"))
    spec.schedule_jitter_min = j.at("scheduleJitterMinutes").get<int>();
  if (j.contains("weatherSectors")) spec.weather_sectors = j.at("weatherSectors").get<int>();
  spec.validate();
  return spec;
}

inline ScenarioSpec load_scenario_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidSpec("cannot open spec file " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw InvalidSpec("spec file is not valid JSON");
  return scenario_spec_from_json(j);
}

// ---- Scenario artifacts on disk ----

namespace synthdetail {

inline nlohmann::json truth_flight_to_json(const TruthFlight& f) {
  nlohmann::json j;
  j["ref"] = f.ref;
  j["case"] = f.anomaly_case;
  j["counted"] = f.counted;
  j["uncertainty"] = f.uncertainty;
  j["departure"] = f.departure == 0 ? "" : format_timestamp(f.departure);
  j["arrival"] = f.arrival ? format_timestamp(*f.arrival) : "";
  nlohmann::json ivs = nlohmann::json::array();
  for (const TruthInterval& iv : f.intervals) {
    nlohmann::json e;
    e["sector"] = iv.sector;
    e["entry"] = format_timestamp(iv.entry);
    e["exit"] = format_timestamp(iv.exit);
    ivs.push_back(std::move(e));
  }
  j["intervals"] = std::move(ivs);
  return j;
}

inline TruthFlight truth_flight_from_json(const nlohmann::json& j) {
  TruthFlight f;
  f.ref = j.at("ref").get<std::string>();
  f.anomaly_case = j.at("case").get<int>();
  f.counted = j.at("counted").get<bool>();
  f.uncertainty = j.at("uncertainty").get<int>();
  std::string dep = j.at("departure").get<std::string>();
  if (!dep.empty()) f.departure = require_timestamp(dep);
  std::string arr = j.at("arrival").get<std::string>();
  if (!arr.empty()) f.arrival = require_timestamp(arr);
  for (const nlohmann::json& e : j.at("intervals")) {
    TruthInterval iv;
    iv.sector = e.at("sector").get<std::string>();
    iv.entry = require_timestamp(e.at("entry").get<std::string>());
    iv.exit = require_timestamp(e.at("exit").get<std::string>());
    f.intervals.push_back(std::move(iv));
  }
  return f;
}

}  // namespace synthdetail

// Layout: messages-<day>.jsonl per day, truth.json, wx/<day>.csv when
// weather is enabled.
inline void write_scenario(const Scenario& scn, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json truth;
  truth["version"] = 1;
  nlohmann::json days = nlohmann::json::array();
  for (const DayScenario& d : scn.days) {
    std::ofstream out(dir / ("messages-" + format_date(d.day) + ".jsonl"),
                      std::ios::binary | std::ios::trunc);
    for (const RawMessage& m : d.messages) out << serialize_message(m) << '\n';
    if (!out) throw std::runtime_error("failed writing messages for " + format_date(d.day));
    nlohmann::json jd;
    jd["day"] = format_date(d.day);
    nlohmann::json flights = nlohmann::json::array();
    for (const TruthFlight& f : d.truth) flights.push_back(synthdetail::truth_flight_to_json(f));
    jd["flights"] = std::move(flights);
    days.push_back(std::move(jd));
  }
  truth["days"] = std::move(days);
  std::ofstream tf(dir / "truth.json", std::ios::binary | std::ios::trunc);
  tf << truth.dump(2) << '\n';
  if (!tf) throw std::runtime_error("failed writing truth.json");

  if (!scn.weather.empty()) {
    std::filesystem::create_directories(dir / "wx");
    std::map<std::string, std::vector<WeatherPoint>> by_day;
    for (const WeatherPoint& p : scn.weather)
      by_day[format_date(date_of(p.time))].push_back(p);
    for (const auto& [day, points] : by_day)
      write_weather_csv(dir / "wx" / (day + ".csv"), points);
  }
}

struct DayTruth {
  UtcDate day;
  std::vector<TruthFlight> flights;
};

inline std::vector<DayTruth> load_truth(const std::filesystem::path& dir) {
  std::ifstream in(dir / "truth.json", std::ios::binary);
  if (!in) throw std::runtime_error("cannot open truth.json under " + dir.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  nlohmann::json j = nlohmann::json::parse(text);
  std::vector<DayTruth> out;
  for (const nlohmann::json& jd : j.at("days")) {
    DayTruth d;
    d.day = require_date(jd.at("day").get<std::string>());
    for (const nlohmann::json& jf : jd.at("flights"))
      d.flights.push_back(synthdetail::truth_flight_from_json(jf));
    out.push_back(std::move(d));
  }
  return out;
}

inline std::vector<std::string> message_lines(const DayScenario& day) {
  std::vector<std::string> lines;
  lines.reserve(day.messages.size());
  for (const RawMessage& m : day.messages) lines.push_back(serialize_message(m));
  return lines;
}

}  // namespace sectorcast
