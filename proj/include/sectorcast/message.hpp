#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sectorcast/time.hpp"

namespace sectorcast {

// The four flight-lifecycle message kinds the counting pipeline consumes.
enum class MsgType { DepartureInformation, ArrivalInformation, TrackInformation, FlightSectors };

enum class TimeQualifier { Actual, Estimated };

inline const char* msg_type_name(MsgType t) {
  switch (t) {
    case MsgType::DepartureInformation: return "DepartureInformation";
    case MsgType::ArrivalInformation: return "ArrivalInformation";
    case MsgType::TrackInformation: return "TrackInformation";
    case MsgType::FlightSectors: return "FlightSectors";
  }
  return "?";
}

inline std::optional<MsgType> msg_type_from_name(std::string_view s) {
  if (s == "DepartureInformation") return MsgType::DepartureInformation;
  if (s == "ArrivalInformation") return MsgType::ArrivalInformation;
  if (s == "TrackInformation") return MsgType::TrackInformation;
  if (s == "FlightSectors") return MsgType::FlightSectors;
  return std::nullopt;
}

inline const char* qualifier_name(TimeQualifier q) {
  return q == TimeQualifier::Actual ? "ACTUAL" : "ESTIMATED";
}

inline std::optional<TimeQualifier> qualifier_from_name(std::string_view s) {
  if (s == "ACTUAL") return TimeQualifier::Actual;
  if (s == "ESTIMATED") return TimeQualifier::Estimated;
  return std::nullopt;
}

struct DeparturePayload {
  Timestamp departure_time = 0;
  TimeQualifier qualifier = TimeQualifier::Actual;

  friend bool operator==(const DeparturePayload&, const DeparturePayload&) = default;
};

// Arrival messages accumulate flight history: besides the arrival time they
// may carry the departure time with its own qualifier.
struct ArrivalPayload {
  Timestamp arrival_time = 0;
  TimeQualifier arrival_qualifier = TimeQualifier::Actual;
  std::optional<Timestamp> departure_time;
  std::optional<TimeQualifier> departure_qualifier;

  friend bool operator==(const ArrivalPayload&, const ArrivalPayload&) = default;
};

struct TrackPayload {
  double latitude = 0;      // degrees, [-90, 90]
  double longitude = 0;     // degrees, [-180, 180]
  double altitude = 0;      // feet, >= 0
  double ground_speed = 0;  // knots, >= 0
  double heading = 0;       // degrees, [0, 360)

  friend bool operator==(const TrackPayload&, const TrackPayload&) = default;
};

// Sector milestones carry entry times in minutes relative to departure.
struct SectorMilestone {
  std::string sector;
  int entry_offset_min = 0;

  friend bool operator==(const SectorMilestone&, const SectorMilestone&) = default;
};

struct SectorsPayload {
  std::vector<SectorMilestone> milestones;

  friend bool operator==(const SectorsPayload&, const SectorsPayload&) = default;
};

using Payload = std::variant<DeparturePayload, ArrivalPayload, TrackPayload, SectorsPayload>;

struct RawMessage {
  MsgType type = MsgType::DepartureInformation;
  std::string flight_ref;
  Timestamp msg_time = 0;
  // Ingestion ordinal. Assigned by the raw store, not part of the wire record.
  std::uint64_t seq = 0;
  Payload payload;

  friend bool operator==(const RawMessage&, const RawMessage&) = default;
};

enum class ParseErrorKind { MalformedRecord, UnknownMessageType, InvariantViolation };

struct ParseError {
  ParseErrorKind kind = ParseErrorKind::MalformedRecord;
  std::string field;  // offending field, empty when the whole record is unusable
  std::string detail;
};

using ParseResult = std::variant<RawMessage, ParseError>;

inline bool parse_ok(const ParseResult& r) { return std::holds_alternative<RawMessage>(r); }

namespace detail {

using nlohmann::json;

inline ParseError malformed(std::string field, std::string detail) {
  return ParseError{ParseErrorKind::MalformedRecord, std::move(field), std::move(detail)};
}

inline ParseError violation(std::string field, std::string detail) {
  return ParseError{ParseErrorKind::InvariantViolation, std::move(field), std::move(detail)};
}

inline bool get_number(const json& obj, const char* key, double& out, ParseError& err) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    err = malformed(key, "missing or non-numeric field");
    return false;
  }
  out = it->get<double>();
  return true;
}

inline bool get_string(const json& obj, const char* key, std::string& out, ParseError& err) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    err = malformed(key, "missing or non-string field");
    return false;
  }
  out = it->get<std::string>();
  return true;
}

inline bool get_time(const json& obj, const char* key, Timestamp& out, ParseError& err) {
  std::string s;
  if (!get_string(obj, key, s, err)) return false;
  auto t = parse_timestamp(s);
  if (!t) {
    err = malformed(key, "not an RFC 3339 UTC timestamp: " + s);
    return false;
  }
  out = *t;
  return true;
}

inline bool get_qualifier(const json& obj, const char* key, TimeQualifier& out, ParseError& err) {
  std::string s;
  if (!get_string(obj, key, s, err)) return false;
  auto q = qualifier_from_name(s);
  if (!q) {
    err = violation(key, "qualifier must be ACTUAL or ESTIMATED, got: " + s);
    return false;
  }
  out = *q;
  return true;
}

inline std::optional<ParseError> parse_payload(MsgType type, const json& p, Payload& out) {
  ParseError err;
  switch (type) {
    case MsgType::DepartureInformation: {
      DeparturePayload d;
      if (!get_time(p, "departureTime", d.departure_time, err)) return err;
      if (!get_qualifier(p, "qualifier", d.qualifier, err)) return err;
      out = d;
      return std::nullopt;
    }
    case MsgType::ArrivalInformation: {
      ArrivalPayload a;
      if (!get_time(p, "arrivalTime", a.arrival_time, err)) return err;
      if (!get_qualifier(p, "arrivalQualifier", a.arrival_qualifier, err)) return err;
      const bool has_time = p.contains("departureTime");
      const bool has_qual = p.contains("departureQualifier");
      if (has_time != has_qual)
        return violation(has_time ? "departureQualifier" : "departureTime",
                         "embedded departure time and qualifier must appear together");
      if (has_time) {
        Timestamp t;
        TimeQualifier q;
        if (!get_time(p, "departureTime", t, err)) return err;
        if (!get_qualifier(p, "departureQualifier", q, err)) return err;
        a.departure_time = t;
        a.departure_qualifier = q;
      }
      out = a;
      return std::nullopt;
    }
    case MsgType::TrackInformation: {
      TrackPayload t;
      if (!get_number(p, "latitude", t.latitude, err)) return err;
      if (!get_number(p, "longitude", t.longitude, err)) return err;
      if (!get_number(p, "altitude", t.altitude, err)) return err;
      if (!get_number(p, "groundSpeed", t.ground_speed, err)) return err;
      if (!get_number(p, "heading", t.heading, err)) return err;
      if (t.latitude < -90 || t.latitude > 90) return violation("latitude", "outside [-90, 90]");
      if (t.longitude < -180 || t.longitude > 180)
        return violation("longitude", "outside [-180, 180]");
      if (t.altitude < 0) return violation("altitude", "negative");
      if (t.ground_speed < 0) return violation("groundSpeed", "negative");
      if (t.heading < 0 || t.heading >= 360) return violation("heading", "outside [0, 360)");
      out = t;
      return std::nullopt;
    }
    case MsgType::FlightSectors: {
      SectorsPayload s;
      auto it = p.find("milestones");
      if (it == p.end() || !it->is_array()) return malformed("milestones", "missing or not a list");
      if (it->empty()) return violation("milestones", "must be non-empty");
      int prev = -1;
      for (const auto& m : *it) {
        if (!m.is_object()) return malformed("milestones", "entry is not an object");
        SectorMilestone ms;
        if (!get_string(m, "sectorName", ms.sector, err)) return err;
        if (ms.sector.empty()) return violation("sectorName", "must be non-empty");
        auto off = m.find("entryOffsetMinutes");
        if (off == m.end() || !off->is_number_integer())
          return malformed("entryOffsetMinutes", "missing or not an integer");
        ms.entry_offset_min = off->get<int>();
        if (ms.entry_offset_min < 0) return violation("entryOffsetMinutes", "negative");
        if (ms.entry_offset_min <= prev)
          return violation("entryOffsetMinutes", "offsets must be strictly increasing");
        prev = ms.entry_offset_min;
        s.milestones.push_back(std::move(ms));
      }
      out = s;
      return std::nullopt;
    }
  }
  return malformed("msgType", "unreachable");
}

inline json payload_to_json(const RawMessage& m) {
  json p = json::object();
  switch (m.type) {
    case MsgType::DepartureInformation: {
      const auto& d = std::get<DeparturePayload>(m.payload);
      p["departureTime"] = format_timestamp(d.departure_time);
      p["qualifier"] = qualifier_name(d.qualifier);
      break;
    }
    case MsgType::ArrivalInformation: {
      const auto& a = std::get<ArrivalPayload>(m.payload);
      p["arrivalTime"] = format_timestamp(a.arrival_time);
      p["arrivalQualifier"] = qualifier_name(a.arrival_qualifier);
      if (a.departure_time) {
        p["departureTime"] = format_timestamp(*a.departure_time);
        p["departureQualifier"] = qualifier_name(*a.departure_qualifier);
      }
      break;
    }
    case MsgType::TrackInformation: {
      const auto& t = std::get<TrackPayload>(m.payload);
      p["latitude"] = t.latitude;
      p["longitude"] = t.longitude;
      p["altitude"] = t.altitude;
      p["groundSpeed"] = t.ground_speed;
      p["heading"] = t.heading;
      break;
    }
    case MsgType::FlightSectors: {
      const auto& s = std::get<SectorsPayload>(m.payload);
      json list = json::array();
      for (const auto& ms : s.milestones)
        list.push_back({{"sectorName", ms.sector}, {"entryOffsetMinutes", ms.entry_offset_min}});
      p["milestones"] = std::move(list);
      break;
    }
  }
  return p;
}

}  // namespace detail

// Parses one line of the message file format. Total: every input yields a
// message or a typed error, never an exception. Unknown extra keys are
// ignored; the real feed is noisy and evolving.
inline ParseResult parse_message(std::string_view line) {
  using detail::json;
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    return detail::malformed("", "record is not a key/value object");

  RawMessage msg;
  ParseError err;
  std::string type_name;
  if (!detail::get_string(j, "msgType", type_name, err)) return err;
  auto type = msg_type_from_name(type_name);
  if (!type)
    return ParseError{ParseErrorKind::UnknownMessageType, "msgType",
                      "unknown message type: " + type_name};
  msg.type = *type;

  if (!detail::get_string(j, "flightRef", msg.flight_ref, err)) return err;
  if (msg.flight_ref.empty()) return detail::violation("flightRef", "must be non-empty");

  if (!detail::get_time(j, "msgTime", msg.msg_time, err)) return err;
  {
    int year = date_of(msg.msg_time).year;
    if (year < kMinYear || year > kMaxYear)
      return detail::violation("msgTime", "outside supported epoch range");
  }

  auto pit = j.find("payload");
  if (pit == j.end() || !pit->is_object())
    return detail::malformed("payload", "missing or not an object");
  if (auto perr = detail::parse_payload(msg.type, *pit, msg.payload)) return *perr;
  return msg;
}

// Canonical single-line encoding: keys sorted, no whitespace, optional fields
// omitted. Deterministic and injective over valid messages, so it doubles as
// an identity for dedup checks. `seq` is not serialized.
inline std::string serialize_message(const RawMessage& m) {
  detail::json j;
  j["msgType"] = msg_type_name(m.type);
  j["flightRef"] = m.flight_ref;
  j["msgTime"] = format_timestamp(m.msg_time);
  j["payload"] = detail::payload_to_json(m);
  return j.dump();
}

struct StreamLineError {
  std::size_t line_number = 0;  // 1-based
  ParseError error;
};

struct StreamReport {
  std::map<MsgType, std::uint64_t> counts;
  std::uint64_t parsed = 0;
  std::vector<StreamLineError> errors;
};

// Ingestion diagnostics: per-type counts plus typed errors with line numbers.
inline StreamReport classify_stream(const std::vector<std::string>& lines) {
  StreamReport report;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    ParseResult r = parse_message(lines[i]);
    if (parse_ok(r)) {
      ++report.counts[std::get<RawMessage>(r).type];
      ++report.parsed;
    } else {
      report.errors.push_back({i + 1, std::get<ParseError>(r)});
    }
  }
  return report;
}

}  // namespace sectorcast
