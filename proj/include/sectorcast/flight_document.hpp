#pragma once

// Consolidated per-flight document (the FI collection unit). One slot per
// message type holds the most recent message of that type together with its
// canonical serialized line; `dms_buckets` is filled by correlation and lists
// the per-minute sector occupancy of this flight.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "message.hpp"
#include "sector_counts.hpp"
#include "time.hpp"

namespace sectorcast {

inline constexpr int kBuildVersion = 1;

struct MessageSlot {
  std::string raw_line;  // canonical line form, always re-parses to `parsed`
  RawMessage parsed;

  bool operator==(const MessageSlot&) const = default;
};

struct BucketEntry {
  Timestamp time = 0;  // minute-aligned UTC
  std::string sector;
  bool has_track = false;
  std::optional<TrackPayload> track;  // present iff has_track

  bool operator==(const BucketEntry&) const = default;
};

struct FlightDocument {
  std::string flight_ref;
  std::optional<MessageSlot> departure;
  std::optional<MessageSlot> arrival;
  std::optional<MessageSlot> track;
  std::optional<MessageSlot> sectors;
  std::vector<BucketEntry> dms_buckets;
  UncertaintyLevel uncertainty = UncertaintyLevel::Consistent;
  int build_version = kBuildVersion;

  bool operator==(const FlightDocument&) const = default;
};

struct NoMessages : std::runtime_error {
  explicit NoMessages(const std::string& ref)
      : std::runtime_error("no messages for flight " + ref) {}
};

// Builds a document from a flight's raw-window messages. `msgs` must be
// sorted ascending by (msg_time, seq), as the raw store returns them; each
// slot then ends up holding the maximal message of its type under that order.
inline FlightDocument document_from_messages(const std::string& flight_ref,
                                             const std::vector<RawMessage>& msgs) {
  if (msgs.empty()) throw NoMessages(flight_ref);
  FlightDocument doc;
  doc.flight_ref = flight_ref;
  for (const RawMessage& m : msgs) {
    MessageSlot slot{serialize_message(m), m};
    switch (m.type) {
      case MsgType::DepartureInformation: doc.departure = std::move(slot); break;
      case MsgType::ArrivalInformation: doc.arrival = std::move(slot); break;
      case MsgType::TrackInformation: doc.track = std::move(slot); break;
      case MsgType::FlightSectors: doc.sectors = std::move(slot); break;
    }
  }
  return doc;
}

namespace detail {

inline nlohmann::json slot_to_json(const MessageSlot& s) {
  nlohmann::json j;
  j["raw"] = s.raw_line;
  j["msgTimeParsed"] = s.parsed.msg_time;
  j["seq"] = s.parsed.seq;
  return j;
}

inline MessageSlot slot_from_json(const nlohmann::json& j) {
  MessageSlot s;
  s.raw_line = j.at("raw").get<std::string>();
  ParseResult r = parse_message(s.raw_line);
  if (!parse_ok(r)) throw std::runtime_error("flight document: slot raw line unparseable");
  s.parsed = std::get<RawMessage>(r);
  s.parsed.seq = j.at("seq").get<std::uint64_t>();
  if (s.parsed.msg_time != j.at("msgTimeParsed").get<Timestamp>())
    throw std::runtime_error("flight document: parsed time disagrees with raw line");
  return s;
}

inline nlohmann::json track_to_json(const TrackPayload& t) {
  nlohmann::json j;
  j["latitude"] = t.latitude;
  j["longitude"] = t.longitude;
  j["altitude"] = t.altitude;
  j["groundSpeed"] = t.ground_speed;
  j["heading"] = t.heading;
  return j;
}

inline TrackPayload track_from_json(const nlohmann::json& j) {
  TrackPayload t;
  t.latitude = j.at("latitude").get<double>();
  t.longitude = j.at("longitude").get<double>();
  t.altitude = j.at("altitude").get<double>();
  t.ground_speed = j.at("groundSpeed").get<double>();
  t.heading = j.at("heading").get<double>();
  return t;
}

}  // namespace detail

inline std::string serialize_document(const FlightDocument& doc) {
  nlohmann::json j;
  j["buildVersion"] = doc.build_version;
  j["flightRef"] = doc.flight_ref;
  j["uncertainty"] = level_value(doc.uncertainty);
  if (doc.departure) j["departureInformation"] = detail::slot_to_json(*doc.departure);
  if (doc.arrival) j["arrivalInformation"] = detail::slot_to_json(*doc.arrival);
  if (doc.track) j["trackInformation"] = detail::slot_to_json(*doc.track);
  if (doc.sectors) j["flightSectors"] = detail::slot_to_json(*doc.sectors);
  nlohmann::json buckets = nlohmann::json::array();
  for (const BucketEntry& b : doc.dms_buckets) {
    nlohmann::json e;
    e["time"] = format_timestamp(b.time);
    e["sector"] = b.sector;
    e["hasTrack"] = b.has_track;
    if (b.track) e["track"] = detail::track_to_json(*b.track);
    buckets.push_back(std::move(e));
  }
  j["dmsBuckets"] = std::move(buckets);
  return j.dump() + "\n";
}

inline FlightDocument parse_document(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw std::runtime_error("flight document: not a JSON object");
  FlightDocument doc;
  doc.build_version = j.at("buildVersion").get<int>();
  doc.flight_ref = j.at("flightRef").get<std::string>();
  doc.uncertainty = level_from_value(j.at("uncertainty").get<int>());
  if (j.contains("departureInformation"))
    doc.departure = detail::slot_from_json(j.at("departureInformation"));
  if (j.contains("arrivalInformation"))
    doc.arrival = detail::slot_from_json(j.at("arrivalInformation"));
  if (j.contains("trackInformation"))
    doc.track = detail::slot_from_json(j.at("trackInformation"));
  if (j.contains("flightSectors"))
    doc.sectors = detail::slot_from_json(j.at("flightSectors"));
  for (const nlohmann::json& e : j.at("dmsBuckets")) {
    BucketEntry b;
    b.time = require_timestamp(e.at("time").get<std::string>());
    b.sector = e.at("sector").get<std::string>();
    b.has_track = e.at("hasTrack").get<bool>();
    if (e.contains("track")) b.track = detail::track_from_json(e.at("track"));
    if (b.has_track != b.track.has_value())
      throw std::runtime_error("flight document: hasTrack flag disagrees with track field");
    doc.dms_buckets.push_back(std::move(b));
  }
  return doc;
}

}  // namespace sectorcast
