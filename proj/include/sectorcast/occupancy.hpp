#pragma once

// Correlation and reduction: turns consolidated flight documents into
// absolute sector entry/exit intervals, per-minute bucket entries, and
// per-sector per-day count series, plus the message-order uncertainty level.

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "flight_document.hpp"
#include "message.hpp"
#include "sector_counts.hpp"
#include "time.hpp"

namespace sectorcast {

inline constexpr int kDefaultDwellMin = 20;

struct SectorInterval {
  std::string sector;
  Timestamp entry = 0;
  Timestamp exit = 0;  // entry < exit

  bool operator==(const SectorInterval&) const = default;
};

struct Correlation {
  std::vector<SectorInterval> intervals;
  // Arrival at or before departure: the count is not computable, the flight
  // is excluded, and its uncertainty is pinned to Severe.
  bool inconsistent_times = false;
};

namespace detail {

// The departure time a flight is counted from: an ACTUAL time from the
// departure slot, else an ACTUAL time embedded in the arrival slot. Flights
// with neither are excluded from counting entirely.
inline std::optional<Timestamp> actual_departure(const FlightDocument& doc) {
  if (doc.departure) {
    const auto& p = std::get<DeparturePayload>(doc.departure->parsed.payload);
    if (p.qualifier == TimeQualifier::Actual) return p.departure_time;
  }
  if (doc.arrival) {
    const auto& p = std::get<ArrivalPayload>(doc.arrival->parsed.payload);
    if (p.departure_time && p.departure_qualifier == TimeQualifier::Actual)
      return *p.departure_time;
  }
  return std::nullopt;
}

inline std::optional<Timestamp> arrival_time(const FlightDocument& doc) {
  if (!doc.arrival) return std::nullopt;
  return std::get<ArrivalPayload>(doc.arrival->parsed.payload).arrival_time;
}

}  // namespace detail

// Milestone offsets are minutes relative to the departure time; each
// milestone's exit is the next milestone's entry. The last sector is left at
// the arrival time when one is known and lies after its entry, otherwise
// after `default_dwell_min` minutes.
inline Correlation correlate_flight(const FlightDocument& doc,
                                    int default_dwell_min = kDefaultDwellMin) {
  Correlation out;
  if (!doc.sectors) return out;
  std::optional<Timestamp> dep = detail::actual_departure(doc);
  if (!dep) return out;
  std::optional<Timestamp> arr = detail::arrival_time(doc);
  if (arr && *arr <= *dep) {
    out.inconsistent_times = true;
    return out;
  }
  const auto& milestones = std::get<SectorsPayload>(doc.sectors->parsed.payload).milestones;
  for (std::size_t k = 0; k < milestones.size(); ++k) {
    SectorInterval iv;
    iv.sector = milestones[k].sector;
    iv.entry = *dep + static_cast<Timestamp>(milestones[k].entry_offset_min) * 60;
    if (k + 1 < milestones.size()) {
      iv.exit = *dep + static_cast<Timestamp>(milestones[k + 1].entry_offset_min) * 60;
    } else if (arr && *arr > iv.entry) {
      iv.exit = *arr;
    } else {
      iv.exit = iv.entry + static_cast<Timestamp>(default_dwell_min) * 60;
    }
    out.intervals.push_back(std::move(iv));
  }
  return out;
}

// Minute rule: minute m belongs to an interval iff floor(entry) <= m < exit.
// With contiguous intervals the handoff minute matches both neighbours; the
// later (entering) interval wins, so every airborne minute maps to exactly
// one sector and conservation holds exactly.
inline std::vector<BucketEntry> bucketize_intervals(const std::vector<SectorInterval>& intervals) {
  std::map<Timestamp, std::string> minute_sector;
  for (const SectorInterval& iv : intervals) {
    for (Timestamp t = floor_to_minute(iv.entry); t < iv.exit; t += 60)
      minute_sector[t] = iv.sector;
  }
  std::vector<BucketEntry> out;
  out.reserve(minute_sector.size());
  for (auto& [t, sector] : minute_sector) {
    BucketEntry b;
    b.time = t;
    b.sector = std::move(sector);
    out.push_back(std::move(b));
  }
  return out;
}

// As above, also marking the bucket whose minute matches the track slot's
// message time, when that minute is part of the flight's path.
inline std::vector<BucketEntry> bucketize_intervals(const std::vector<SectorInterval>& intervals,
                                                    const FlightDocument& doc) {
  std::vector<BucketEntry> out = bucketize_intervals(intervals);
  if (doc.track) {
    Timestamp tm = floor_to_minute(doc.track->parsed.msg_time);
    for (BucketEntry& b : out) {
      if (b.time == tm) {
        b.has_track = true;
        b.track = std::get<TrackPayload>(doc.track->parsed.payload);
        break;
      }
    }
  }
  return out;
}

// Message-order uncertainty of one flight, from its full raw-window message
// list sorted by (msg_time, seq). Level 3 when effective arrival and
// departure times contradict each other; level 2 when the count is
// computable but the sequence is anomalous (an ESTIMATED departure exists,
// first occurrences violate the order departure < track < sectors < arrival,
// or one event carries conflicting times); level 1 otherwise.
inline UncertaintyLevel flight_uncertainty(const std::vector<RawMessage>& msgs) {
  if (msgs.empty()) return UncertaintyLevel::Consistent;
  FlightDocument doc = document_from_messages(msgs.front().flight_ref, msgs);
  std::optional<Timestamp> dep = detail::actual_departure(doc);
  std::optional<Timestamp> arr = detail::arrival_time(doc);
  if (dep && arr && *arr <= *dep) return UncertaintyLevel::Severe;

  bool anomalous = false;

  // Case: a departure time published as ESTIMATED (issued before the fact).
  for (const RawMessage& m : msgs) {
    if (m.type == MsgType::DepartureInformation &&
        std::get<DeparturePayload>(m.payload).qualifier == TimeQualifier::Estimated)
      anomalous = true;
    if (m.type == MsgType::ArrivalInformation) {
      const auto& p = std::get<ArrivalPayload>(m.payload);
      if (p.departure_time && p.departure_qualifier == TimeQualifier::Estimated) anomalous = true;
    }
  }

  // Case: first occurrences out of the desirable order (covers departure
  // information issued after an arrival message).
  constexpr int kNoRank = -1;
  auto rank_of = [](MsgType t) {
    switch (t) {
      case MsgType::DepartureInformation: return 0;
      case MsgType::TrackInformation: return 1;
      case MsgType::FlightSectors: return 2;
      case MsgType::ArrivalInformation: return 3;
    }
    return kNoRank;
  };
  int highest_rank_seen = kNoRank;
  for (const RawMessage& m : msgs) {
    int r = rank_of(m.type);
    bool first_of_type = true;
    for (const RawMessage& earlier : msgs) {
      if (&earlier == &m) break;
      if (earlier.type == m.type) { first_of_type = false; break; }
    }
    if (!first_of_type) continue;
    if (r < highest_rank_seen) anomalous = true;
    highest_rank_seen = std::max(highest_rank_seen, r);
  }

  // Case: conflicting times for one event across messages.
  std::optional<Timestamp> dep_time, arr_time;
  auto note = [&anomalous](std::optional<Timestamp>& slot, Timestamp v) {
    if (slot && *slot != v) anomalous = true;
    slot = v;
  };
  for (const RawMessage& m : msgs) {
    if (m.type == MsgType::DepartureInformation)
      note(dep_time, std::get<DeparturePayload>(m.payload).departure_time);
    if (m.type == MsgType::ArrivalInformation) {
      const auto& p = std::get<ArrivalPayload>(m.payload);
      note(arr_time, p.arrival_time);
      if (p.departure_time) note(dep_time, *p.departure_time);
    }
  }

  return anomalous ? UncertaintyLevel::Recoverable : UncertaintyLevel::Consistent;
}

// Per-bucket levels for a correlated document: every bucket inherits the
// flight's level, computed offline from the full message window.
inline std::vector<UncertaintyLevel> compute_uncertainty(const FlightDocument& doc) {
  return std::vector<UncertaintyLevel>(doc.dms_buckets.size(), doc.uncertainty);
}

// One correlated flight as the reduce step consumes it (a DMS-A document).
struct CorrelatedFlight {
  std::string flight_ref;
  UncertaintyLevel uncertainty = UncertaintyLevel::Consistent;
  std::vector<SectorInterval> intervals;
  std::vector<BucketEntry> buckets;
};

// Reduces a day's correlated flights to per-sector series. Only buckets
// falling inside `day` are kept: minutes belong to the calendar day they
// fall in, and a midnight crosser surfaces again in the next day's run.
// The per-flight merge is associative and commutative, so the result is
// independent of input order.
inline std::map<std::string, SectorCountSeries> reduce_sector_counts(
    const std::vector<CorrelatedFlight>& flights, UtcDate day) {
  const Timestamp lo = day_start(day);
  const Timestamp hi = lo + kSecondsPerDay;
  std::map<std::string, SectorCountSeries> out;
  for (const CorrelatedFlight& f : flights) {
    for (const BucketEntry& b : f.buckets) {
      if (b.time < lo || b.time >= hi) continue;
      auto [it, inserted] = out.try_emplace(b.sector);
      if (inserted) {
        it->second.sector = b.sector;
        it->second.day = day;
      }
      it->second.add(static_cast<int>((b.time - lo) / 60), f.flight_ref, f.uncertainty);
    }
  }
  return out;
}

}  // namespace sectorcast
