#pragma once

// The five-step preparation run for one day: ensure raw indices, scan flight
// refs and assign partitions, build consolidated documents, correlate into
// DMS-A, reduce into DMS-B. Each step finishes before the next starts, and
// the produced collections are a pure function of the raw window, so re-runs
// on unchanged input are byte-identical.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flight_document.hpp"
#include "occupancy.hpp"
#include "partition.hpp"
#include "pi_store.hpp"
#include "raw_store.hpp"
#include "sector_counts.hpp"
#include "time.hpp"

namespace sectorcast {

struct PrepConfig {
  int partition_count = kDefaultPartitionCount;
  int default_dwell_min = kDefaultDwellMin;
  int lookback_days = 5;
};

struct PrepFailure {
  std::string flight_ref;
  std::string reason;
};

struct PrepReport {
  UtcDate day;
  long flights_seen = 0;
  long documents_built = 0;
  long documents_correlated = 0;  // documents that produced at least one interval
  long sectors_counted = 0;
  double step_seconds[5] = {0, 0, 0, 0, 0};
  std::vector<PrepFailure> failures;
};

// Document files for the consolidated flight collection, one directory per
// partition under `<root>/fi/`.
class FiStore {
 public:
  explicit FiStore(std::filesystem::path root) : root_(std::move(root)) {}

  std::filesystem::path partition_dir(int partition) const {
    return root_ / "fi" / std::to_string(partition);
  }

  std::filesystem::path document_path(int partition, const std::string& flight_ref) const {
    return partition_dir(partition) / (sanitize_component(flight_ref) + ".json");
  }

  // Returns the byte size of the stored document.
  long write_document(int partition, const FlightDocument& doc) const {
    std::filesystem::create_directories(partition_dir(partition));
    std::string text = serialize_document(doc);
    std::ofstream out(document_path(partition, doc.flight_ref),
                      std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("failed writing FI document for " + doc.flight_ref);
    return static_cast<long>(text.size());
  }

  std::optional<FlightDocument> read_document(int partition, const std::string& flight_ref) const {
    std::filesystem::path p = document_path(partition, flight_ref);
    if (!std::filesystem::exists(p)) return std::nullopt;
    std::ifstream in(p, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_document(text);
  }

  // Total bytes across all partition directories.
  long total_bytes() const {
    long total = 0;
    std::filesystem::path fi = root_ / "fi";
    if (!std::filesystem::is_directory(fi)) return 0;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(fi))
      if (entry.is_regular_file()) total += static_cast<long>(entry.file_size());
    return total;
  }

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

inline std::filesystem::path st_ledger_path(const std::filesystem::path& root) {
  return root / "st.ledger";
}
inline std::filesystem::path sa_ledger_path(const std::filesystem::path& root) {
  return root / "sa.ledger";
}

inline PartitionLedger load_or_create_ledger(const std::filesystem::path& root,
                                             int partition_count) {
  if (std::filesystem::exists(st_ledger_path(root)))
    return PartitionLedger::load(st_ledger_path(root), sa_ledger_path(root));
  return PartitionLedger(partition_count);
}

// Consolidates one flight's raw window into a document: most recent message
// per type plus the offline uncertainty level. Throws NoMessages when the
// flight is absent from the window.
inline FlightDocument build_flight_document(RawStore& raw, const std::string& flight_ref,
                                            UtcDate end_day, int lookback_days = 5) {
  std::vector<RawMessage> msgs =
      raw.fetch_flight_messages(flight_ref, end_day, lookback_days, TypeFilter::all());
  FlightDocument doc = document_from_messages(flight_ref, msgs);
  doc.uncertainty = flight_uncertainty(msgs);
  return doc;
}

inline PrepReport run_preparation(RawStore& raw, const std::filesystem::path& root, UtcDate day,
                                  const PrepConfig& config = {}) {
  using Clock = std::chrono::steady_clock;
  PrepReport report;
  report.day = day;
  FiStore fi(root);
  PiStore pi(root);

  // Step 1: raw-side indices for the scan and the per-flight fetches.
  auto t0 = Clock::now();
  raw.ensure_indices(day, {IndexField::FlightRef, IndexField::MsgType});
  auto t1 = Clock::now();
  report.step_seconds[0] = std::chrono::duration<double>(t1 - t0).count();

  // Step 2: the day's flight refs, each assigned to a partition.
  std::set<std::string> refs = raw.scan_flight_refs(day);
  report.flights_seen = static_cast<long>(refs.size());
  PartitionLedger ledger = load_or_create_ledger(root, config.partition_count);
  for (const std::string& ref : refs) ledger.assign(ref);
  auto t2 = Clock::now();
  report.step_seconds[1] = std::chrono::duration<double>(t2 - t1).count();

  // Step 3: consolidated documents over the lookback window, most recent
  // message per type, with the offline uncertainty level.
  std::vector<FlightDocument> docs;
  docs.reserve(refs.size());
  for (const std::string& ref : refs) {
    try {
      FlightDocument doc = build_flight_document(raw, ref, day, config.lookback_days);
      ledger.note_document(ref, fi.write_document(ledger.lookup(ref), doc));
      docs.push_back(std::move(doc));
      report.documents_built += 1;
    } catch (const std::exception& e) {
      report.failures.push_back({ref, e.what()});
    }
  }
  auto t3 = Clock::now();
  report.step_seconds[2] = std::chrono::duration<double>(t3 - t2).count();

  // Step 4: correlate and bucketize every document; documents are updated in
  // place (FI now carries the buckets) and DMS-A written as a whole.
  std::vector<CorrelatedFlight> correlated;
  correlated.reserve(docs.size());
  for (FlightDocument& doc : docs) {
    Correlation c = correlate_flight(doc, config.default_dwell_min);
    doc.dms_buckets = bucketize_intervals(c.intervals, doc);
    if (!doc.dms_buckets.empty()) report.documents_correlated += 1;
    ledger.note_document(doc.flight_ref,
                         fi.write_document(ledger.lookup(doc.flight_ref), doc));
    CorrelatedFlight f;
    f.flight_ref = doc.flight_ref;
    f.uncertainty = doc.uncertainty;
    f.intervals = std::move(c.intervals);
    f.buckets = doc.dms_buckets;
    correlated.push_back(std::move(f));
  }
  pi.write_dms_a(day, correlated);
  auto t4 = Clock::now();
  report.step_seconds[3] = std::chrono::duration<double>(t4 - t3).count();

  // Step 5: reduce to per-sector series and persist DMS-B. The reduce runs
  // over the correlation output just persisted as DMS-A, so both collections
  // derive from the same in-memory state.
  std::map<std::string, SectorCountSeries> series = reduce_sector_counts(correlated, day);
  report.sectors_counted = static_cast<long>(series.size());
  pi.write_dms_b(day, series);
  ledger.save(st_ledger_path(root), sa_ledger_path(root));
  auto t5 = Clock::now();
  report.step_seconds[4] = std::chrono::duration<double>(t5 - t4).count();

  return report;
}

}  // namespace sectorcast
