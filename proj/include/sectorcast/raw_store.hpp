#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sectorcast/message.hpp"
#include "sectorcast/time.hpp"

namespace sectorcast {

enum class IndexField { FlightRef, MsgType };
enum class IndexState { Absent, Built };

struct IndexDescriptor {
  IndexField field = IndexField::FlightRef;
  IndexState state = IndexState::Absent;

  friend bool operator==(const IndexDescriptor&, const IndexDescriptor&) = default;
};

inline const char* index_field_name(IndexField f) {
  return f == IndexField::FlightRef ? "flightRef" : "msgType";
}

struct RejectedLine {
  std::size_t line_number = 0;  // 1-based
  std::string reason;
};

struct IngestReport {
  UtcDate day;
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t bytes_stored = 0;
  std::vector<RejectedLine> rejections;
};

struct StorageError : std::runtime_error {
  explicit StorageError(const std::string& what, IngestReport partial = {})
      : std::runtime_error(what), partial_report(std::move(partial)) {}
  IngestReport partial_report;
};

struct MissingCollection : std::runtime_error {
  explicit MissingCollection(const UtcDate& day)
      : std::runtime_error("no raw collection for " + format_date(day)) {}
};

struct UnknownField : std::runtime_error {
  explicit UnknownField(const std::string& f) : std::runtime_error("unknown index field: " + f) {}
};

// Bitmask over MsgType for fetch filters.
struct TypeFilter {
  unsigned mask = 0xF;

  static TypeFilter all() { return TypeFilter{}; }
  static TypeFilter only(std::initializer_list<MsgType> types) {
    TypeFilter f{0};
    for (auto t : types) f.mask |= 1u << static_cast<unsigned>(t);
    return f;
  }
  bool contains(MsgType t) const { return mask & (1u << static_cast<unsigned>(t)); }
};

// Append-only store of raw messages in daily collections.
//
// Layout: <root>/raw/<YYYY-MM-DD>/segment-<n>.log holds `seq<TAB>record` lines
// in ingestion order; index-<field>.idx are sidecar files mapping a field
// value to (segment, byte offset) pairs. An index is valid only for the
// segment count recorded in its header; a later ingest makes it stale and
// queries fall back to a full scan until the index is rebuilt.
//
// Single writer per day; readers see a consistent prefix. Collections are
// never auto-deleted (pruning is an explicit CLI action).
class RawStore {
 public:
  explicit RawStore(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }

  // Appends every parseable record whose msgTime falls on `day`. Other lines
  // are rejected with a reason. Records get fresh, strictly increasing seq
  // ordinals within the collection.
  IngestReport ingest_day(const std::vector<std::string>& lines, const UtcDate& day) {
    namespace fs = std::filesystem;
    IngestReport report;
    report.day = day;
    fs::path dir = day_dir(day);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
      throw StorageError("cannot create collection directory " + dir.string(), report);

    std::uint64_t next_seq = record_count(day) + 1;
    int segment = next_segment_number(day);
    fs::path seg_path = dir / ("segment-" + std::to_string(segment) + ".log");
    std::ofstream out(seg_path, std::ios::binary);
    if (!out) throw StorageError("cannot open segment " + seg_path.string(), report);

    for (std::size_t i = 0; i < lines.size(); ++i) {
      ParseResult r = parse_message(lines[i]);
      if (!parse_ok(r)) {
        const auto& e = std::get<ParseError>(r);
        report.rejections.push_back({i + 1, "Unparseable(" + e.field + "): " + e.detail});
        ++report.rejected;
        continue;
      }
      RawMessage msg = std::get<RawMessage>(r);
      if (date_of(msg.msg_time) != day) {
        report.rejections.push_back(
            {i + 1, "WrongDay: msgTime on " + format_date(date_of(msg.msg_time))});
        ++report.rejected;
        continue;
      }
      msg.seq = next_seq++;
      std::string line = std::to_string(msg.seq) + "\t" + serialize_message(msg) + "\n";
      out << line;
      if (!out) throw StorageError("write failed on " + seg_path.string(), report);
      report.bytes_stored += line.size();
      ++report.accepted;
    }
    out.flush();
    if (!out) throw StorageError("flush failed on " + seg_path.string(), report);
    // A new segment invalidates previously built indices (they record the
    // segment count they cover).
    return report;
  }

  // Builds the requested indices if absent or stale. Idempotent.
  std::vector<IndexDescriptor> ensure_indices(const UtcDate& day,
                                              const std::set<IndexField>& fields) {
    require_collection(day);
    std::vector<IndexDescriptor> out;
    for (IndexField f : fields) {
      if (!index_fresh(day, f)) build_index(day, f);
      out.push_back({f, IndexState::Built});
    }
    return out;
  }

  // Exact set of distinct flight references in the day's records.
  std::set<std::string> scan_flight_refs(const UtcDate& day) {
    require_collection(day);
    std::set<std::string> refs;
    if (index_fresh(day, IndexField::FlightRef)) {
      for (const auto& [key, locs] : cached_index(day, IndexField::FlightRef)) refs.insert(key);
      return refs;
    }
    for (const auto& rec : read_day(day)) refs.insert(rec.flight_ref);
    return refs;
  }

  // All records in seq order. Missing collection is an error here.
  std::vector<RawMessage> read_day(const UtcDate& day) {
    require_collection(day);
    return read_day_if_present(day);
  }

  // Messages for one flight over [end_day - lookback + 1, end_day], ordered
  // by (msgTime, seq). Days never ingested are treated as empty.
  std::vector<RawMessage> fetch_flight_messages(const std::string& flight_ref,
                                                const UtcDate& end_day, int lookback_days = 5,
                                                TypeFilter types = TypeFilter::all()) {
    if (lookback_days < 1) throw std::invalid_argument("lookback_days must be >= 1");
    std::vector<RawMessage> out;
    for (int back = lookback_days - 1; back >= 0; --back) {
      UtcDate day = add_days(end_day, -back);
      if (!std::filesystem::is_directory(day_dir(day))) continue;
      if (index_fresh(day, IndexField::FlightRef)) {
        const IndexMap& index = cached_index(day, IndexField::FlightRef);
        auto it = index.find(flight_ref);
        if (it == index.end()) continue;
        for (const auto& [segment, offset] : it->second) {
          auto rec = read_record_at(day, segment, offset);
          if (rec && types.contains(rec->type)) out.push_back(std::move(*rec));
        }
      } else {
        for (auto& rec : read_day_if_present(day))
          if (rec.flight_ref == flight_ref && types.contains(rec.type)) out.push_back(std::move(rec));
      }
    }
    std::sort(out.begin(), out.end(), [](const RawMessage& a, const RawMessage& b) {
      return a.msg_time != b.msg_time ? a.msg_time < b.msg_time : a.seq < b.seq;
    });
    return out;
  }

  bool has_collection(const UtcDate& day) const {
    return std::filesystem::is_directory(day_dir(day));
  }

  // Records read from disk since construction; lets tests observe that
  // indexed fetches avoid full scans.
  std::uint64_t records_scanned() const { return records_scanned_; }

 private:
  using IndexMap = std::map<std::string, std::vector<std::pair<int, std::uint64_t>>>;

  // A parsed index stays usable only while the collection still has the
  // segment count it was built over, the same staleness rule as the file.
  struct CachedIndex {
    int covered = -1;
    IndexMap map;
  };

  std::filesystem::path root_;
  std::uint64_t records_scanned_ = 0;
  std::map<std::string, CachedIndex> index_cache_;
  std::map<std::string, std::ifstream> segment_handles_;

  std::filesystem::path day_dir(const UtcDate& day) const {
    return root_ / "raw" / format_date(day);
  }

  std::filesystem::path index_path(const UtcDate& day, IndexField f) const {
    return day_dir(day) / (std::string("index-") + index_field_name(f) + ".idx");
  }

  void require_collection(const UtcDate& day) const {
    if (!has_collection(day)) throw MissingCollection(day);
  }

  std::vector<std::filesystem::path> segment_paths(const UtcDate& day) const {
    std::vector<std::filesystem::path> segs;
    for (int n = 0;; ++n) {
      auto p = day_dir(day) / ("segment-" + std::to_string(n) + ".log");
      if (!std::filesystem::exists(p)) break;
      segs.push_back(p);
    }
    return segs;
  }

  int next_segment_number(const UtcDate& day) const {
    return static_cast<int>(segment_paths(day).size());
  }

  std::uint64_t record_count(const UtcDate& day) {
    std::uint64_t n = 0;
    for (const auto& p : segment_paths(day)) {
      std::ifstream in(p, std::ios::binary);
      std::string line;
      while (std::getline(in, line))
        if (!line.empty()) ++n;
    }
    return n;
  }

  static bool split_record(const std::string& line, std::uint64_t& seq, std::string& body) {
    auto tab = line.find('\t');
    if (tab == std::string::npos) return false;
    try {
      seq = std::stoull(line.substr(0, tab));
    } catch (...) {
      return false;
    }
    body = line.substr(tab + 1);
    return true;
  }

  std::vector<RawMessage> read_day_if_present(const UtcDate& day) {
    std::vector<RawMessage> out;
    for (const auto& p : segment_paths(day)) {
      std::ifstream in(p, std::ios::binary);
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::uint64_t seq;
        std::string body;
        if (!split_record(line, seq, body)) continue;  // torn tail, skip
        ParseResult r = parse_message(body);
        ++records_scanned_;
        if (!parse_ok(r)) continue;
        RawMessage msg = std::get<RawMessage>(r);
        msg.seq = seq;
        out.push_back(std::move(msg));
      }
    }
    std::sort(out.begin(), out.end(),
              [](const RawMessage& a, const RawMessage& b) { return a.seq < b.seq; });
    return out;
  }

  std::optional<RawMessage> read_record_at(const UtcDate& day, int segment, std::uint64_t offset) {
    // Segment files are append-created and never modified afterwards, so an
    // open handle can be reused across point reads.
    std::string key = format_date(day) + "#" + std::to_string(segment);
    auto handle = segment_handles_.find(key);
    if (handle == segment_handles_.end()) {
      auto p = day_dir(day) / ("segment-" + std::to_string(segment) + ".log");
      std::ifstream opened(p, std::ios::binary);
      if (!opened) return std::nullopt;
      handle = segment_handles_.emplace(key, std::move(opened)).first;
    }
    std::ifstream& in = handle->second;
    in.clear();
    in.seekg(static_cast<std::streamoff>(offset));
    std::string line;
    if (!std::getline(in, line)) return std::nullopt;
    std::uint64_t seq;
    std::string body;
    if (!split_record(line, seq, body)) return std::nullopt;
    ParseResult r = parse_message(body);
    ++records_scanned_;
    if (!parse_ok(r)) return std::nullopt;
    RawMessage msg = std::get<RawMessage>(r);
    msg.seq = seq;
    return msg;
  }

  bool index_fresh(const UtcDate& day, IndexField f) const {
    std::ifstream in(index_path(day, f));
    if (!in) return false;
    std::string header;
    if (!std::getline(in, header)) return false;
    std::istringstream hs(header);
    std::string tag;
    int covered = -1;
    hs >> tag >> covered;
    return tag == "#segments" && covered == next_segment_number(day);
  }

  void build_index(const UtcDate& day, IndexField f) {
    IndexMap index;
    auto segs = segment_paths(day);
    for (std::size_t s = 0; s < segs.size(); ++s) {
      std::ifstream in(segs[s], std::ios::binary);
      std::string line;
      std::uint64_t offset = 0;
      while (std::getline(in, line)) {
        std::uint64_t here = offset;
        offset += line.size() + 1;
        if (line.empty()) continue;
        std::uint64_t seq;
        std::string body;
        if (!split_record(line, seq, body)) continue;
        ParseResult r = parse_message(body);
        ++records_scanned_;
        if (!parse_ok(r)) continue;
        const RawMessage& msg = std::get<RawMessage>(r);
        std::string key =
            f == IndexField::FlightRef ? msg.flight_ref : msg_type_name(msg.type);
        index[key].emplace_back(static_cast<int>(s), here);
      }
    }
    auto path = index_path(day, f);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw StorageError("cannot write index " + path.string());
    out << "#segments " << segs.size() << "\n";
    for (const auto& [key, locs] : index) {
      out << key << "\t";
      for (std::size_t i = 0; i < locs.size(); ++i) {
        if (i) out << ",";
        out << locs[i].first << ":" << locs[i].second;
      }
      out << "\n";
    }
  }

  const IndexMap& cached_index(const UtcDate& day, IndexField f) {
    std::string key = format_date(day) + "#" + index_field_name(f);
    int covered = next_segment_number(day);
    auto it = index_cache_.find(key);
    if (it == index_cache_.end() || it->second.covered != covered)
      it = index_cache_.insert_or_assign(key, CachedIndex{covered, read_index(day, f)}).first;
    return it->second.map;
  }

  IndexMap read_index(const UtcDate& day, IndexField f) {
    IndexMap index;
    std::ifstream in(index_path(day, f), std::ios::binary);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      auto tab = line.find('\t');
      if (tab == std::string::npos) continue;
      std::string key = line.substr(0, tab);
      std::istringstream locs(line.substr(tab + 1));
      std::string loc;
      while (std::getline(locs, loc, ',')) {
        auto colon = loc.find(':');
        if (colon == std::string::npos) continue;
        index[key].emplace_back(std::stoi(loc.substr(0, colon)),
                                std::stoull(loc.substr(colon + 1)));
      }
    }
    return index;
  }
};

}  // namespace sectorcast
