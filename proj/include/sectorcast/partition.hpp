#pragma once

// Partition bookkeeping for the consolidated flight collection: assignments
// (flightRef to partition) and per-partition storage summaries, persisted as
// two single-file ledgers. Assignment is a pure hash, so any loader agrees
// with any writer.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rng.hpp"

namespace sectorcast {

inline constexpr int kDefaultPartitionCount = 16;

struct LedgerCorrupt : std::runtime_error {
  explicit LedgerCorrupt(const std::string& what) : std::runtime_error("ledger corrupt: " + what) {}
};

struct NotAssigned : std::runtime_error {
  explicit NotAssigned(const std::string& ref)
      : std::runtime_error("flight not assigned to a partition: " + ref) {}
};

struct PartitionInfo {
  int id = 0;
  long document_count = 0;
  long byte_estimate = 0;

  friend bool operator==(const PartitionInfo&, const PartitionInfo&) = default;
};

class PartitionLedger {
 public:
  explicit PartitionLedger(int partition_count = kDefaultPartitionCount)
      : partition_count_(partition_count) {
    if (partition_count < 1) throw std::invalid_argument("partition count must be >= 1");
  }

  static int partition_of(const std::string& flight_ref, int partition_count) {
    return static_cast<int>(fnv1a64(flight_ref) % static_cast<std::uint64_t>(partition_count));
  }

  int partition_count() const { return partition_count_; }

  // Deterministic and idempotent: repeated assignment of one ref returns the
  // recorded partition without growing any count.
  int assign(const std::string& flight_ref) {
    auto it = entries_.find(flight_ref);
    if (it != entries_.end()) return it->second.partition;
    int p = partition_of(flight_ref, partition_count_);
    entries_.emplace(flight_ref, Entry{p, 0});
    return p;
  }

  int lookup(const std::string& flight_ref) const {
    auto it = entries_.find(flight_ref);
    if (it == entries_.end()) throw NotAssigned(flight_ref);
    return it->second.partition;
  }

  bool is_assigned(const std::string& flight_ref) const { return entries_.count(flight_ref) > 0; }

  void note_document(const std::string& flight_ref, long bytes) {
    auto it = entries_.find(flight_ref);
    if (it == entries_.end()) throw NotAssigned(flight_ref);
    it->second.bytes = bytes;
  }

  // Summaries are derived from the assignment map, so counts always match
  // the set of assigned documents.
  std::vector<PartitionInfo> partitions() const {
    std::vector<PartitionInfo> out(static_cast<std::size_t>(partition_count_));
    for (int i = 0; i < partition_count_; ++i) out[static_cast<std::size_t>(i)].id = i;
    for (const auto& [ref, e] : entries_) {
      out[static_cast<std::size_t>(e.partition)].document_count += 1;
      out[static_cast<std::size_t>(e.partition)].byte_estimate += e.bytes;
    }
    return out;
  }

  long assigned_count() const { return static_cast<long>(entries_.size()); }

  // ST file: versioned header plus one summary line per partition.
  // SA file: versioned header plus one `ref<TAB>partition<TAB>bytes` line per
  // assigned flight, sorted by ref. Both rewritten atomically together.
  void save(const std::filesystem::path& st_path, const std::filesystem::path& sa_path) const {
    {
      std::ofstream st(st_path, std::ios::binary | std::ios::trunc);
      st << "# sectorcast st v1\n";
      st << "partitions " << partition_count_ << "\n";
      for (const PartitionInfo& p : partitions())
        st << p.id << " " << p.document_count << " " << p.byte_estimate << "\n";
      if (!st) throw std::runtime_error("failed writing " + st_path.string());
    }
    {
      std::ofstream sa(sa_path, std::ios::binary | std::ios::trunc);
      sa << "# sectorcast sa v1\n";
      for (const auto& [ref, e] : entries_)
        sa << ref << "\t" << e.partition << "\t" << e.bytes << "\n";
      if (!sa) throw std::runtime_error("failed writing " + sa_path.string());
    }
  }

  static PartitionLedger load(const std::filesystem::path& st_path,
                              const std::filesystem::path& sa_path) {
    std::ifstream st(st_path, std::ios::binary);
    if (!st) throw LedgerCorrupt("cannot open " + st_path.string());
    std::string line;
    if (!std::getline(st, line) || line != "# sectorcast st v1")
      throw LedgerCorrupt("bad ST header");
    int count = 0;
    if (!std::getline(st, line) || std::sscanf(line.c_str(), "partitions %d", &count) != 1 ||
        count < 1)
      throw LedgerCorrupt("bad partition count line");
    PartitionLedger ledger(count);
    std::vector<PartitionInfo> declared;
    while (std::getline(st, line)) {
      if (line.empty()) continue;
      PartitionInfo p;
      if (std::sscanf(line.c_str(), "%d %ld %ld", &p.id, &p.document_count, &p.byte_estimate) != 3)
        throw LedgerCorrupt("bad ST summary line: " + line);
      declared.push_back(p);
    }

    std::ifstream sa(sa_path, std::ios::binary);
    if (!sa) throw LedgerCorrupt("cannot open " + sa_path.string());
    if (!std::getline(sa, line) || line != "# sectorcast sa v1")
      throw LedgerCorrupt("bad SA header");
    while (std::getline(sa, line)) {
      if (line.empty()) continue;
      std::size_t t1 = line.find('\t');
      std::size_t t2 = line.find('\t', t1 == std::string::npos ? t1 : t1 + 1);
      if (t1 == std::string::npos || t2 == std::string::npos)
        throw LedgerCorrupt("bad SA line: " + line);
      std::string ref = line.substr(0, t1);
      int partition = 0;
      long bytes = 0;
      try {
        partition = std::stoi(line.substr(t1 + 1, t2 - t1 - 1));
        bytes = std::stol(line.substr(t2 + 1));
      } catch (const std::exception&) {
        throw LedgerCorrupt("bad SA numbers: " + line);
      }
      if (partition < 0 || partition >= count)
        throw LedgerCorrupt("assignment to nonexistent partition: " + line);
      if (ref.empty() || ledger.entries_.count(ref)) throw LedgerCorrupt("duplicate or empty ref");
      if (partition != partition_of(ref, count))
        throw LedgerCorrupt("assignment disagrees with hash: " + ref);
      ledger.entries_.emplace(ref, Entry{partition, bytes});
    }

    std::vector<PartitionInfo> actual = ledger.partitions();
    if (declared != actual) throw LedgerCorrupt("ST summaries disagree with SA assignments");
    return ledger;
  }

 private:
  struct Entry {
    int partition = 0;
    long bytes = 0;
  };

  int partition_count_;
  std::map<std::string, Entry> entries_;
};

}  // namespace sectorcast
