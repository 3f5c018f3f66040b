#pragma once

// Traffic pattern map: per-cell timestamped entry/exit traversal records,
// queried as 6x6 count matrices either over a trailing discount window or
// cumulatively since the start of the run.

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "hexflow/geometry.hpp"
#include "hexflow/util.hpp"

namespace hexflow {

struct TraversalRecord {
  CellCoord cell;
  EdgeIndex entry = 1;
  EdgeIndex exit = 1;
  double time = 0.0;  // seconds since simulation start
};

class PatternMap {
 public:
  explicit PatternMap(std::optional<double> discount_window_s = std::nullopt)
      : window_(discount_window_s) {
    if (window_ && !(*window_ > 0.0))
      throw std::invalid_argument("discount window must be > 0 when present");
  }

  std::optional<double> discount_window() const { return window_; }

  void record_traversal(const TraversalRecord& rec) {
    if (rec.time < 0.0) throw std::invalid_argument("traversal time must be >= 0");
    if (!is_valid_edge(rec.entry) || !is_valid_edge(rec.exit))
      throw std::invalid_argument("edge index out of [1,6]");
    CellLog& log = cells_[detail::cell_key(rec.cell)];
    if (!log.records.empty() && rec.time < log.records.back().time)
      throw std::invalid_argument("traversal time regressed for cell");
    log.records.push_back(rec);
    log.running(rec.entry, rec.exit) += 1;
    ++total_records_;
  }

  // Counts of records with time in (now - window, now]; with no window
  // configured this equals the cumulative matrix.
  TrafficMatrix windowed_matrix(CellCoord cell, double now) const {
    if (!window_) return cumulative_matrix(cell, now);
    const CellLog* log = find(cell);
    TrafficMatrix t;
    if (!log) return t;
    const double cutoff = now - *window_;
    // records are time-sorted: scan the in-window suffix
    const auto& recs = log->records;
    std::size_t lo = lower_bound_time(recs, cutoff, /*strict_greater=*/true);
    for (std::size_t i = lo; i < recs.size() && recs[i].time <= now; ++i)
      t(recs[i].entry, recs[i].exit) += 1;
    return t;
  }

  // Counts of all records with time <= now.
  TrafficMatrix cumulative_matrix(CellCoord cell, double now) const {
    const CellLog* log = find(cell);
    TrafficMatrix t;
    if (!log) return t;
    if (log->records.back().time <= now) return log->running;
    for (const TraversalRecord& r : log->records) {
      if (r.time > now) break;
      t(r.entry, r.exit) += 1;
    }
    return t;
  }

  std::size_t record_count() const { return total_records_; }

  // All records in global time order (ties broken by cell and edge pair).
  std::vector<TraversalRecord> all_records() const {
    std::vector<TraversalRecord> out;
    out.reserve(total_records_);
    for (const auto& [key, log] : cells_) {
      (void)key;
      out.insert(out.end(), log.records.begin(), log.records.end());
    }
    std::sort(out.begin(), out.end(), [](const TraversalRecord& a, const TraversalRecord& b) {
      if (a.time != b.time) return a.time < b.time;
      if (a.cell != b.cell) return a.cell < b.cell;
      if (a.entry != b.entry) return a.entry < b.entry;
      return a.exit < b.exit;
    });
    return out;
  }

  // Line-oriented serialization: header then one record per line.
  void save(std::ostream& os) const {
    os << "time_s,q,r,entry,exit\n";
    for (const TraversalRecord& r : all_records()) {
      os << format_double(r.time) << ',' << r.cell.q << ',' << r.cell.r << ',' << r.entry << ','
         << r.exit << '\n';
    }
  }

  static PatternMap load(std::istream& is, std::optional<double> discount_window_s = std::nullopt) {
    PatternMap map(discount_window_s);
    std::string line;
    if (!std::getline(is, line)) return map;  // empty stream: empty map
    if (line != "time_s,q,r,entry,exit")
      throw std::invalid_argument("unexpected traversal log header: " + line);
    std::vector<TraversalRecord> recs;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      TraversalRecord r;
      std::istringstream ss(line);
      char c1, c2, c3, c4;
      if (!(ss >> r.time >> c1 >> r.cell.q >> c2 >> r.cell.r >> c3 >> r.entry >> c4 >> r.exit) ||
          c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',')
        throw std::invalid_argument("malformed traversal record: " + line);
      recs.push_back(r);
    }
    // Records may interleave cells arbitrarily in a saved log; replay in
    // global time order to satisfy the per-cell monotonicity precondition.
    std::stable_sort(recs.begin(), recs.end(),
                     [](const TraversalRecord& a, const TraversalRecord& b) { return a.time < b.time; });
    for (const TraversalRecord& r : recs) map.record_traversal(r);
    return map;
  }

 private:
  struct CellLog {
    std::vector<TraversalRecord> records;
    TrafficMatrix running;  // counts over the full record list
  };

  const CellLog* find(CellCoord cell) const {
    auto it = cells_.find(detail::cell_key(cell));
    return it == cells_.end() ? nullptr : &it->second;
  }

  // First index with time strictly greater than cutoff.
  static std::size_t lower_bound_time(const std::vector<TraversalRecord>& recs, double cutoff,
                                      bool strict_greater) {
    std::size_t lo = 0, hi = recs.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      const bool keep = strict_greater ? recs[mid].time > cutoff : recs[mid].time >= cutoff;
      if (keep)
        hi = mid;
      else
        lo = mid + 1;
    }
    return lo;
  }

  std::optional<double> window_;
  std::unordered_map<std::uint64_t, CellLog> cells_;
  std::size_t total_records_ = 0;
};

}  // namespace hexflow
