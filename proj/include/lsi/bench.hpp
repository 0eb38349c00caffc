#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsi/index.hpp"
#include "lsi/oracle.hpp"
#include "lsi/polygon.hpp"
#include "lsi/query.hpp"
#include "lsi/workload.hpp"

namespace lsi::bench {

/// Raised by verified runs when a query disagrees with the brute-force scan.
class verification_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LatencyStats {
  double mean_ns = 0.0;
  double median_ns = 0.0;
  double p99_ns = 0.0;
};

inline LatencyStats summarize(std::vector<double> samples) {
  LatencyStats s;
  if (samples.empty()) return s;
  double sum = 0.0;
  for (double v : samples) sum += v;
  s.mean_ns = sum / static_cast<double>(samples.size());
  std::sort(samples.begin(), samples.end());
  s.median_ns = samples[samples.size() / 2];
  const auto p99 = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(samples.size()))) - 1;
  s.p99_ns = samples[std::min(p99, samples.size() - 1)];
  return s;
}

struct RunOptions {
  bool warmup = true;
  bool verify = false;
  bool profile = true;      ///< extra pass collecting per-phase timings
  std::size_t repetitions = 3;  ///< timed passes; per-query minimum is kept
};

struct RunResult {
  std::size_t queries = 0;
  LatencyStats latency;
  QueryProfile totals;  ///< summed over the profiled pass
  std::size_t results = 0;
  std::uint64_t checksum = 0;
  bool verified = false;

  double avg(std::size_t QueryProfile::*field) const {
    return queries ? static_cast<double>(totals.*field) / static_cast<double>(queries) : 0.0;
  }
  double avg_ns(double QueryProfile::*field) const {
    return queries ? totals.*field / static_cast<double>(queries) : 0.0;
  }
};

namespace detail {

/// Runs query i of the workload, appending its result points to `out`
/// (point queries append the query point when found).
class Executor {
 public:
  Executor(const PartitionedIndex& idx, const Workload& w) : idx_(idx), w_(w) {
    if (w.type == QueryType::Join) {
      polygons_.reserve(w.polygons.size());
      for (const auto& rec : w.polygons) polygons_.push_back(Polygon::from_ring(rec.ring, rec.id));
    }
  }

  void run(std::size_t i, std::vector<GeoPoint>& out, QueryProfile* prof) {
    switch (w_.type) {
      case QueryType::Range: range_query(idx_, w_.ranges[i], out, scratch_, prof); break;
      case QueryType::Point:
        if (point_query(idx_, w_.points[i], scratch_, prof)) out.push_back(w_.points[i]);
        break;
      case QueryType::Distance: distance_query(idx_, w_.distances[i], out, scratch_, prof); break;
      case QueryType::Join: polygon_query(idx_, polygons_[i], out, scratch_, prof); break;
    }
  }

  const std::vector<Polygon>& polygons() const { return polygons_; }

 private:
  const PartitionedIndex& idx_;
  const Workload& w_;
  std::vector<Polygon> polygons_;
  QueryScratch scratch_;
};

inline std::string describe(const Workload& w, std::size_t i) {
  std::ostringstream os;
  os.precision(17);
  switch (w.type) {
    case QueryType::Range: {
      const Rect& r = w.ranges[i];
      os << "range #" << i << " [" << r.xl << ',' << r.yl << " .. " << r.xh << ',' << r.yh << ']';
      break;
    }
    case QueryType::Point: os << "point #" << i << " (" << w.points[i].lat << ',' << w.points[i].lon << ')'; break;
    case QueryType::Distance:
      os << "distance #" << i << " (" << w.distances[i].center.lat << ',' << w.distances[i].center.lon
         << ") d=" << w.distances[i].meters;
      break;
    case QueryType::Join: os << "polygon #" << i << " '" << w.polygons[i].id << "'"; break;
  }
  return os.str();
}

}  // namespace detail

/// Brute-force answer for query i.
inline std::vector<GeoPoint> oracle_answer(std::span<const GeoPoint> data, const Workload& w,
                                           std::size_t i, const oracle::PointSet* points = nullptr) {
  switch (w.type) {
    case QueryType::Range: return oracle::range(data, w.ranges[i]);
    case QueryType::Point: {
      const bool found = points ? points->contains(w.points[i]) : oracle::point(data, w.points[i]);
      return found ? std::vector<GeoPoint>{w.points[i]} : std::vector<GeoPoint>{};
    }
    case QueryType::Distance: return oracle::distance(data, w.distances[i]);
    case QueryType::Join: return oracle::polygon(data, w.polygons[i].ring);
  }
  return {};
}

/// Executes a workload single-threaded. Timed passes run without phase
/// profiling; a separate profiled pass fills `totals`. With opts.verify,
/// every result is compared with the brute-force scan after measurement and
/// the first disagreement throws verification_error.
inline RunResult run_workload(const PartitionedIndex& idx, std::span<const GeoPoint> data,
                              const Workload& w, const RunOptions& opts = {}) {
  using Clock = std::chrono::steady_clock;
  detail::Executor exec(idx, w);
  RunResult res;
  res.queries = w.size();
  std::vector<GeoPoint> out;

  if (opts.warmup) {
    for (std::size_t i = 0; i < res.queries; ++i) {
      out.clear();
      exec.run(i, out, nullptr);
    }
  }

  std::vector<double> best(res.queries, std::numeric_limits<double>::infinity());
  for (std::size_t rep = 0; rep < std::max<std::size_t>(1, opts.repetitions); ++rep) {
    for (std::size_t i = 0; i < res.queries; ++i) {
      out.clear();
      const auto t0 = Clock::now();
      exec.run(i, out, nullptr);
      const auto t1 = Clock::now();
      best[i] = std::min(best[i], std::chrono::duration<double, std::nano>(t1 - t0).count());
    }
  }
  res.latency = summarize(best);

  for (std::size_t i = 0; i < res.queries; ++i) {
    out.clear();
    exec.run(i, out, opts.profile ? &res.totals : nullptr);
    res.results += out.size();
    res.checksum += oracle::checksum(out) * (2 * i + 1);
  }

  if (opts.verify) {
    std::optional<oracle::PointSet> members;
    if (w.type == QueryType::Point) members.emplace(data);
    for (std::size_t i = 0; i < res.queries; ++i) {
      out.clear();
      exec.run(i, out, nullptr);
      const auto expected = oracle_answer(data, w, i, members ? &*members : nullptr);
      if (!oracle::same_multiset(out, expected)) {
        throw verification_error("verification failed on " + detail::describe(w, i) + ": index returned " +
                                 std::to_string(out.size()) + " point(s), brute force " +
                                 std::to_string(expected.size()));
      }
    }
    res.verified = true;
  }
  return res;
}

/// Number of directory cells for grid techniques; partitions otherwise.
inline std::size_t cell_count(const PartitionedIndex& idx) {
  if (const auto* g = std::get_if<directory::FixedGrid>(&idx.directory())) return g->cell_count();
  if (const auto* g = std::get_if<directory::AdaptiveGrid>(&idx.directory())) return g->stripe_count();
  return idx.partitions().size();
}

/// One line of a benchmark report.
struct ReportRow {
  Technique technique = Technique::FixedGrid;
  SearchKind search = SearchKind::Spline;
  std::size_t leaf_size = 0;
  QueryType query_type = QueryType::Range;
  double selectivity = 0.0;
  Distribution distribution = Distribution::Skewed;
  std::size_t queries = 0;
  LatencyStats latency;
  double build_ms = 0.0;
  std::size_t index_bytes = 0;
  std::size_t partitions = 0;
  std::size_t cells = 0;
  double avg_partitions = 0.0;
  double avg_points_scanned = 0.0;
  double avg_lookup_ns = 0.0;
  double avg_refinement_ns = 0.0;
  double avg_scan_ns = 0.0;
  double avg_refine_ns = 0.0;
  std::size_t results = 0;
  std::uint64_t checksum = 0;
  bool verified = false;
};

inline ReportRow make_row(const PartitionedIndex& idx, const WorkloadSpec& spec, const RunResult& r) {
  ReportRow row;
  row.technique = idx.technique();
  row.search = idx.config().search;
  row.leaf_size = idx.config().leaf_size;
  row.query_type = spec.query_type;
  row.selectivity = spec.selectivity;
  row.distribution = spec.distribution;
  row.queries = r.queries;
  row.latency = r.latency;
  row.build_ms = idx.build_seconds() * 1e3;
  row.index_bytes = idx.memory_bytes();
  row.partitions = idx.partitions().size();
  row.cells = cell_count(idx);
  row.avg_partitions = r.avg(&QueryProfile::partitions_intersected);
  row.avg_points_scanned = r.avg(&QueryProfile::points_scanned);
  row.avg_lookup_ns = r.avg_ns(&QueryProfile::lookup_ns);
  row.avg_refinement_ns = r.avg_ns(&QueryProfile::refinement_ns);
  row.avg_scan_ns = r.avg_ns(&QueryProfile::scan_ns);
  row.avg_refine_ns = r.avg_ns(&QueryProfile::refine_ns);
  row.results = r.results;
  row.checksum = r.checksum;
  row.verified = r.verified;
  return row;
}

inline void write_header(std::ostream& os, bool plot_data) {
  os << "technique,search,leaf_size,query_type,selectivity,distribution,queries,mean_ns,median_ns,p99_ns,"
        "build_ms,index_bytes,partitions,cells,avg_partitions,avg_points_scanned,results,checksum,verified";
  if (plot_data) os << ",lookup_ns,refinement_ns,scan_ns,refine_ns";
  os << '\n';
}

inline void write_row(std::ostream& os, const ReportRow& r, bool plot_data) {
  os << to_string(r.technique) << ',' << to_string(r.search) << ',' << r.leaf_size << ','
     << to_string(r.query_type) << ',' << r.selectivity << ',' << to_string(r.distribution) << ','
     << r.queries << ',' << r.latency.mean_ns << ',' << r.latency.median_ns << ',' << r.latency.p99_ns << ','
     << r.build_ms << ',' << r.index_bytes << ',' << r.partitions << ',' << r.cells << ','
     << r.avg_partitions << ',' << r.avg_points_scanned << ',' << r.results << ',' << r.checksum << ','
     << (r.verified ? "yes" : "no");
  if (plot_data) {
    os << ',' << r.avg_lookup_ns << ',' << r.avg_refinement_ns << ',' << r.avg_scan_ns << ','
       << r.avg_refine_ns;
  }
  os << '\n';
}

struct TuneResult {
  std::vector<ReportRow> rows;  ///< one per swept leaf size, in sweep order
  std::size_t best_leaf_size = 0;
  const ReportRow& best() const {
    for (const auto& r : rows) {
      if (r.leaf_size == best_leaf_size) return r;
    }
    throw std::logic_error("tune result without best row");
  }
};

inline void validate_sweep(std::span<const std::size_t> sweep) {
  if (sweep.empty()) throw config_error("leaf-size sweep must not be empty");
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    if (sweep[i] < 1) throw config_error("leaf sizes must be >= 1");
    if (i > 0 && sweep[i] <= sweep[i - 1]) throw config_error("leaf-size sweep must be strictly increasing");
  }
}

/// Builds one index per leaf size and runs the workload on each; the best
/// leaf size minimizes mean latency.
inline TuneResult tune(std::span<const GeoPoint> data, BuildConfig cfg, std::span<const std::size_t> sweep,
                       const WorkloadSpec& spec, const Workload& w, const RunOptions& opts = {}) {
  validate_sweep(sweep);
  TuneResult out;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t l : sweep) {
    cfg.leaf_size = l;
    const PartitionedIndex idx = PartitionedIndex::build(data, cfg);
    const RunResult r = run_workload(idx, data, w, opts);
    out.rows.push_back(make_row(idx, spec, r));
    if (r.latency.mean_ns < best) {
      best = r.latency.mean_ns;
      out.best_leaf_size = l;
    }
  }
  return out;
}

struct CompareRow {
  ReportRow row;            ///< measured at this cell's own best leaf size
  double speedup = 0.0;     ///< binary mean / spline mean for the technique, 0 if n/a
};

/// Technique x search cross product, each cell tuned over `sweep`.
inline std::vector<CompareRow> compare(std::span<const GeoPoint> data, const BuildConfig& base,
                                       std::span<const Technique> techniques,
                                       std::span<const SearchKind> searches,
                                       std::span<const std::size_t> sweep, const WorkloadSpec& spec,
                                       const Workload& w, const RunOptions& opts = {}) {
  std::vector<CompareRow> out;
  for (Technique t : techniques) {
    const std::size_t first = out.size();
    for (SearchKind s : searches) {
      BuildConfig cfg = base;
      cfg.technique = t;
      cfg.search = s;
      const TuneResult tr = tune(data, cfg, sweep, spec, w, opts);
      out.push_back({tr.best(), 0.0});
    }
    double bs = 0.0;
    double ml = 0.0;
    for (std::size_t i = first; i < out.size(); ++i) {
      (out[i].row.search == SearchKind::Binary ? bs : ml) = out[i].row.latency.mean_ns;
    }
    if (bs > 0.0 && ml > 0.0) {
      for (std::size_t i = first; i < out.size(); ++i) out[i].speedup = bs / ml;
    }
  }
  return out;
}

}  // namespace lsi::bench
