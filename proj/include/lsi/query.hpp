#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lsi/geo.hpp"
#include "lsi/index.hpp"
#include "lsi/polygon.hpp"
#include "lsi/search.hpp"

namespace lsi {

struct RangeQuery {
  Rect rect;
};

struct DistanceQuery {
  GeoPoint center;
  double meters = 0.0;
};

/// Per-query phase timings (nanoseconds) and counters. Phases that a query
/// does not go through stay at zero.
struct QueryProfile {
  double lookup_ns = 0.0;
  double refinement_ns = 0.0;  ///< boundary refinement on the sort dimension
  double scan_ns = 0.0;        ///< block copies and predicate scans
  double refine_ns = 0.0;      ///< exact geometry test (distance / polygon)
  std::size_t partitions_intersected = 0;
  std::size_t points_scanned = 0;
  std::size_t candidates_refined = 0;
  std::size_t results = 0;

  double total_ns() const { return lookup_ns + refinement_ns + scan_ns + refine_ns; }

  QueryProfile& operator+=(const QueryProfile& o) {
    lookup_ns += o.lookup_ns;
    refinement_ns += o.refinement_ns;
    scan_ns += o.scan_ns;
    refine_ns += o.refine_ns;
    partitions_intersected += o.partitions_intersected;
    points_scanned += o.points_scanned;
    candidates_refined += o.candidates_refined;
    results += o.results;
    return *this;
  }
};

namespace detail {

using Clock = std::chrono::steady_clock;

/// Samples the clock only when a profile is attached.
class PhaseTimer {
 public:
  explicit PhaseTimer(bool enabled) : enabled_(enabled) {
    if (enabled_) last_ = Clock::now();
  }
  void lap(double& into) {
    if (!enabled_) return;
    const auto now = Clock::now();
    into += std::chrono::duration<double, std::nano>(now - last_).count();
    last_ = now;
  }

 private:
  bool enabled_;
  Clock::time_point last_{};
};

}  // namespace detail

/// Reusable buffers so that repeated queries avoid reallocating.
struct QueryScratch {
  std::vector<PartitionId> partitions;
  std::vector<GeoPoint> candidates;
};

/// Appends every point of `idx` inside q to `out`.
///
/// Partitions fully inside q are copied whole. Partitions inside q on lat
/// only are copied between the refined lon bounds. Other partitions are
/// scanned between the lon bounds with the lat predicate.
inline void range_query(const PartitionedIndex& idx, const Rect& q, std::vector<GeoPoint>& out,
                        QueryScratch& scratch, QueryProfile* profile = nullptr) {
  QueryProfile local;
  QueryProfile& prof = profile ? *profile : local;
  detail::PhaseTimer timer(profile != nullptr);
  const std::size_t out_start = out.size();

  idx.index_lookup(q, scratch.partitions);
  prof.partitions_intersected += scratch.partitions.size();
  timer.lap(prof.lookup_ns);

  for (PartitionId id : scratch.partitions) {
    const Partition& part = idx.partition(id);
    const std::span<const GeoPoint> pts = part.view();
    const Rect& b = part.bounds;
    const bool lat_inside = q.xl <= b.xl && b.xh <= q.xh;

    if (lat_inside && q.yl <= b.yl && b.yh <= q.yh) {
      out.insert(out.end(), pts.begin(), pts.end());
      prof.points_scanned += pts.size();
      timer.lap(prof.scan_ns);
      continue;
    }

    const std::size_t lb = local_search_lower(pts, part.model.estimate_from(pts, q.yl), q.yl);
    const std::size_t ub = local_search_upper(pts, part.model.estimate_to(pts, q.yh), q.yh);
    timer.lap(prof.refinement_ns);
    if (lb >= ub) continue;

    prof.points_scanned += ub - lb;
    if (lat_inside) {
      out.insert(out.end(), pts.begin() + static_cast<std::ptrdiff_t>(lb),
                 pts.begin() + static_cast<std::ptrdiff_t>(ub));
    } else {
      for (std::size_t i = lb; i < ub; ++i) {
        const GeoPoint& p = pts[i];
        if (q.xl <= p.lat && p.lat <= q.xh) out.push_back(p);
      }
    }
    timer.lap(prof.scan_ns);
  }
  prof.results += out.size() - out_start;
}

inline std::vector<GeoPoint> range_query(const PartitionedIndex& idx, const RangeQuery& q,
                                         QueryProfile* profile = nullptr) {
  std::vector<GeoPoint> out;
  QueryScratch scratch;
  range_query(idx, q.rect, out, scratch, profile);
  return out;
}

/// Exact membership test: true iff qp is stored with both coordinates equal.
inline bool point_query(const PartitionedIndex& idx, const GeoPoint& qp, QueryScratch& scratch,
                        QueryProfile* profile = nullptr) {
  QueryProfile local;
  QueryProfile& prof = profile ? *profile : local;
  detail::PhaseTimer timer(profile != nullptr);

  idx.point_lookup(qp, scratch.partitions);
  timer.lap(prof.lookup_ns);
  bool found = false;
  for (PartitionId id : scratch.partitions) {
    ++prof.partitions_intersected;
    const Partition& part = idx.partition(id);
    const std::size_t est = part.model.estimate_from(part.view(), qp.lon);
    found = search_point(part.view(), est, qp);
    timer.lap(prof.refinement_ns);
    if (found) break;
  }
  prof.results += found ? 1 : 0;
  return found;
}

inline bool point_query(const PartitionedIndex& idx, const GeoPoint& qp,
                        QueryProfile* profile = nullptr) {
  QueryScratch scratch;
  return point_query(idx, qp, scratch, profile);
}

/// Points within `meters` (haversine) of the center: range filter on the
/// circle's bounding rectangle, then an exact distance test.
inline void distance_query(const PartitionedIndex& idx, const DistanceQuery& q,
                           std::vector<GeoPoint>& out, QueryScratch& scratch,
                           QueryProfile* profile = nullptr) {
  const Rect mbr = mbr_of_circle(q.center, q.meters);
  scratch.candidates.clear();
  range_query(idx, mbr, scratch.candidates, scratch, profile);

  detail::PhaseTimer timer(profile != nullptr);
  const std::size_t out_start = out.size();
  for (const GeoPoint& p : scratch.candidates) {
    if (within_distance(p, q.center, q.meters)) out.push_back(p);
  }
  if (profile) {
    timer.lap(profile->refine_ns);
    profile->candidates_refined += scratch.candidates.size();
    // range_query counted the candidates as results.
    profile->results -= scratch.candidates.size();
    profile->results += out.size() - out_start;
  }
}

inline std::vector<GeoPoint> distance_query(const PartitionedIndex& idx, const DistanceQuery& q,
                                            QueryProfile* profile = nullptr) {
  std::vector<GeoPoint> out;
  QueryScratch scratch;
  distance_query(idx, q, out, scratch, profile);
  return out;
}

/// Points contained in one polygon: range filter on its MBR, then ray casting.
inline void polygon_query(const PartitionedIndex& idx, const Polygon& poly,
                          std::vector<GeoPoint>& out, QueryScratch& scratch,
                          QueryProfile* profile = nullptr) {
  scratch.candidates.clear();
  range_query(idx, poly.mbr(), scratch.candidates, scratch, profile);

  detail::PhaseTimer timer(profile != nullptr);
  const std::size_t out_start = out.size();
  for (const GeoPoint& p : scratch.candidates) {
    if (poly.contains(p)) out.push_back(p);
  }
  if (profile) {
    timer.lap(profile->refine_ns);
    profile->candidates_refined += scratch.candidates.size();
    // range_query counted the candidates as results.
    profile->results -= scratch.candidates.size();
    profile->results += out.size() - out_start;
  }
}

/// Result of joining one input polygon; `error` is set when the polygon
/// was rejected, in which case `points` is empty.
struct JoinResult {
  std::string id;
  std::vector<GeoPoint> points;
  std::string error;
  bool ok() const { return error.empty(); }
};

/// Per-polygon point sets, in input order.
inline std::vector<JoinResult> join_query(const PartitionedIndex& idx,
                                          std::span<const Polygon> polys,
                                          QueryProfile* profile = nullptr) {
  std::vector<JoinResult> out(polys.size());
  QueryScratch scratch;
  for (std::size_t i = 0; i < polys.size(); ++i) {
    out[i].id = polys[i].id();
    polygon_query(idx, polys[i], out[i].points, scratch, profile);
  }
  return out;
}

/// Join over raw rings; malformed rings yield an error entry and the
/// remaining polygons are still processed.
inline std::vector<JoinResult> join_query(const PartitionedIndex& idx,
                                          std::span<const PolygonRecord> records,
                                          QueryProfile* profile = nullptr) {
  std::vector<JoinResult> out(records.size());
  QueryScratch scratch;
  for (std::size_t i = 0; i < records.size(); ++i) {
    out[i].id = records[i].id;
    try {
      const Polygon poly = Polygon::from_ring(records[i].ring, records[i].id);
      polygon_query(idx, poly, out[i].points, scratch, profile);
    } catch (const polygon_error& e) {
      out[i].error = e.what();
    }
  }
  return out;
}

}  // namespace lsi
