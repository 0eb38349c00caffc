#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lsi/geo.hpp"
#include "lsi/polygon.hpp"
#include "lsi/query.hpp"

namespace lsi {

/// Raised for unreadable or invalid datasets; carries the offending lines.
class ingestion_error : public std::runtime_error {
 public:
  ingestion_error(const std::string& what, std::vector<std::size_t> lines = {})
      : std::runtime_error(what), lines_(std::move(lines)) {}
  const std::vector<std::size_t>& lines() const { return lines_; }

 private:
  std::vector<std::size_t> lines_;
};

/// Raised for workload specifications that cannot be satisfied.
class spec_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class QueryType { Range, Point, Distance, Join };
enum class Distribution { Skewed, Uniform };

inline std::string_view to_string(QueryType t) {
  switch (t) {
    case QueryType::Range: return "range";
    case QueryType::Point: return "point";
    case QueryType::Distance: return "distance";
    case QueryType::Join: return "join";
  }
  return "?";
}
inline std::string_view to_string(Distribution d) {
  return d == Distribution::Skewed ? "skewed" : "uniform";
}

inline std::optional<QueryType> parse_query_type(std::string_view s) {
  if (s == "range") return QueryType::Range;
  if (s == "point") return QueryType::Point;
  if (s == "distance") return QueryType::Distance;
  if (s == "join") return QueryType::Join;
  return std::nullopt;
}

/// Default selectivity ladder, 0.00001% to 1%.
inline constexpr std::array<double, 6> kDefaultSelectivities = {1e-7, 1e-6, 1e-5,
                                                                1e-4, 1e-3, 1e-2};

struct WorkloadSpec {
  QueryType query_type = QueryType::Range;
  double selectivity = 1e-5;
  Distribution distribution = Distribution::Skewed;
  std::size_t count = 1000;
  std::uint64_t seed = 42;
};

struct SyntheticSpec {
  std::size_t n = 100000;
  std::size_t clusters = 5;  ///< 0 draws uniformly over the domain
  double spread = 0.02;      ///< per-cluster standard deviation, degrees
  Rect domain{40.5, -74.3, 41.0, -73.7};
  std::uint64_t seed = 1;
};

// ---------------------------------------------------------------- datasets

namespace detail {

inline bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

/// Parses a `lat,lon` CSV stream. All bad rows are collected before
/// throwing so the error lists every offending line.
inline std::vector<GeoPoint> read_points(std::istream& in) {
  std::vector<GeoPoint> points;
  std::vector<std::size_t> bad;
  std::string line;
  std::size_t line_no = 0;
  std::string first_error;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("lat", 0) == 0) continue;
    }
    if (line.empty()) continue;
    const auto fields = detail::split(line, ',');
    GeoPoint p;
    std::string problem;
    if (fields.size() != 2 || !detail::parse_double(fields[0], p.lat) ||
        !detail::parse_double(fields[1], p.lon)) {
      problem = "malformed row";
    } else if (!is_valid(p)) {
      problem = "coordinate out of range";
    }
    if (!problem.empty()) {
      if (first_error.empty()) first_error = "line " + std::to_string(line_no) + ": " + problem;
      bad.push_back(line_no);
      continue;
    }
    points.push_back(p);
  }
  if (!bad.empty()) {
    throw ingestion_error(std::to_string(bad.size()) + " invalid row(s), first at " + first_error,
                          std::move(bad));
  }
  return points;
}

inline std::vector<GeoPoint> load_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ingestion_error("cannot open dataset '" + path + "'");
  return read_points(in);
}

inline void write_points(std::ostream& out, std::span<const GeoPoint> points) {
  const auto old_precision = out.precision(17);
  out << "lat,lon\n";
  for (const auto& p : points) out << p.lat << ',' << p.lon << '\n';
  out.precision(old_precision);
}

inline void save_points(const std::string& path, std::span<const GeoPoint> points) {
  std::ofstream out(path);
  if (!out) throw ingestion_error("cannot write '" + path + "'");
  write_points(out, points);
}

/// Gaussian mixture with cluster centers uniform in the domain; points are
/// clamped to the domain.
inline std::vector<GeoPoint> gen_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 1) throw spec_error("synthetic dataset needs n >= 1");
  if (!spec.domain.well_formed() || !is_valid({spec.domain.xl, spec.domain.yl}) ||
      !is_valid({spec.domain.xh, spec.domain.yh})) {
    throw spec_error("synthetic domain must be a valid lat/lon rectangle");
  }
  if (spec.spread < 0.0) throw spec_error("spread must be >= 0");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> ulat(spec.domain.xl, spec.domain.xh);
  std::uniform_real_distribution<double> ulon(spec.domain.yl, spec.domain.yh);
  std::vector<GeoPoint> out;
  out.reserve(spec.n);
  if (spec.clusters == 0) {
    for (std::size_t i = 0; i < spec.n; ++i) {
      const double lat = ulat(rng);
      out.push_back({lat, ulon(rng)});
    }
    return out;
  }
  std::vector<GeoPoint> centers(spec.clusters);
  for (auto& c : centers) {
    c.lat = ulat(rng);
    c.lon = ulon(rng);
  }
  std::uniform_int_distribution<std::size_t> pick(0, spec.clusters - 1);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const GeoPoint& c = centers[pick(rng)];
    const double dlat = noise(rng) * spec.spread;
    const double dlon = noise(rng) * spec.spread;
    out.push_back({std::clamp(c.lat + dlat, spec.domain.xl, spec.domain.xh),
                   std::clamp(c.lon + dlon, spec.domain.yl, spec.domain.yh)});
  }
  return out;
}

// --------------------------------------------------------------- workloads

/// Brute-force counter used to size generated queries. Points are sorted by
/// latitude so a count only touches the query's latitude band.
class SelectivityCounter {
 public:
  explicit SelectivityCounter(std::span<const GeoPoint> data) : points_(data.begin(), data.end()) {
    std::sort(points_.begin(), points_.end(), lat_lon_less);
  }

  std::size_t count(const Rect& q) const {
    std::size_t c = 0;
    for (auto it = band_begin(q.xl); it != points_.end() && it->lat <= q.xh; ++it) {
      c += (q.yl <= it->lon && it->lon <= q.yh) ? 1 : 0;
    }
    return c;
  }

  std::size_t count(const DistanceQuery& q) const {
    const Rect mbr = mbr_of_circle(q.center, q.meters);
    std::size_t c = 0;
    for (auto it = band_begin(mbr.xl); it != points_.end() && it->lat <= mbr.xh; ++it) {
      if (mbr.yl <= it->lon && it->lon <= mbr.yh && haversine(q.center, *it) <= q.meters) ++c;
    }
    return c;
  }

 private:
  std::vector<GeoPoint>::const_iterator band_begin(double lat) const {
    return std::lower_bound(points_.begin(), points_.end(), lat,
                            [](const GeoPoint& p, double v) { return p.lat < v; });
  }

  std::vector<GeoPoint> points_;
};

namespace detail {

inline void check_selectivity(double s) {
  if (!(s > 0.0) || s > 1.0) throw spec_error("selectivity must be in (0, 1]");
}

/// Result count a query at selectivity s should reach; at least one.
inline std::size_t target_count(std::size_t n, double s) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(s * static_cast<double>(n))));
}

/// Searches a scale r so that count(r) lands in [target, 2 * target].
/// Starting from r0, the scale grows (or shrinks) by a random factor in
/// [1.1, 1.5] per step until the band is entered or crossed; a crossing is
/// then bisected. count must be non-decreasing in r.
template <typename CountFn>
double fit_scale(double r0, double r_max, std::size_t target, CountFn&& count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> step(1.1, 1.5);
  const std::size_t upper = 2 * target;
  constexpr int kMaxSteps = 400;
  constexpr int kMaxBisections = 60;

  double r = r0;
  std::size_t c = count(r);
  double lo = 0.0;
  double hi = 0.0;
  if (c < target) {
    for (int i = 0; i < kMaxSteps && c < target && r < r_max; ++i) {
      lo = r;
      r = std::min(r * step(rng), r_max);
      c = count(r);
    }
    if (c <= upper || lo == 0.0) return r;
    hi = r;
  } else if (c > upper) {
    for (int i = 0; i < kMaxSteps && c > upper && r > r0 * 1e-12; ++i) {
      hi = r;
      r /= step(rng);
      c = count(r);
    }
    if (c >= target) return r;
    lo = r;
  } else {
    return r;
  }
  // count(lo) < target and count(hi) > 2 * target.
  for (int i = 0; i < kMaxBisections; ++i) {
    const double mid = std::sqrt(lo * hi);
    const std::size_t cm = count(mid);
    if (cm < target) {
      lo = mid;
    } else if (cm > upper) {
      hi = mid;
    } else {
      return mid;
    }
  }
  return hi;
}

inline GeoPoint anchor(std::span<const GeoPoint> data, const Rect& extent, Distribution dist,
                       std::mt19937_64& rng) {
  if (dist == Distribution::Skewed) {
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    return data[pick(rng)];
  }
  std::uniform_real_distribution<double> ulat(extent.xl, extent.xh);
  std::uniform_real_distribution<double> ulon(extent.yl, extent.yh);
  const double lat = ulat(rng);
  return {lat, ulon(rng)};
}

}  // namespace detail

/// Range queries grown around an anchor (a data record for skewed
/// workloads, a uniform point of the data extent otherwise) with a random
/// aspect ratio in [0.25, 4] until the brute-force count reaches |D| * s.
inline std::vector<Rect> gen_range_workload(std::span<const GeoPoint> data, const WorkloadSpec& spec,
                                            const SelectivityCounter* counter = nullptr) {
  if (data.empty()) throw spec_error("workload generation needs a non-empty dataset");
  detail::check_selectivity(spec.selectivity);
  std::optional<SelectivityCounter> own;
  if (!counter) counter = &own.emplace(data);

  const Rect extent = bounding_rect(data);
  const double ext_w = std::max(extent.width(), 1e-9);
  const double ext_h = std::max(extent.height(), 1e-9);
  const std::size_t target = detail::target_count(data.size(), spec.selectivity);
  // Half-side of a square holding `target` points under uniform density.
  const double r0 = 0.5 * std::sqrt(ext_w * ext_h * static_cast<double>(target) /
                                    static_cast<double>(data.size()));
  const double r_max = 2.0 * std::max(ext_w, ext_h) * 4.0;

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> log_aspect(std::log(0.25), std::log(4.0));
  std::vector<Rect> out;
  out.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    const GeoPoint a = detail::anchor(data, extent, spec.distribution, rng);
    const double ratio = std::sqrt(std::exp(log_aspect(rng)));
    const auto rect_at = [&](double r) {
      const double hx = r * ratio;
      const double hy = r / ratio;
      return Rect{std::max(a.lat - hx, -90.0), std::max(a.lon - hy, -180.0),
                  std::min(a.lat + hx, 90.0), std::min(a.lon + hy, 180.0)};
    };
    const double r = detail::fit_scale(r0, r_max, target,
                                       [&](double s) { return counter->count(rect_at(s)); }, rng);
    out.push_back(rect_at(r));
  }
  return out;
}

/// Distance queries: as gen_range_workload, growing a radius in meters.
inline std::vector<DistanceQuery> gen_distance_workload(std::span<const GeoPoint> data,
                                                        const WorkloadSpec& spec,
                                                        const SelectivityCounter* counter = nullptr) {
  if (data.empty()) throw spec_error("workload generation needs a non-empty dataset");
  detail::check_selectivity(spec.selectivity);
  std::optional<SelectivityCounter> own;
  if (!counter) counter = &own.emplace(data);

  const Rect extent = bounding_rect(data);
  const double meters_per_deg = std::numbers::pi * kEarthRadiusMeters / 180.0;
  const double ext_w = std::max(extent.width(), 1e-9) * meters_per_deg;
  const double ext_h = std::max(extent.height(), 1e-9) * meters_per_deg;
  const std::size_t target = detail::target_count(data.size(), spec.selectivity);
  const double r0 = std::sqrt(ext_w * ext_h * static_cast<double>(target) /
                              (std::numbers::pi * static_cast<double>(data.size())));
  const double r_max = std::numbers::pi * kEarthRadiusMeters;

  std::mt19937_64 rng(spec.seed);
  std::vector<DistanceQuery> out;
  out.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    const GeoPoint c = detail::anchor(data, extent, spec.distribution, rng);
    const double r = detail::fit_scale(
        r0, r_max, target, [&](double m) { return counter->count(DistanceQuery{c, m}); }, rng);
    out.push_back({c, r});
  }
  return out;
}

/// Point queries drawn uniformly from the dataset itself.
inline std::vector<GeoPoint> gen_point_workload(std::span<const GeoPoint> data, const WorkloadSpec& spec) {
  if (data.empty()) throw spec_error("workload generation needs a non-empty dataset");
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  std::vector<GeoPoint> out(spec.count);
  for (auto& p : out) p = data[pick(rng)];
  return out;
}

/// Convex hull (counter-clockwise in lat/lon, no repeated endpoint).
inline std::vector<GeoPoint> convex_hull(std::vector<GeoPoint> pts) {
  std::sort(pts.begin(), pts.end(), lat_lon_less);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  const auto cross = [](const GeoPoint& o, const GeoPoint& a, const GeoPoint& b) {
    return (a.lat - o.lat) * (b.lon - o.lon) - (a.lon - o.lon) * (b.lat - o.lat);
  };
  std::vector<GeoPoint> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

/// Join polygons: random convex hulls of points sampled inside range
/// queries sized for the requested selectivity.
inline std::vector<PolygonRecord> gen_join_workload(std::span<const GeoPoint> data,
                                                    const WorkloadSpec& spec,
                                                    const SelectivityCounter* counter = nullptr,
                                                    std::size_t hull_samples = 32) {
  const std::vector<Rect> rects = gen_range_workload(data, spec, counter);
  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<PolygonRecord> out;
  out.reserve(rects.size());
  for (std::size_t i = 0; i < rects.size(); ++i) {
    const Rect& r = rects[i];
    PolygonRecord rec;
    rec.id = "p" + std::to_string(i);
    if (r.width() > 0.0 && r.height() > 0.0) {
      std::uniform_real_distribution<double> ulat(r.xl, r.xh);
      std::uniform_real_distribution<double> ulon(r.yl, r.yh);
      std::vector<GeoPoint> sample(hull_samples);
      for (auto& p : sample) {
        p.lat = ulat(rng);
        p.lon = ulon(rng);
      }
      rec.ring = convex_hull(std::move(sample));
    }
    if (rec.ring.size() < 3) {
      // Degenerate extent: fall back to a tiny square around the rectangle.
      const double pad = 1e-9;
      rec.ring = {{r.xl - pad, r.yl - pad}, {r.xl - pad, r.yh + pad},
                  {r.xh + pad, r.yh + pad}, {r.xh + pad, r.yl - pad}};
    }
    out.push_back(std::move(rec));
  }
  return out;
}

/// A workload of one query type, as generated or read from a file.
struct Workload {
  QueryType type = QueryType::Range;
  std::vector<Rect> ranges;
  std::vector<GeoPoint> points;
  std::vector<DistanceQuery> distances;
  std::vector<PolygonRecord> polygons;

  std::size_t size() const {
    switch (type) {
      case QueryType::Range: return ranges.size();
      case QueryType::Point: return points.size();
      case QueryType::Distance: return distances.size();
      case QueryType::Join: return polygons.size();
    }
    return 0;
  }
};

inline Workload gen_workload(std::span<const GeoPoint> data, const WorkloadSpec& spec,
                             const SelectivityCounter* counter = nullptr) {
  Workload w;
  w.type = spec.query_type;
  switch (spec.query_type) {
    case QueryType::Range: w.ranges = gen_range_workload(data, spec, counter); break;
    case QueryType::Point: w.points = gen_point_workload(data, spec); break;
    case QueryType::Distance: w.distances = gen_distance_workload(data, spec, counter); break;
    case QueryType::Join: w.polygons = gen_join_workload(data, spec, counter); break;
  }
  return w;
}

/// CSV with a header naming the query type: `range,xl,yl,xh,yh`,
/// `point,lat,lon` or `distance,lat,lon,d_meters`. Join workloads use the
/// polygon file format instead.
inline void write_workload(std::ostream& out, const Workload& w) {
  const auto old_precision = out.precision(17);
  switch (w.type) {
    case QueryType::Range:
      out << "range,xl,yl,xh,yh\n";
      for (const auto& r : w.ranges) out << r.xl << ',' << r.yl << ',' << r.xh << ',' << r.yh << '\n';
      break;
    case QueryType::Point:
      out << "point,lat,lon\n";
      for (const auto& p : w.points) out << p.lat << ',' << p.lon << '\n';
      break;
    case QueryType::Distance:
      out << "distance,lat,lon,d_meters\n";
      for (const auto& d : w.distances) {
        out << d.center.lat << ',' << d.center.lon << ',' << d.meters << '\n';
      }
      break;
    case QueryType::Join:
      for (const auto& p : w.polygons) write_polygon_line(out, p.id, p.ring);
      break;
  }
  out.precision(old_precision);
}

inline void save_workload(const std::string& path, const Workload& w) {
  std::ofstream out(path);
  if (!out) throw ingestion_error("cannot write '" + path + "'");
  write_workload(out, w);
}

/// Reads a range/point/distance workload file. Join workloads are polygon
/// files and are read with read_polygon_file.
inline Workload read_workload(std::istream& in) {
  Workload w;
  std::string line;
  if (!std::getline(in, line)) throw ingestion_error("empty workload file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split(line, ',');
  const auto type = parse_query_type(header.front());
  if (!type || *type == QueryType::Join) {
    throw ingestion_error("workload header must start with range, point or distance", {1});
  }
  w.type = *type;
  const std::size_t fields = w.type == QueryType::Range ? 4 : w.type == QueryType::Point ? 2 : 3;
  std::size_t line_no = 1;
  std::vector<std::size_t> bad;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = detail::split(line, ',');
    std::array<double, 4> v{};
    bool ok = cols.size() == fields;
    for (std::size_t i = 0; ok && i < fields; ++i) ok = detail::parse_double(cols[i], v[i]);
    if (!ok) {
      bad.push_back(line_no);
      continue;
    }
    switch (w.type) {
      case QueryType::Range: w.ranges.push_back({v[0], v[1], v[2], v[3]}); break;
      case QueryType::Point: w.points.push_back({v[0], v[1]}); break;
      case QueryType::Distance: w.distances.push_back({{v[0], v[1]}, v[2]}); break;
      case QueryType::Join: break;
    }
  }
  if (!bad.empty()) {
    throw ingestion_error("malformed workload row at line " + std::to_string(bad.front()), bad);
  }
  return w;
}

inline Workload load_workload(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ingestion_error("cannot open workload '" + path + "'");
  return read_workload(in);
}

}  // namespace lsi
