#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsi/geo.hpp"
#include "lsi/interval_tree.hpp"

namespace lsi {

class polygon_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simple polygon (no holes) with its edges indexed by latitude span.
///
/// Containment casts a ray from the candidate point towards +lon along its
/// latitude. The interval tree yields the edges whose latitude span contains
/// the ray, and a crossing is counted with the half-open rule: an edge is
/// crossed when exactly one endpoint lies strictly above the ray. Points on
/// the boundary are classified as inside.
class Polygon {
 public:
  Polygon() = default;

  /// Builds from a ring; the ring is closed implicitly if the last vertex
  /// differs from the first. Throws polygon_error on fewer than three
  /// distinct vertices.
  static Polygon from_ring(std::vector<GeoPoint> ring, std::string id = {}) {
    if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
    std::vector<GeoPoint> distinct = ring;
    std::sort(distinct.begin(), distinct.end(), lat_lon_less);
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    if (distinct.size() < 3) {
      throw polygon_error("polygon '" + id +
                          "' needs at least 3 distinct vertices");
    }
    for (const auto& v : ring) {
      if (!is_valid(v)) {
        throw polygon_error("polygon '" + id + "' has an invalid vertex");
      }
    }

    Polygon poly;
    poly.id_ = std::move(id);
    poly.mbr_ = bounding_rect(ring);
    ring.push_back(ring.front());
    poly.ring_ = std::move(ring);

    std::vector<IntervalTree::Interval> spans;
    spans.reserve(poly.edge_count());
    for (std::uint32_t i = 0; i < poly.edge_count(); ++i) {
      const GeoPoint& a = poly.ring_[i];
      const GeoPoint& b = poly.ring_[i + 1];
      spans.push_back({std::min(a.lat, b.lat), std::max(a.lat, b.lat), i});
    }
    poly.edges_ = IntervalTree(std::move(spans));
    return poly;
  }

  const std::string& id() const { return id_; }
  /// Closed ring: front() == back().
  const std::vector<GeoPoint>& ring() const { return ring_; }
  std::size_t edge_count() const { return ring_.empty() ? 0 : ring_.size() - 1; }
  const Rect& mbr() const { return mbr_; }
  const IntervalTree& edge_index() const { return edges_; }

  bool contains(const GeoPoint& p) const {
    if (!mbr_.contains(p)) return false;
    bool inside = false;
    bool on_edge = false;
    edges_.stab(p.lat, [&](const IntervalTree::Interval& iv) {
      if (on_edge) return;
      const GeoPoint& a = ring_[iv.id];
      const GeoPoint& b = ring_[iv.id + 1];
      if (on_segment(a, b, p)) {
        on_edge = true;
        return;
      }
      if ((a.lat > p.lat) != (b.lat > p.lat)) {
        const double cross_lon =
            a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
        if (p.lon < cross_lon) inside = !inside;
      }
    });
    return on_edge || inside;
  }

  std::size_t memory_bytes() const {
    return ring_.size() * sizeof(GeoPoint) + edges_.memory_bytes();
  }

 private:
  static bool on_segment(const GeoPoint& a, const GeoPoint& b,
                         const GeoPoint& p) {
    const double cross =
        (b.lat - a.lat) * (p.lon - a.lon) - (b.lon - a.lon) * (p.lat - a.lat);
    if (cross != 0.0) return false;
    return std::min(a.lon, b.lon) <= p.lon && p.lon <= std::max(a.lon, b.lon) &&
           std::min(a.lat, b.lat) <= p.lat && p.lat <= std::max(a.lat, b.lat);
  }

  std::string id_;
  std::vector<GeoPoint> ring_;
  Rect mbr_;
  IntervalTree edges_;
};

inline bool point_in_polygon(const Polygon& poly, const GeoPoint& p) {
  return poly.contains(p);
}

/// A polygon as read from a polygon file, before validation.
struct PolygonRecord {
  std::string id;
  std::vector<GeoPoint> ring;
  std::size_t line = 0;
};

/// Parses `<id>;<lat> <lon>,<lat> <lon>,...`. Throws polygon_error naming the
/// line on syntax errors; geometric validation happens in Polygon::from_ring.
inline PolygonRecord parse_polygon_line(const std::string& line,
                                        std::size_t line_no = 0) {
  const auto fail = [&](const std::string& what) {
    return polygon_error("line " + std::to_string(line_no) + ": " + what);
  };
  const auto semi = line.find(';');
  if (semi == std::string::npos) throw fail("missing ';' after polygon id");
  PolygonRecord rec;
  rec.id = line.substr(0, semi);
  rec.line = line_no;
  std::stringstream body(line.substr(semi + 1));
  std::string vertex;
  while (std::getline(body, vertex, ',')) {
    std::istringstream vs(vertex);
    GeoPoint p;
    if (!(vs >> p.lat >> p.lon)) throw fail("malformed vertex '" + vertex + "'");
    std::string rest;
    if (vs >> rest) throw fail("trailing data in vertex '" + vertex + "'");
    rec.ring.push_back(p);
  }
  return rec;
}

inline std::vector<PolygonRecord> read_polygon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw polygon_error("cannot open polygon file '" + path + "'");
  std::vector<PolygonRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(parse_polygon_line(line, line_no));
  }
  return out;
}

inline void write_polygon_line(std::ostream& out, const std::string& id,
                               const std::vector<GeoPoint>& ring) {
  const auto old_precision = out.precision(17);
  out << id << ';';
  std::size_t n = ring.size();
  if (n >= 2 && ring.front() == ring.back()) --n;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out << ',';
    out << ring[i].lat << ' ' << ring[i].lon;
  }
  out << '\n';
  out.precision(old_precision);
}

}  // namespace lsi
