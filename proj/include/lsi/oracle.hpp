#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <unordered_set>
#include <vector>

#include "lsi/geo.hpp"
#include "lsi/query.hpp"

// Brute-force reference answers. Nothing here touches the partitioned
// index; every query is a full scan of the dataset.
namespace lsi::oracle {

inline std::vector<GeoPoint> range(std::span<const GeoPoint> data, const Rect& q) {
  std::vector<GeoPoint> out;
  for (const auto& p : data) {
    if (q.xl <= p.lat && q.yl <= p.lon && q.xh >= p.lat && q.yh >= p.lon) out.push_back(p);
  }
  return out;
}

inline bool point(std::span<const GeoPoint> data, const GeoPoint& q) {
  return std::any_of(data.begin(), data.end(), [&](const GeoPoint& p) { return p == q; });
}

inline std::vector<GeoPoint> distance(std::span<const GeoPoint> data, const DistanceQuery& q) {
  std::vector<GeoPoint> out;
  for (const auto& p : data) {
    if (haversine(q.center, p) <= q.meters) out.push_back(p);
  }
  return out;
}

/// Ray casting against every edge of a ring (closed or not), with the same
/// boundary conventions as Polygon::contains.
inline bool ring_contains(std::span<const GeoPoint> ring, const GeoPoint& p) {
  std::size_t n = ring.size();
  if (n >= 2 && ring.front() == ring.back()) --n;
  bool inside = false;
  for (std::size_t i = 0; i < n; ++i) {
    const GeoPoint& a = ring[i];
    const GeoPoint& b = ring[(i + 1) % n];
    const double cross = (b.lat - a.lat) * (p.lon - a.lon) - (b.lon - a.lon) * (p.lat - a.lat);
    if (cross == 0.0 && std::min(a.lat, b.lat) <= p.lat && p.lat <= std::max(a.lat, b.lat) &&
        std::min(a.lon, b.lon) <= p.lon && p.lon <= std::max(a.lon, b.lon)) {
      return true;
    }
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      const double x = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
      if (p.lon < x) inside = !inside;
    }
  }
  return inside;
}

inline std::vector<GeoPoint> polygon(std::span<const GeoPoint> data, std::span<const GeoPoint> ring) {
  std::vector<GeoPoint> out;
  for (const auto& p : data) {
    if (ring_contains(ring, p)) out.push_back(p);
  }
  return out;
}

/// Hash-set membership oracle for point queries.
class PointSet {
 public:
  explicit PointSet(std::span<const GeoPoint> data) : set_(data.begin(), data.end()) {}
  bool contains(const GeoPoint& p) const { return set_.count(p) != 0; }

 private:
  struct Hash {
    std::size_t operator()(const GeoPoint& p) const {
      const auto a = std::bit_cast<std::uint64_t>(p.lat + 0.0);
      const auto b = std::bit_cast<std::uint64_t>(p.lon + 0.0);
      return static_cast<std::size_t>((a * 0x9e3779b97f4a7c15ULL) ^ (b + 0x7f4a7c159e3779b9ULL + (a << 6)));
    }
  };
  std::unordered_set<GeoPoint, Hash> set_;
};

/// Order-independent digest of a point multiset.
inline std::uint64_t checksum(std::span<const GeoPoint> points) {
  std::uint64_t sum = points.size();
  for (const auto& p : points) {
    std::uint64_t h = std::bit_cast<std::uint64_t>(p.lat + 0.0) * 0x9e3779b97f4a7c15ULL;
    h ^= std::rotl(std::bit_cast<std::uint64_t>(p.lon + 0.0), 29) * 0xc2b2ae3d27d4eb4fULL;
    h ^= h >> 31;
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 29;
    sum += h;
  }
  return sum;
}

inline bool same_multiset(std::vector<GeoPoint> a, std::vector<GeoPoint> b) {
  if (a.size() != b.size()) return false;
  std::sort(a.begin(), a.end(), lat_lon_less);
  std::sort(b.begin(), b.end(), lat_lon_less);
  return a == b;
}

}  // namespace lsi::oracle
