#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lsi {

/// Mean earth radius in meters used by every geodesic computation.
inline constexpr double kEarthRadiusMeters = 6371000.0;

/// A location in decimal degrees. `lat` is the partitioning (x) dimension,
/// `lon` the sort (y) dimension.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend constexpr bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

inline constexpr bool lon_less(const GeoPoint& a, const GeoPoint& b) {
  return a.lon < b.lon;
}

/// Lexicographic (lat, lon) order; used to compare result multisets.
inline constexpr bool lat_lon_less(const GeoPoint& a, const GeoPoint& b) {
  return a.lat < b.lat || (a.lat == b.lat && a.lon < b.lon);
}

inline bool is_valid(const GeoPoint& p) {
  return p.lat >= -90.0 && p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0;
}

/// Closed axis-aligned rectangle: x bounds on latitude, y bounds on longitude.
struct Rect {
  double xl = 0.0;
  double yl = 0.0;
  double xh = 0.0;
  double yh = 0.0;

  constexpr bool contains(const GeoPoint& p) const {
    return xl <= p.lat && yl <= p.lon && xh >= p.lat && yh >= p.lon;
  }
  constexpr bool contains(const Rect& r) const {
    return xl <= r.xl && yl <= r.yl && r.xh <= xh && r.yh <= yh;
  }
  constexpr bool intersects(const Rect& r) const {
    return xl <= r.xh && r.xl <= xh && yl <= r.yh && r.yl <= yh;
  }
  constexpr bool well_formed() const { return xl <= xh && yl <= yh; }
  constexpr double width() const { return xh - xl; }
  constexpr double height() const { return yh - yl; }

  static constexpr Rect of_point(const GeoPoint& p) {
    return {p.lat, p.lon, p.lat, p.lon};
  }

  void expand(const GeoPoint& p) {
    xl = std::min(xl, p.lat);
    xh = std::max(xh, p.lat);
    yl = std::min(yl, p.lon);
    yh = std::max(yh, p.lon);
  }
  void expand(const Rect& r) {
    xl = std::min(xl, r.xl);
    xh = std::max(xh, r.xh);
    yl = std::min(yl, r.yl);
    yh = std::max(yh, r.yh);
  }

  friend constexpr bool operator==(const Rect&, const Rect&) = default;
};

/// Tight bounding rectangle of a non-empty point range.
template <typename Range>
Rect bounding_rect(const Range& points) {
  auto it = std::begin(points);
  auto end = std::end(points);
  if (it == end) throw std::invalid_argument("bounding_rect of empty range");
  Rect r = Rect::of_point(*it);
  for (++it; it != end; ++it) r.expand(*it);
  return r;
}

inline constexpr double deg_to_rad(double deg) {
  return deg * std::numbers::pi / 180.0;
}
inline constexpr double rad_to_deg(double rad) {
  return rad * 180.0 / std::numbers::pi;
}

/// Great-circle distance in meters on a sphere of radius kEarthRadiusMeters.
inline double haversine(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = deg_to_rad(a.lat);
  const double phi2 = deg_to_rad(b.lat);
  const double dphi = phi2 - phi1;
  const double dlambda = deg_to_rad(b.lon - a.lon);
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusMeters * std::asin(std::sqrt(h));
}

inline bool within_distance(const GeoPoint& p, const GeoPoint& center,
                            double meters) {
  return haversine(p, center) <= meters;
}

/// Bounding rectangle of the spherical cap of radius `meters` around
/// `center`. Latitude bounds clamp at the poles; a cap containing a pole
/// spans every longitude. A cap crossing the antimeridian is not split: the
/// longitude range becomes [-180, 180].
inline Rect mbr_of_circle(const GeoPoint& center, double meters) {
  if (meters < 0.0) throw std::invalid_argument("negative distance");
  const double dlat = rad_to_deg(meters / kEarthRadiusMeters);
  const double lat_lo = center.lat - dlat;
  const double lat_hi = center.lat + dlat;
  if (lat_hi >= 90.0 || lat_lo <= -90.0) {
    return {std::max(lat_lo, -90.0), -180.0, std::min(lat_hi, 90.0), 180.0};
  }
  if (meters == 0.0) return Rect::of_point(center);

  // The widest longitude extent is reached on the bound closest to a pole.
  const double lat_far = std::max(std::abs(lat_lo), std::abs(lat_hi));
  const double cos_far = std::cos(deg_to_rad(lat_far));
  const double dlon = rad_to_deg(meters / (kEarthRadiusMeters * cos_far));
  const double lon_lo = center.lon - dlon;
  const double lon_hi = center.lon + dlon;
  if (dlon >= 180.0 || lon_lo < -180.0 || lon_hi > 180.0) {
    return {lat_lo, -180.0, lat_hi, 180.0};
  }
  return {lat_lo, lon_lo, lat_hi, lon_hi};
}

}  // namespace lsi
