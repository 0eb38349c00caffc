#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "lsi/geo.hpp"
#include "lsi/spline.hpp"

namespace lsi {

enum class SearchKind { Binary, Spline };

inline std::string_view to_string(SearchKind k) {
  return k == SearchKind::Binary ? "binary" : "spline";
}

namespace detail {
inline double sort_key(double v) { return v; }
inline double sort_key(const GeoPoint& p) { return p.lon; }
}  // namespace detail

/// Plain binary search; its estimates are exact bounds.
struct BinarySearch {};

/// Boundary-refinement strategy attached to one sorted run of keys.
class SearchModel {
 public:
  SearchModel() = default;
  explicit SearchModel(BinarySearch b) : impl_(b) {}
  explicit SearchModel(SplineModel s) : impl_(std::move(s)) {}

  template <typename T>
  static SearchModel build(SearchKind kind, std::span<const T> sorted,
                           std::size_t max_error = SplineModel::kDefaultMaxError,
                           unsigned radix_bits = SplineModel::kDefaultRadixBits) {
    if (kind == SearchKind::Binary) return SearchModel(BinarySearch{});
    std::vector<double> keys(sorted.size());
    std::transform(sorted.begin(), sorted.end(), keys.begin(),
                   [](const T& v) { return detail::sort_key(v); });
    return SearchModel(SplineModel::build(keys, max_error, radix_bits));
  }

  SearchKind kind() const {
    return std::holds_alternative<BinarySearch>(impl_) ? SearchKind::Binary
                                                        : SearchKind::Spline;
  }
  const SplineModel* spline() const { return std::get_if<SplineModel>(&impl_); }

  /// Estimate of the first index with key >= bound. Exact for binary search;
  /// within max_error for the spline when bound lies in the key range.
  template <typename T>
  std::size_t estimate_from(std::span<const T> sorted, double bound) const {
    if (const SplineModel* s = spline()) {
      if (sorted.empty() || bound <= s->min_key()) return 0;
      if (bound > s->max_key()) return sorted.size();
      return std::min(s->estimate(bound), sorted.size());
    }
    return static_cast<std::size_t>(
        std::lower_bound(sorted.begin(), sorted.end(), bound,
                         [](const T& v, double b) { return detail::sort_key(v) < b; }) -
        sorted.begin());
  }

  /// Estimate of the first index with key > bound.
  template <typename T>
  std::size_t estimate_to(std::span<const T> sorted, double bound) const {
    if (const SplineModel* s = spline()) {
      if (sorted.empty() || bound < s->min_key()) return 0;
      if (bound >= s->max_key()) return sorted.size();
      return std::min(s->estimate(bound), sorted.size());
    }
    return static_cast<std::size_t>(
        std::upper_bound(sorted.begin(), sorted.end(), bound,
                         [](double b, const T& v) { return b < detail::sort_key(v); }) -
        sorted.begin());
  }

  std::size_t memory_bytes() const {
    if (const SplineModel* s = spline()) return s->memory_bytes();
    return sizeof(SearchModel);
  }

 private:
  std::variant<BinarySearch, SplineModel> impl_;
};

/// Exact first index with key >= bound, scanning from `est` towards it.
template <typename T>
std::size_t local_search_lower(std::span<const T> sorted, std::size_t est, double bound) {
  std::size_t i = std::min(est, sorted.size());
  if (i < sorted.size() && detail::sort_key(sorted[i]) < bound) {
    do {
      ++i;
    } while (i < sorted.size() && detail::sort_key(sorted[i]) < bound);
    return i;
  }
  while (i > 0 && detail::sort_key(sorted[i - 1]) >= bound) --i;
  return i;
}

/// Exact first index with key > bound, scanning from `est` towards it.
template <typename T>
std::size_t local_search_upper(std::span<const T> sorted, std::size_t est, double bound) {
  std::size_t i = std::min(est, sorted.size());
  if (i < sorted.size() && detail::sort_key(sorted[i]) <= bound) {
    do {
      ++i;
    } while (i < sorted.size() && detail::sort_key(sorted[i]) <= bound);
    return i;
  }
  while (i > 0 && detail::sort_key(sorted[i - 1]) > bound) --i;
  return i;
}

/// Exact point lookup in a run sorted by lon, starting at `est`.
///
/// Estimate below the run of equal lon: scan up to it, then through it
/// comparing both coordinates. Estimate above: the mirror image downwards.
/// Estimate inside the run: scan up through it, then down.
inline bool search_point(std::span<const GeoPoint> sorted, std::size_t est,
                         const GeoPoint& q) {
  const std::size_t n = sorted.size();
  std::size_t i = std::min(est, n);
  if (i < n && sorted[i].lon < q.lon) {
    while (i < n && sorted[i].lon < q.lon) ++i;
    for (; i < n && sorted[i].lon == q.lon; ++i) {
      if (sorted[i].lat == q.lat) return true;
    }
    return false;
  }
  if (i == n || sorted[i].lon > q.lon) {
    while (i > 0 && sorted[i - 1].lon > q.lon) --i;
    for (; i > 0 && sorted[i - 1].lon == q.lon; --i) {
      if (sorted[i - 1].lat == q.lat) return true;
    }
    return false;
  }
  for (std::size_t j = i; j < n && sorted[j].lon == q.lon; ++j) {
    if (sorted[j].lat == q.lat) return true;
  }
  for (std::size_t j = i; j > 0 && sorted[j - 1].lon == q.lon; --j) {
    if (sorted[j - 1].lat == q.lat) return true;
  }
  return false;
}

}  // namespace lsi
