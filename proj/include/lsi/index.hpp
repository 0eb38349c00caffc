#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lsi/geo.hpp"
#include "lsi/hilbert.hpp"
#include "lsi/search.hpp"
#include "lsi/spline.hpp"

namespace lsi {

enum class Technique { FixedGrid, AdaptiveGrid, KdTree, Quadtree, Str, HilbertCurve };

inline constexpr std::array<Technique, 6> kAllTechniques = {
    Technique::FixedGrid, Technique::AdaptiveGrid, Technique::KdTree,
    Technique::Quadtree,  Technique::Str,          Technique::HilbertCurve};

inline std::string_view to_string(Technique t) {
  switch (t) {
    case Technique::FixedGrid: return "fixed";
    case Technique::AdaptiveGrid: return "adaptive";
    case Technique::KdTree: return "kdtree";
    case Technique::Quadtree: return "quadtree";
    case Technique::Str: return "str";
    case Technique::HilbertCurve: return "hilbert";
  }
  return "?";
}

/// Techniques that split the embedding space rather than the data.
inline constexpr bool is_space_partitioning(Technique t) {
  return t == Technique::FixedGrid || t == Technique::Quadtree ||
         t == Technique::HilbertCurve;
}

class config_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct BuildConfig {
  Technique technique = Technique::FixedGrid;
  std::size_t leaf_size = 1024;
  SearchKind search = SearchKind::Spline;
  std::size_t spline_error = SplineModel::kDefaultMaxError;
  unsigned radix_bits = SplineModel::kDefaultRadixBits;
  unsigned hilbert_order = 16;

  void validate() const {
    if (leaf_size < 1) throw config_error("leaf size must be >= 1");
    if (spline_error < 1) throw config_error("spline error must be >= 1");
    if (radix_bits > 30) throw config_error("radix bits must be <= 30");
    if (hilbert_order < hilbert::Order::kMin || hilbert_order > hilbert::Order::kMax) {
      throw config_error("hilbert order must be in [1, 31]");
    }
  }
};

/// A run of points sorted by lon with its tight bounds and search model.
struct Partition {
  Rect bounds;
  std::vector<GeoPoint> points;
  SearchModel model;

  std::span<const GeoPoint> view() const { return points; }
  std::size_t size() const { return points.size(); }
};

using PartitionId = std::uint32_t;
using Groups = std::vector<std::vector<GeoPoint>>;

namespace directory {

/// Equidistant latitude stripes; lookup is offset arithmetic.
class FixedGrid {
 public:
  static FixedGrid build(std::vector<GeoPoint> data, std::size_t leaf_size, Groups& groups) {
    FixedGrid g;
    if (data.empty()) return g;
    g.lo_ = data.front().lat;
    g.hi_ = g.lo_;
    for (const auto& p : data) {
      g.lo_ = std::min(g.lo_, p.lat);
      g.hi_ = std::max(g.hi_, p.lat);
    }
    g.cells_ = (data.size() + leaf_size - 1) / leaf_size;
    g.width_ = (g.hi_ - g.lo_) / static_cast<double>(g.cells_);

    std::vector<std::vector<GeoPoint>> by_cell(g.cells_);
    for (const auto& p : data) by_cell[g.cell_of(p.lat)].push_back(p);
    g.cell_partition_.assign(g.cells_, -1);
    for (std::size_t c = 0; c < g.cells_; ++c) {
      if (by_cell[c].empty()) continue;
      g.cell_partition_[c] = static_cast<std::int32_t>(groups.size());
      groups.push_back(std::move(by_cell[c]));
    }
    return g;
  }

  std::size_t cell_of(double lat) const {
    if (!(width_ > 0.0)) return 0;
    const double f = std::floor((lat - lo_) / width_);
    if (f <= 0.0) return 0;
    return std::min(static_cast<std::size_t>(f), cells_ - 1);
  }

  void lookup(const Rect& q, std::vector<PartitionId>& out) const {
    if (cells_ == 0 || q.xh < lo_ || q.xl > hi_) return;
    const std::size_t first = cell_of(q.xl);
    const std::size_t last = cell_of(q.xh);
    for (std::size_t c = first; c <= last; ++c) {
      if (cell_partition_[c] >= 0) out.push_back(static_cast<PartitionId>(cell_partition_[c]));
    }
  }

  void point_lookup(const GeoPoint& p, std::vector<PartitionId>& out) const {
    if (cells_ == 0 || p.lat < lo_ || p.lat > hi_) return;
    const std::int32_t id = cell_partition_[cell_of(p.lat)];
    if (id >= 0) out.push_back(static_cast<PartitionId>(id));
  }

  std::size_t cell_count() const { return cells_; }
  double cell_width() const { return width_; }
  /// cells + 1 grid lines from the lowest to the highest latitude.
  std::vector<double> cut_points() const {
    std::vector<double> cuts(cells_ + 1);
    for (std::size_t i = 0; i <= cells_; ++i) cuts[i] = lo_ + static_cast<double>(i) * width_;
    return cuts;
  }
  std::size_t memory_bytes() const {
    return sizeof(FixedGrid) + cell_partition_.size() * sizeof(std::int32_t);
  }

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
  double width_ = 0.0;
  std::size_t cells_ = 0;
  std::vector<std::int32_t> cell_partition_;
};

/// Equal-frequency latitude stripes delimited by a linear scale.
class AdaptiveGrid {
 public:
  static AdaptiveGrid build(std::vector<GeoPoint> data, std::size_t leaf_size, Groups& groups) {
    AdaptiveGrid g;
    if (data.empty()) return g;
    std::stable_sort(data.begin(), data.end(),
                     [](const GeoPoint& a, const GeoPoint& b) { return a.lat < b.lat; });
    const std::size_t n = data.size();
    const std::size_t stripes = (n + leaf_size - 1) / leaf_size;
    for (std::size_t i = 1; i < stripes; ++i) g.scales_.push_back(data[i * n / stripes].lat);

    std::vector<std::vector<GeoPoint>> by_stripe(stripes);
    for (const auto& p : data) by_stripe[g.stripe_of(p.lat)].push_back(p);
    g.stripe_partition_.assign(stripes, -1);
    for (std::size_t s = 0; s < stripes; ++s) {
      if (by_stripe[s].empty()) continue;
      g.stripe_partition_[s] = static_cast<std::int32_t>(groups.size());
      groups.push_back(std::move(by_stripe[s]));
    }
    return g;
  }

  /// Stripe s holds latitudes in [scales[s-1], scales[s]).
  std::size_t stripe_of(double lat) const {
    return static_cast<std::size_t>(std::upper_bound(scales_.begin(), scales_.end(), lat) -
                                    scales_.begin());
  }

  void lookup(const Rect& q, std::vector<PartitionId>& out) const {
    if (stripe_partition_.empty()) return;
    const std::size_t last = stripe_of(q.xh);
    for (std::size_t s = stripe_of(q.xl); s <= last; ++s) {
      if (stripe_partition_[s] >= 0) out.push_back(static_cast<PartitionId>(stripe_partition_[s]));
    }
  }

  void point_lookup(const GeoPoint& p, std::vector<PartitionId>& out) const {
    if (stripe_partition_.empty()) return;
    const std::int32_t id = stripe_partition_[stripe_of(p.lat)];
    if (id >= 0) out.push_back(static_cast<PartitionId>(id));
  }

  const std::vector<double>& linear_scales() const { return scales_; }
  std::size_t stripe_count() const { return stripe_partition_.size(); }
  std::size_t memory_bytes() const {
    return sizeof(AdaptiveGrid) + scales_.size() * sizeof(double) +
           stripe_partition_.size() * sizeof(std::int32_t);
  }

 private:
  std::vector<double> scales_;
  std::vector<std::int32_t> stripe_partition_;
};

/// Data-aware K-d tree: median splits with alternating discriminators,
/// latitude first.
class KdTree {
 public:
  struct Node {
    std::uint8_t dim = 0;  // 0 = lat, 1 = lon
    double split = 0.0;    // left keys <= split <= right keys
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t partition = -1;  // >= 0 for leaves
    std::uint32_t count = 0;
  };

  static KdTree build(std::vector<GeoPoint> data, std::size_t leaf_size, Groups& groups) {
    KdTree t;
    if (data.empty()) return t;
    t.build_node(data, 0, data.size(), 0, leaf_size, groups);
    return t;
  }

  void lookup(const Rect& q, std::vector<PartitionId>& out) const {
    if (!nodes_.empty()) visit(0, q, out);
  }
  void point_lookup(const GeoPoint& p, std::vector<PartitionId>& out) const {
    lookup(Rect::of_point(p), out);
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t memory_bytes() const { return sizeof(KdTree) + nodes_.size() * sizeof(Node); }

 private:
  static double key(const GeoPoint& p, int dim) { return dim == 0 ? p.lat : p.lon; }

  std::int32_t build_node(std::vector<GeoPoint>& data, std::size_t b, std::size_t e,
                          int depth, std::size_t leaf_size, Groups& groups) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    nodes_[id].count = static_cast<std::uint32_t>(e - b);
    if (e - b <= leaf_size) {
      nodes_[id].partition = static_cast<std::int32_t>(groups.size());
      groups.emplace_back(data.begin() + static_cast<std::ptrdiff_t>(b),
                          data.begin() + static_cast<std::ptrdiff_t>(e));
      return id;
    }
    const int dim = depth % 2;
    std::stable_sort(data.begin() + static_cast<std::ptrdiff_t>(b),
                     data.begin() + static_cast<std::ptrdiff_t>(e),
                     [dim](const GeoPoint& x, const GeoPoint& y) { return key(x, dim) < key(y, dim); });
    const std::size_t mid = b + (e - b) / 2;
    const double split = key(data[mid], dim);
    const std::int32_t left = build_node(data, b, mid, depth + 1, leaf_size, groups);
    const std::int32_t right = build_node(data, mid, e, depth + 1, leaf_size, groups);
    nodes_[id].dim = static_cast<std::uint8_t>(dim);
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void visit(std::int32_t id, const Rect& q, std::vector<PartitionId>& out) const {
    const Node& n = nodes_[id];
    if (n.partition >= 0) {
      out.push_back(static_cast<PartitionId>(n.partition));
      return;
    }
    const double lo = n.dim == 0 ? q.xl : q.yl;
    const double hi = n.dim == 0 ? q.xh : q.yh;
    if (lo <= n.split) visit(n.left, q, out);
    if (hi >= n.split) visit(n.right, q, out);
  }

  std::vector<Node> nodes_;
};

/// Region quadtree over the dataset MBR; splits at region midpoints until a
/// quadrant holds at most leaf_size points. Points on a split line belong to
/// the higher quadrant.
class Quadtree {
 public:
  struct Node {
    Rect region;
    std::array<std::int32_t, 4> child{-1, -1, -1, -1};
    std::int32_t partition = -1;
    std::uint32_t depth = 0;
  };

  static constexpr std::uint32_t kMaxDepth = 64;

  static Quadtree build(std::vector<GeoPoint> data, std::size_t leaf_size, Groups& groups) {
    Quadtree t;
    if (data.empty()) return t;
    t.build_node(data, 0, data.size(), bounding_rect(data), 0, leaf_size, groups);
    return t;
  }

  void lookup(const Rect& q, std::vector<PartitionId>& out) const {
    if (!nodes_.empty()) visit(0, q, out);
  }

  void point_lookup(const GeoPoint& p, std::vector<PartitionId>& out) const {
    if (nodes_.empty() || !nodes_[0].region.contains(p)) return;
    std::int32_t id = 0;
    while (id >= 0) {
      const Node& n = nodes_[id];
      if (n.partition >= 0) {
        out.push_back(static_cast<PartitionId>(n.partition));
        return;
      }
      id = n.child[quadrant(n.region, p)];
    }
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t memory_bytes() const { return sizeof(Quadtree) + nodes_.size() * sizeof(Node); }

 private:
  static double mid_lat(const Rect& r) { return r.xl + (r.xh - r.xl) / 2.0; }
  static double mid_lon(const Rect& r) { return r.yl + (r.yh - r.yl) / 2.0; }

  static int quadrant(const Rect& r, const GeoPoint& p) {
    return (p.lat >= mid_lat(r) ? 1 : 0) | (p.lon >= mid_lon(r) ? 2 : 0);
  }

  static Rect child_region(const Rect& r, int q) {
    const double mx = mid_lat(r);
    const double my = mid_lon(r);
    return {(q & 1) ? mx : r.xl, (q & 2) ? my : r.yl, (q & 1) ? r.xh : mx, (q & 2) ? r.yh : my};
  }

  std::int32_t build_node(std::vector<GeoPoint>& data, std::size_t b, std::size_t e,
                          const Rect& region, std::uint32_t depth, std::size_t leaf_size,
                          Groups& groups) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({region, {-1, -1, -1, -1}, -1, depth});

    const auto first = data.begin() + static_cast<std::ptrdiff_t>(b);
    const auto last = data.begin() + static_cast<std::ptrdiff_t>(e);
    const bool identical = std::all_of(first, last, [&](const GeoPoint& p) { return p == *first; });
    const double mx = mid_lat(region);
    const double my = mid_lon(region);
    // A region too small to split in either dimension cannot make progress.
    const bool splittable = (mx > region.xl && mx < region.xh) || (my > region.yl && my < region.yh);
    if (e - b <= leaf_size || identical || !splittable || depth >= kMaxDepth) {
      nodes_[id].partition = static_cast<std::int32_t>(groups.size());
      groups.emplace_back(first, last);
      return id;
    }

    std::array<std::size_t, 5> cut{};
    cut[0] = b;
    cut[4] = e;
    auto lo_lat = std::partition(first, last, [&](const GeoPoint& p) { return p.lat < mx; });
    auto q0_end = std::partition(first, lo_lat, [&](const GeoPoint& p) { return p.lon < my; });
    auto q1_end = std::partition(lo_lat, last, [&](const GeoPoint& p) { return p.lon < my; });
    const std::size_t i_q0 = static_cast<std::size_t>(q0_end - data.begin());
    const std::size_t i_mid = static_cast<std::size_t>(lo_lat - data.begin());
    const std::size_t i_q1 = static_cast<std::size_t>(q1_end - data.begin());
    const std::array<std::pair<std::size_t, std::size_t>, 4> ranges = {
        std::pair{b, i_q0}, std::pair{i_mid, i_q1}, std::pair{i_q0, i_mid}, std::pair{i_q1, e}};
    for (int q = 0; q < 4; ++q) {
      const auto [qb, qe] = ranges[q];
      if (qb == qe) continue;  // empty quadrants are dropped
      const std::int32_t child =
          build_node(data, qb, qe, child_region(region, q), depth + 1, leaf_size, groups);
      nodes_[id].child[q] = child;
    }
    return id;
  }

  void visit(std::int32_t id, const Rect& q, std::vector<PartitionId>& out) const {
    const Node& n = nodes_[id];
    if (!n.region.intersects(q)) return;
    if (n.partition >= 0) {
      out.push_back(static_cast<PartitionId>(n.partition));
      return;
    }
    for (std::int32_t c : n.child) {
      if (c >= 0) visit(c, q, out);
    }
  }

  std::vector<Node> nodes_;
};

/// Sort-Tile-Recursive packed R-tree. Leaves are the partitions; every
/// level packs its entries with the same capacity.
class Str {
 public:
  struct Node {
    Rect mbr;
    std::vector<std::uint32_t> children;  // indices into the level below
  };

  /// Number of vertical slices for `count` entries of capacity `capacity`.
  static std::size_t slice_count(std::size_t count, std::size_t capacity) {
    const double exact = std::sqrt(static_cast<double>(count) / static_cast<double>(capacity));
    auto s = static_cast<std::size_t>(std::ceil(exact));
    while (s > 1 && (s - 1) * (s - 1) * capacity >= count) --s;  // guard against sqrt rounding
    while (s * s * capacity < count) ++s;
    return std::max<std::size_t>(s, 1);
  }

  static Str build(std::vector<GeoPoint> data, std::size_t leaf_size, Groups& groups) {
    Str t;
    if (data.empty()) return t;
    const std::size_t first_group = groups.size();
    t.capacity_ = leaf_size;
    const std::size_t slices = slice_count(data.size(), leaf_size);
    t.slices_ = slices;
    const std::size_t slice_size = slices * leaf_size;
    std::stable_sort(data.begin(), data.end(),
                     [](const GeoPoint& a, const GeoPoint& b) { return a.lat < b.lat; });
    for (std::size_t s = 0; s * slice_size < data.size(); ++s) {
      const auto sb = data.begin() + static_cast<std::ptrdiff_t>(s * slice_size);
      const auto se = data.begin() + static_cast<std::ptrdiff_t>(std::min(data.size(), (s + 1) * slice_size));
      std::stable_sort(sb, se, lon_less);
      for (auto rb = sb; rb < se; rb += std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(leaf_size), se - rb)) {
        const auto re = rb + std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(leaf_size), se - rb);
        groups.emplace_back(rb, re);
        t.leaf_slice_.push_back(static_cast<std::uint32_t>(s));
      }
    }

    // Level 0 mirrors the leaves; upper levels pack node MBR centers.
    std::vector<Node> level;
    for (std::size_t g = first_group; g < groups.size(); ++g) {
      level.push_back({bounding_rect(groups[g]), {}});
    }
    t.levels_.push_back(std::move(level));
    const std::size_t fanout = std::max<std::size_t>(leaf_size, 2);
    while (t.levels_.back().size() > 1) t.levels_.push_back(pack(t.levels_.back(), fanout));
    return t;
  }

  void lookup(const Rect& q, std::vector<PartitionId>& out) const {
    if (levels_.empty()) return;
    visit(levels_.size() - 1, 0, q, out);
  }
  void point_lookup(const GeoPoint& p, std::vector<PartitionId>& out) const {
    lookup(Rect::of_point(p), out);
  }

  std::size_t slices() const { return slices_; }
  /// Slice index of every leaf, in partition order.
  const std::vector<std::uint32_t>& leaf_slices() const { return leaf_slice_; }
  std::size_t height() const { return levels_.size(); }
  std::size_t memory_bytes() const {
    std::size_t bytes = sizeof(Str) + leaf_slice_.size() * sizeof(std::uint32_t);
    for (const auto& level : levels_) {
      for (const auto& n : level) bytes += sizeof(Node) + n.children.size() * sizeof(std::uint32_t);
    }
    return bytes;
  }

 private:
  static std::vector<Node> pack(const std::vector<Node>& below, std::size_t capacity) {
    std::vector<std::uint32_t> order(below.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    const auto cx = [&](std::uint32_t i) { return (below[i].mbr.xl + below[i].mbr.xh) / 2.0; };
    const auto cy = [&](std::uint32_t i) { return (below[i].mbr.yl + below[i].mbr.yh) / 2.0; };
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return cx(a) < cx(b); });
    const std::size_t slice_size = slice_count(order.size(), capacity) * capacity;
    std::vector<Node> up;
    for (std::size_t sb = 0; sb < order.size(); sb += slice_size) {
      const std::size_t se = std::min(order.size(), sb + slice_size);
      std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(sb),
                       order.begin() + static_cast<std::ptrdiff_t>(se),
                       [&](auto a, auto b) { return cy(a) < cy(b); });
      for (std::size_t rb = sb; rb < se; rb += capacity) {
        Node n;
        n.mbr = below[order[rb]].mbr;
        for (std::size_t i = rb; i < std::min(se, rb + capacity); ++i) {
          n.children.push_back(order[i]);
          n.mbr.expand(below[order[i]].mbr);
        }
        up.push_back(std::move(n));
      }
    }
    return up;
  }

  void visit(std::size_t level, std::uint32_t idx, const Rect& q, std::vector<PartitionId>& out) const {
    const Node& n = levels_[level][idx];
    if (!n.mbr.intersects(q)) return;
    if (level == 0) {
      out.push_back(idx);
      return;
    }
    for (std::uint32_t c : n.children) visit(level - 1, c, q, out);
  }

  std::size_t capacity_ = 0;
  std::size_t slices_ = 0;
  std::vector<std::uint32_t> leaf_slice_;
  std::vector<std::vector<Node>> levels_;
};

/// Hilbert linearization: points are ordered by the curve position of their
/// grid cell (ties by lon, then lat) and cut into runs of leaf_size. A spline
/// over the runs' last curve positions serves as the directory.
class HilbertCurve {
 public:
  struct CurveKey {
    std::uint64_t curve = 0;
    double lon = 0.0;
    double lat = 0.0;
    friend constexpr auto operator<=>(const CurveKey&, const CurveKey&) = default;
  };

  static HilbertCurve build(std::vector<GeoPoint> data, std::size_t leaf_size, unsigned order,
                            std::size_t spline_error, unsigned radix_bits, Groups& groups) {
    HilbertCurve h{hilbert::Order(order)};
    if (data.empty()) return h;
    h.domain_ = bounding_rect(data);
    // A flat extent still needs a grid; widen it so the upper edge stays closed.
    if (!(h.domain_.width() > 0.0)) h.domain_.xh = h.domain_.xl + 1.0;
    if (!(h.domain_.height() > 0.0)) h.domain_.yh = h.domain_.yl + 1.0;

    std::vector<std::pair<CurveKey, GeoPoint>> keyed;
    keyed.reserve(data.size());
    for (const auto& p : data) keyed.push_back({h.key_of(p), p});
    std::sort(keyed.begin(), keyed.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    for (std::size_t b = 0; b < keyed.size(); b += leaf_size) {
      const std::size_t e = std::min(keyed.size(), b + leaf_size);
      h.first_.push_back(keyed[b].first);
      h.last_.push_back(keyed[e - 1].first);
      h.last_curve_.push_back(keyed[e - 1].first.curve);
      std::vector<GeoPoint> run;
      run.reserve(e - b);
      for (std::size_t i = b; i < e; ++i) run.push_back(keyed[i].second);
      groups.push_back(std::move(run));
    }
    std::vector<double> keys(h.last_curve_.begin(), h.last_curve_.end());
    h.directory_ = SplineModel::build(keys, spline_error, radix_bits);
    return h;
  }

  CurveKey key_of(const GeoPoint& p) const {
    return {hilbert::xy_to_hilbert(order_, hilbert::point_to_cell(order_, domain_, p)), p.lon, p.lat};
  }

  /// Cell rectangle covering q, or nullopt if q misses the domain.
  std::optional<hilbert::CellRect> cell_rect(const Rect& q) const {
    if (last_.empty() || !q.intersects(domain_)) return std::nullopt;
    const GeoPoint lo{std::max(q.xl, domain_.xl), std::max(q.yl, domain_.yl)};
    const GeoPoint hi{std::min(q.xh, domain_.xh), std::min(q.yh, domain_.yh)};
    const hilbert::Cell a = hilbert::point_to_cell(order_, domain_, lo);
    const hilbert::Cell b = hilbert::point_to_cell(order_, domain_, hi);
    return hilbert::CellRect{a.cx, a.cy, b.cx, b.cy};
  }

  std::size_t max_cover_ranges() const { return 4 * order_.side(); }

  void lookup(const Rect& q, std::vector<PartitionId>& out) const {
    const auto cells = cell_rect(q);
    if (!cells) return;
    // A block inside one partition's curve span, or touching none, selects
    // the same partitions however finely it is split.
    const auto settle = [this](std::uint64_t lo, std::uint64_t hi) {
      const std::size_t p = first_ending_at_or_after(lo);
      if (p == first_.size() || first_[p].curve > hi) return hilbert::Settle::kDrop;
      const bool alone = p + 1 == first_.size() || first_[p + 1].curve > hi;
      if (alone && first_[p].curve <= lo && hi <= last_curve_[p]) return hilbert::Settle::kWhole;
      return hilbert::Settle::kRefine;
    };
    const hilbert::Cover c = hilbert::cover(order_, *cells, max_cover_ranges(), settle);
    std::size_t p = 0;
    for (const hilbert::CurveRange& r : c.ranges) {
      p = std::max(p, first_ending_at_or_after(r.lo));
      for (; p < first_.size() && first_[p].curve <= r.hi; ++p) {
        if (out.empty() || out.back() != p) out.push_back(static_cast<PartitionId>(p));
      }
      // The last partition touched may continue into the next range.
      if (p > 0) --p;
    }
  }

  void point_lookup(const GeoPoint& pt, std::vector<PartitionId>& out) const {
    if (last_.empty() || !domain_.contains(pt)) return;
    const CurveKey k = key_of(pt);
    std::size_t p = first_ending_at_or_after(k.curve);
    while (p < last_.size() && last_[p] < k) ++p;
    if (p < last_.size() && first_[p] <= k) out.push_back(static_cast<PartitionId>(p));
  }

  hilbert::Order order() const { return order_; }
  const Rect& domain() const { return domain_; }
  const std::vector<CurveKey>& first_keys() const { return first_; }
  const std::vector<CurveKey>& last_keys() const { return last_; }
  const SplineModel& directory_model() const { return directory_; }
  std::size_t memory_bytes() const {
    return sizeof(HilbertCurve) + (first_.size() + last_.size()) * sizeof(CurveKey) +
           last_curve_.size() * sizeof(std::uint64_t) + directory_.memory_bytes();
  }

 private:
  explicit HilbertCurve(hilbert::Order order) : order_(order) {}

  /// First partition whose last curve position is >= curve.
  std::size_t first_ending_at_or_after(std::uint64_t curve) const {
    const double key = static_cast<double>(curve);
    std::size_t i = 0;
    if (key > directory_.max_key()) {
      i = last_curve_.size();
    } else if (key > directory_.min_key()) {
      i = std::min(directory_.estimate(key), last_curve_.size());
    }
    // Exact correction on the integer keys; the spline works on doubles.
    while (i < last_curve_.size() && last_curve_[i] < curve) ++i;
    while (i > 0 && last_curve_[i - 1] >= curve) --i;
    return i;
  }

  hilbert::Order order_;
  Rect domain_;
  std::vector<CurveKey> first_;
  std::vector<CurveKey> last_;
  std::vector<std::uint64_t> last_curve_;
  SplineModel directory_;
};

}  // namespace directory

class PartitionedIndex;
namespace io {
PartitionedIndex read_index(std::istream& is);
}  // namespace io

using Directory = std::variant<directory::FixedGrid, directory::AdaptiveGrid, directory::KdTree,
                               directory::Quadtree, directory::Str, directory::HilbertCurve>;

/// A dataset partitioned by one technique, each partition sorted on lon with
/// an attached search model.
class PartitionedIndex {
 public:
  static PartitionedIndex build(std::span<const GeoPoint> data, const BuildConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    PartitionedIndex idx;
    idx.config_ = cfg;
    idx.size_ = data.size();

    Groups groups;
    std::vector<GeoPoint> copy(data.begin(), data.end());
    const std::size_t l = cfg.leaf_size;
    switch (cfg.technique) {
      case Technique::FixedGrid:
        idx.directory_ = directory::FixedGrid::build(std::move(copy), l, groups);
        break;
      case Technique::AdaptiveGrid:
        idx.directory_ = directory::AdaptiveGrid::build(std::move(copy), l, groups);
        break;
      case Technique::KdTree:
        idx.directory_ = directory::KdTree::build(std::move(copy), l, groups);
        break;
      case Technique::Quadtree:
        idx.directory_ = directory::Quadtree::build(std::move(copy), l, groups);
        break;
      case Technique::Str:
        idx.directory_ = directory::Str::build(std::move(copy), l, groups);
        break;
      case Technique::HilbertCurve:
        idx.directory_ = directory::HilbertCurve::build(std::move(copy), l, cfg.hilbert_order,
                                                        cfg.spline_error, cfg.radix_bits, groups);
        break;
    }

    idx.partitions_.reserve(groups.size());
    for (auto& g : groups) {
      Partition part;
      std::stable_sort(g.begin(), g.end(), lon_less);
      part.bounds = bounding_rect(g);
      part.points = std::move(g);
      part.model = SearchModel::build(cfg.search, part.view(), cfg.spline_error, cfg.radix_bits);
      idx.partitions_.push_back(std::move(part));
    }
    idx.build_seconds_ =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return idx;
  }

  const BuildConfig& config() const { return config_; }
  Technique technique() const { return config_.technique; }
  std::size_t size() const { return size_; }
  const std::vector<Partition>& partitions() const { return partitions_; }
  const Partition& partition(PartitionId id) const { return partitions_[id]; }
  const Directory& directory() const { return directory_; }
  double build_seconds() const { return build_seconds_; }

  template <typename T>
  const T& directory_as() const {
    return std::get<T>(directory_);
  }

  /// Ids, ascending, of the partitions whose bounds intersect q.
  void index_lookup(const Rect& q, std::vector<PartitionId>& out) const {
    out.clear();
    std::visit([&](const auto& d) { d.lookup(q, out); }, directory_);
    if (technique() == Technique::Str) std::sort(out.begin(), out.end());
    std::erase_if(out, [&](PartitionId id) { return !partitions_[id].bounds.intersects(q); });
  }

  std::vector<PartitionId> index_lookup(const Rect& q) const {
    std::vector<PartitionId> out;
    index_lookup(q, out);
    return out;
  }

  /// Partitions that may hold p. At most one for grids, quadtree and the
  /// Hilbert curve.
  void point_lookup(const GeoPoint& p, std::vector<PartitionId>& out) const {
    out.clear();
    std::visit([&](const auto& d) { d.point_lookup(p, out); }, directory_);
    std::erase_if(out, [&](PartitionId id) { return !partitions_[id].bounds.contains(p); });
  }

  std::size_t directory_bytes() const {
    return std::visit([](const auto& d) { return d.memory_bytes(); }, directory_);
  }

  /// Directory, per-partition models and the indexed points.
  std::size_t memory_bytes() const {
    std::size_t bytes = sizeof(PartitionedIndex) + directory_bytes();
    for (const auto& p : partitions_) {
      bytes += sizeof(Partition) + p.model.memory_bytes() + p.points.size() * sizeof(GeoPoint);
    }
    return bytes;
  }

 private:
  friend PartitionedIndex io::read_index(std::istream& is);

  PartitionedIndex() = default;

  BuildConfig config_;
  std::size_t size_ = 0;
  Directory directory_;
  std::vector<Partition> partitions_;
  double build_seconds_ = 0.0;
};

inline PartitionedIndex build(std::span<const GeoPoint> data, const BuildConfig& cfg) {
  return PartitionedIndex::build(data, cfg);
}

}  // namespace lsi
