#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace lsi {

/// Static interval tree: a balanced binary search tree keyed on interval
/// start, stored implicitly in a sorted array (the root of a subrange is its
/// middle element). Each node carries the maximum interval end of its
/// subtree so that stabbing queries prune whole subtrees.
class IntervalTree {
 public:
  struct Interval {
    double lo;
    double hi;
    std::uint32_t id;
  };

  IntervalTree() = default;

  explicit IntervalTree(std::vector<Interval> intervals)
      : nodes_(std::move(intervals)) {
    std::sort(nodes_.begin(), nodes_.end(),
              [](const Interval& a, const Interval& b) {
                return a.lo < b.lo || (a.lo == b.lo && a.id < b.id);
              });
    max_hi_.resize(nodes_.size());
    if (!nodes_.empty()) fill_max(0, nodes_.size());
  }

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  /// Calls `visit(interval)` for every stored interval with lo <= v <= hi.
  template <typename Visitor>
  void stab(double v, Visitor&& visit) const {
    if (!nodes_.empty()) stab(0, nodes_.size(), v, visit);
  }

  /// Ids of every interval containing `v`, in key order.
  std::vector<std::uint32_t> stab(double v) const {
    std::vector<std::uint32_t> out;
    stab(v, [&](const Interval& iv) { out.push_back(iv.id); });
    return out;
  }

  std::size_t memory_bytes() const {
    return nodes_.size() * (sizeof(Interval) + sizeof(double));
  }

 private:
  double fill_max(std::size_t b, std::size_t e) {
    const std::size_t mid = b + (e - b) / 2;
    double m = nodes_[mid].hi;
    if (b < mid) m = std::max(m, fill_max(b, mid));
    if (mid + 1 < e) m = std::max(m, fill_max(mid + 1, e));
    max_hi_[mid] = m;
    return m;
  }

  template <typename Visitor>
  void stab(std::size_t b, std::size_t e, double v, Visitor& visit) const {
    while (b < e) {
      const std::size_t mid = b + (e - b) / 2;
      if (max_hi_[mid] < v) return;
      if (b < mid) stab(b, mid, v, visit);
      const Interval& iv = nodes_[mid];
      if (iv.lo > v) return;  // right subtree starts even later
      if (iv.hi >= v) visit(iv);
      b = mid + 1;
    }
  }

  std::vector<Interval> nodes_;
  std::vector<double> max_hi_;
};

}  // namespace lsi
