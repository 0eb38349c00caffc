#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace lsi {

/// Order-preserving image of a double in the unsigned integers:
/// a < b  <=>  float_key_bits(a) < float_key_bits(b) for non-NaN values.
/// Negative zero is folded onto positive zero.
inline std::uint64_t float_key_bits(double key) {
  const auto bits = std::bit_cast<std::uint64_t>(key + 0.0);
  constexpr std::uint64_t sign = std::uint64_t{1} << 63;
  return (bits & sign) ? ~bits : (bits | sign);
}

/// Error-bounded linear spline over a sorted array of double keys, with a
/// radix table over the spline knots.
///
/// Knots are (key, position) pairs where position is the index of the first
/// occurrence of the key. For every indexed key, the interpolated position
/// deviates from its first occurrence by at most `max_error()`.
class SplineModel {
 public:
  struct Knot {
    double key;
    double position;
  };

  static constexpr std::size_t kDefaultMaxError = 32;
  static constexpr unsigned kDefaultRadixBits = 18;

  SplineModel() = default;

  /// Greedy one-pass corridor construction. `keys` must be sorted
  /// non-decreasing; an empty array yields a model without knots.
  static SplineModel build(std::span<const double> keys,
                           std::size_t max_error = kDefaultMaxError,
                           unsigned radix_bits = kDefaultRadixBits) {
    if (max_error < 1) throw std::invalid_argument("spline max_error must be >= 1");
    if (radix_bits > 30) throw std::invalid_argument("radix_bits must be <= 30");
    SplineModel m;
    m.keys_len_ = keys.size();
    m.max_error_ = max_error;
    m.radix_bits_ = radix_bits;
    if (keys.empty()) return m;
    m.build_knots(keys);
    m.build_radix_table();
    return m;
  }

  std::size_t keys_len() const { return keys_len_; }
  std::size_t max_error() const { return max_error_; }
  unsigned radix_bits() const { return radix_bits_; }
  /// Radix width actually used; bounded by the number of knots.
  unsigned effective_radix_bits() const { return effective_bits_; }
  const std::vector<Knot>& knots() const { return knots_; }
  const std::vector<std::uint32_t>& radix_table() const { return radix_table_; }
  bool empty() const { return knots_.empty(); }
  double min_key() const { return knots_.front().key; }
  double max_key() const { return knots_.back().key; }

  /// Index of the knot that ends the segment covering `key`, i.e. the first
  /// knot with knot.key >= key, found through the radix table. Requires
  /// min_key() < key <= max_key().
  std::size_t segment_end(double key) const {
    const std::size_t prefix = radix_prefix(key);
    const std::size_t begin = radix_table_[prefix];
    const std::size_t end = std::min<std::size_t>(radix_table_[prefix + 1] + 1, knots_.size());
    const auto it = std::lower_bound(
        knots_.begin() + static_cast<std::ptrdiff_t>(begin),
        knots_.begin() + static_cast<std::ptrdiff_t>(end), key,
        [](const Knot& k, double v) { return k.key < v; });
    return static_cast<std::size_t>(it - knots_.begin());
  }

  /// Knot index range [first, last) the radix table yields for `key`.
  std::pair<std::size_t, std::size_t> radix_range(double key) const {
    const std::size_t prefix = radix_prefix(key);
    return {radix_table_[prefix],
            std::min<std::size_t>(radix_table_[prefix + 1] + 1, knots_.size())};
  }

  /// Interpolated position for `key`, clamped to the key range.
  double interpolate(double key) const {
    if (knots_.empty()) return 0.0;
    if (key <= knots_.front().key) return knots_.front().position;
    if (key >= knots_.back().key) return knots_.back().position;
    const std::size_t hi = segment_end(key);
    const Knot& b = knots_[hi];
    if (b.key == key) return b.position;
    const Knot& a = knots_[hi - 1];
    const double slope = (b.position - a.position) / (b.key - a.key);
    return a.position + (key - a.key) * slope;
  }

  /// Rounded interpolation; within max_error() of the first occurrence for
  /// every indexed key.
  std::size_t estimate(double key) const {
    const double p = interpolate(key);
    return static_cast<std::size_t>(std::max(0.0, std::floor(p + 0.5)));
  }

  std::size_t memory_bytes() const {
    return sizeof(SplineModel) + knots_.size() * sizeof(Knot) +
           radix_table_.size() * sizeof(std::uint32_t);
  }

 private:
  // Greedy spline corridor: keeps the tightest upper/lower slope through the
  // last knot that still keeps every point seen since within max_error, and
  // emits the previous point as a knot once the corridor closes.
  void build_knots(std::span<const double> keys) {
    const double err = static_cast<double>(max_error_);
    knots_.push_back({keys[0], 0.0});
    Knot prev{keys[0], 0.0};
    double slope_hi = std::numeric_limits<double>::infinity();
    double slope_lo = -std::numeric_limits<double>::infinity();

    for (std::size_t i = 1; i < keys.size(); ++i) {
      const double key = keys[i];
      if (key == prev.key) continue;  // duplicates keep their first position
      const double pos = static_cast<double>(i);
      const Knot& last = knots_.back();
      const double dx = key - last.key;
      const double slope = (pos - last.position) / dx;
      if (slope > slope_hi || slope < slope_lo) {
        knots_.push_back(prev);
        const double ndx = key - prev.key;
        slope_hi = (pos + err - prev.position) / ndx;
        slope_lo = (pos - err - prev.position) / ndx;
      } else {
        slope_hi = std::min(slope_hi, (pos + err - last.position) / dx);
        slope_lo = std::max(slope_lo, (pos - err - last.position) / dx);
      }
      prev = {key, pos};
    }
    if (prev.key != knots_.back().key) knots_.push_back(prev);
  }

  std::size_t radix_prefix(double key) const {
    const std::uint64_t v = float_key_bits(key);
    if (v <= min_bits_) return 0;
    return static_cast<std::size_t>((v - min_bits_) >> shift_);
  }

  void build_radix_table() {
    min_bits_ = float_key_bits(knots_.front().key);
    const std::uint64_t span = float_key_bits(knots_.back().key) - min_bits_;
    const unsigned span_bits = static_cast<unsigned>(std::bit_width(span));
    // A table much larger than the knot list buys nothing.
    const unsigned knot_bits =
        static_cast<unsigned>(std::bit_width(knots_.size())) + 1;
    effective_bits_ = std::min({radix_bits_, span_bits, knot_bits});
    shift_ = span_bits - effective_bits_;

    // radix_table_[p] = index of the first knot with prefix >= p; the extra
    // trailing entries make [p, p + 1] always addressable.
    const std::size_t slots = (std::size_t{1} << effective_bits_) + 1;
    radix_table_.assign(slots + 1, static_cast<std::uint32_t>(knots_.size() - 1));
    std::size_t next_slot = 0;
    for (std::size_t k = 0; k < knots_.size(); ++k) {
      const std::size_t prefix = radix_prefix(knots_[k].key);
      while (next_slot <= prefix) radix_table_[next_slot++] = static_cast<std::uint32_t>(k);
    }
  }

  std::size_t keys_len_ = 0;
  std::size_t max_error_ = kDefaultMaxError;
  unsigned radix_bits_ = kDefaultRadixBits;
  unsigned effective_bits_ = 0;
  unsigned shift_ = 0;
  std::uint64_t min_bits_ = 0;
  std::vector<Knot> knots_;
  std::vector<std::uint32_t> radix_table_;
};

}  // namespace lsi
