#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lsi/geo.hpp"

namespace lsi::hilbert {

/// Curve order k: the grid has 2^k x 2^k cells and positions fit in 2k bits.
class Order {
 public:
  static constexpr unsigned kMin = 1;
  static constexpr unsigned kMax = 31;

  constexpr explicit Order(unsigned k) : k_(k) {
    if (k < kMin || k > kMax) throw std::domain_error("hilbert order out of range");
  }
  constexpr unsigned value() const { return k_; }
  constexpr std::uint64_t side() const { return std::uint64_t{1} << k_; }
  constexpr std::uint64_t cells() const { return side() * side(); }

 private:
  unsigned k_;
};

struct Cell {
  std::uint64_t cx = 0;
  std::uint64_t cy = 0;
  friend constexpr bool operator==(const Cell&, const Cell&) = default;
};

namespace detail {

// The curve as a 4-state machine. Bit 0 of a state complements both
// coordinates, bit 1 swaps them; both apply to every remaining level.
inline constexpr unsigned next_state(unsigned state, unsigned rx, unsigned ry) {
  if (ry == 0) {
    if (rx == 1) state ^= 1;
    state ^= 2;
  }
  return state;
}

inline constexpr void orient(unsigned state, unsigned& x, unsigned& y) {
  x ^= state & 1;
  y ^= state & 1;
  if (state & 2) std::swap(x, y);
}

// Four levels per lookup. Encode is indexed by (state, x nibble << 4 |
// y nibble) and yields 8 curve bits | next state << 8; decode is indexed by
// (state, 8 curve bits) and yields x nibble | y nibble << 4 | next state << 8.
struct Tables {
  std::uint16_t enc[4][256]{};
  std::uint16_t dec[4][256]{};
};

inline constexpr Tables make_tables() {
  Tables t;
  for (unsigned s0 = 0; s0 < 4; ++s0) {
    for (unsigned in = 0; in < 256; ++in) {
      unsigned s = s0;
      unsigned d = 0;
      for (int b = 3; b >= 0; --b) {
        unsigned rx = (in >> (4 + b)) & 1;
        unsigned ry = (in >> b) & 1;
        orient(s, rx, ry);
        d = (d << 2) | ((3 * rx) ^ ry);
        s = next_state(s, rx, ry);
      }
      t.enc[s0][in] = static_cast<std::uint16_t>(d | (s << 8));

      s = s0;
      unsigned x = 0;
      unsigned y = 0;
      for (int b = 3; b >= 0; --b) {
        const unsigned digit = (in >> (2 * b)) & 3;
        const unsigned rx = digit >> 1;
        const unsigned ry = (digit ^ rx) & 1;
        unsigned bx = rx;
        unsigned by = ry;
        orient(s, bx, by);
        x |= bx << b;
        y |= by << b;
        s = next_state(s, rx, ry);
      }
      t.dec[s0][in] = static_cast<std::uint16_t>(x | (y << 4) | (s << 8));
    }
  }
  return t;
}

inline constexpr Tables kTables = make_tables();

}  // namespace detail

/// Curve position of a cell. Each 2x2 block is visited
/// (0,0) -> (0,1) -> (1,1) -> (1,0) up to rotation/reflection.
inline constexpr std::uint64_t xy_to_hilbert(Order order, Cell c) {
  const std::uint64_t n = order.side();
  if (c.cx >= n || c.cy >= n) throw std::domain_error("cell outside hilbert grid");
  unsigned state = 0;
  std::uint64_t d = 0;
  unsigned b = order.value();
  for (; b % 4 != 0;) {
    --b;
    unsigned rx = static_cast<unsigned>(c.cx >> b) & 1;
    unsigned ry = static_cast<unsigned>(c.cy >> b) & 1;
    detail::orient(state, rx, ry);
    d = (d << 2) | ((3 * rx) ^ ry);
    state = detail::next_state(state, rx, ry);
  }
  while (b > 0) {
    b -= 4;
    const unsigned in = static_cast<unsigned>(((c.cx >> b) & 15) << 4 | ((c.cy >> b) & 15));
    const std::uint16_t e = detail::kTables.enc[state][in];
    d = (d << 8) | (e & 0xFF);
    state = e >> 8;
  }
  return d;
}

inline constexpr Cell hilbert_to_xy(Order order, std::uint64_t d) {
  if (d >= order.cells()) throw std::domain_error("curve position out of range");
  unsigned state = 0;
  std::uint64_t x = 0;
  std::uint64_t y = 0;
  unsigned b = order.value();
  for (; b % 4 != 0;) {
    --b;
    const unsigned digit = static_cast<unsigned>(d >> (2 * b)) & 3;
    const unsigned rx = digit >> 1;
    const unsigned ry = (digit ^ rx) & 1;
    unsigned bx = rx;
    unsigned by = ry;
    detail::orient(state, bx, by);
    x |= std::uint64_t{bx} << b;
    y |= std::uint64_t{by} << b;
    state = detail::next_state(state, rx, ry);
  }
  while (b > 0) {
    b -= 4;
    const std::uint16_t e = detail::kTables.dec[state][(d >> (2 * b)) & 0xFF];
    x |= std::uint64_t{e & 15u} << b;
    y |= std::uint64_t{(e >> 4) & 15u} << b;
    state = e >> 8;
  }
  return {x, y};
}

/// Maps a point of `domain` onto the 2^k grid laid over it. Points on the
/// upper edges land in the last row/column.
inline Cell point_to_cell(Order order, const Rect& domain, const GeoPoint& p) {
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0)) {
    throw std::domain_error("hilbert domain needs positive extent");
  }
  if (!domain.contains(p)) throw std::domain_error("point outside hilbert domain");
  const std::uint64_t last = order.side() - 1;
  const double scale = static_cast<double>(order.side());
  const auto to_cell = [&](double v, double lo, double extent) {
    const double f = std::floor((v - lo) / extent * scale);
    if (f <= 0.0) return std::uint64_t{0};
    return std::min(static_cast<std::uint64_t>(f), last);
  };
  return {to_cell(p.lat, domain.xl, domain.width()),
          to_cell(p.lon, domain.yl, domain.height())};
}

/// Inclusive range of curve positions.
struct CurveRange {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  friend constexpr bool operator==(const CurveRange&, const CurveRange&) = default;
};

/// Inclusive rectangle of cells.
struct CellRect {
  std::uint64_t x0 = 0;
  std::uint64_t y0 = 0;
  std::uint64_t x1 = 0;
  std::uint64_t y1 = 0;
};

struct Cover {
  std::vector<CurveRange> ranges;  ///< sorted, disjoint, non-adjacent
  bool capped = false;             ///< true if coarse blocks were emitted whole
};

/// Early-stop decision for a partially covered block.
enum class Settle { kRefine, kWhole, kDrop };

struct NeverSettle {
  Settle operator()(std::uint64_t, std::uint64_t) const { return Settle::kRefine; }
};

/// Curve ranges covering every cell of `rect`, obtained by walking the
/// quadrant hierarchy top-down. Blocks fully inside `rect` are emitted whole;
/// partially covered blocks are refined. Once refining would exceed
/// `max_ranges` blocks, the remaining partial blocks are emitted whole and
/// the cover becomes a superset of the rectangle's cells.
///
/// `settle(lo, hi)` lets the caller stop early on a partial block: it returns
/// kRefine to keep splitting, kWhole to emit the block as is, or kDrop to
/// discard it.
template <typename SettleFn = NeverSettle>
Cover cover(Order order, const CellRect& rect, std::size_t max_ranges, SettleFn settle = {}) {
  struct Block {
    std::uint64_t base;  // first curve position
    unsigned level;      // block side is 2^level cells
  };
  Cover out;
  std::vector<CurveRange> emitted;
  std::vector<Block> partial{{0, order.value()}};
  std::vector<Block> next;

  const auto classify = [&](const Block& b) {
    // Every aligned run of 4^level positions is an aligned 2^level square.
    const std::uint64_t side = std::uint64_t{1} << b.level;
    const Cell c = hilbert_to_xy(order, b.base);
    const std::uint64_t x0 = c.cx & ~(side - 1);
    const std::uint64_t y0 = c.cy & ~(side - 1);
    const std::uint64_t x1 = x0 + side - 1;
    const std::uint64_t y1 = y0 + side - 1;
    if (x1 < rect.x0 || x0 > rect.x1 || y1 < rect.y0 || y0 > rect.y1) return 0;
    if (rect.x0 <= x0 && x1 <= rect.x1 && rect.y0 <= y0 && y1 <= rect.y1) return 2;
    return 1;
  };
  const auto whole = [](const Block& b) {
    const std::uint64_t len = std::uint64_t{1} << (2 * b.level);
    return CurveRange{b.base, b.base + len - 1};
  };

  while (!partial.empty()) {
    if (emitted.size() + 4 * partial.size() > max_ranges || partial.front().level == 0) {
      if (partial.front().level != 0) out.capped = true;
      for (const Block& b : partial) emitted.push_back(whole(b));
      break;
    }
    next.clear();
    for (const Block& b : partial) {
      const unsigned level = b.level - 1;
      const std::uint64_t len = std::uint64_t{1} << (2 * level);
      for (std::uint64_t i = 0; i < 4; ++i) {
        const Block child{b.base + i * len, level};
        switch (classify(child)) {
          case 2: emitted.push_back(whole(child)); break;
          case 1: {
            const CurveRange r = whole(child);
            switch (settle(r.lo, r.hi)) {
              case Settle::kRefine: next.push_back(child); break;
              case Settle::kWhole: emitted.push_back(r); break;
              case Settle::kDrop: break;
            }
            break;
          }
          default: break;
        }
      }
    }
    partial.swap(next);
  }

  std::sort(emitted.begin(), emitted.end(),
            [](const CurveRange& a, const CurveRange& b) { return a.lo < b.lo; });
  for (const CurveRange& r : emitted) {
    if (!out.ranges.empty() && out.ranges.back().hi + 1 >= r.lo) {
      out.ranges.back().hi = std::max(out.ranges.back().hi, r.hi);
    } else {
      out.ranges.push_back(r);
    }
  }
  return out;
}

}  // namespace lsi::hilbert
