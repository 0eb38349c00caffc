#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsi/index.hpp"

// Index files: the magic "LSIX1", then little-endian fields
//   u8 technique, u8 search, u64 leaf_size, u64 spline_error,
//   u32 radix_bits, u32 hilbert_order, u64 partition_count,
//   per partition: u64 point_count, point_count x (f64 lat, f64 lon).
// Directories and models are rebuilt on load; the stored partitions are
// checked against the rebuilt ones.
namespace lsi::io {

inline constexpr std::array<char, 5> kMagic = {'L', 'S', 'I', 'X', '1'};

class format_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename T>
void put(std::ostream& os, T v) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
  auto u = std::bit_cast<U>(v);
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    os.put(static_cast<char>(u & 0xFF));
    u = static_cast<U>(u >> 8);
  }
}

template <typename T>
T get(std::istream& is) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
  U u = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    const int c = is.get();
    if (c == std::char_traits<char>::eof()) throw format_error("truncated index file");
    u = static_cast<U>(u | (static_cast<U>(static_cast<unsigned char>(c)) << (8 * i)));
  }
  return std::bit_cast<T>(u);
}

}  // namespace detail

inline void write_index(std::ostream& os, const PartitionedIndex& idx) {
  const BuildConfig& c = idx.config();
  os.write(kMagic.data(), kMagic.size());
  detail::put<std::uint8_t>(os, static_cast<std::uint8_t>(c.technique));
  detail::put<std::uint8_t>(os, static_cast<std::uint8_t>(c.search));
  detail::put<std::uint64_t>(os, c.leaf_size);
  detail::put<std::uint64_t>(os, c.spline_error);
  detail::put<std::uint32_t>(os, c.radix_bits);
  detail::put<std::uint32_t>(os, c.hilbert_order);
  detail::put<std::uint64_t>(os, idx.partitions().size());
  for (const auto& p : idx.partitions()) {
    detail::put<std::uint64_t>(os, p.points.size());
    for (const auto& pt : p.points) {
      detail::put<double>(os, pt.lat);
      detail::put<double>(os, pt.lon);
    }
  }
}

inline PartitionedIndex read_index(std::istream& is) {
  std::array<char, 5> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw format_error("not an LSIX1 index file");
  BuildConfig c;
  const auto technique = detail::get<std::uint8_t>(is);
  const auto search = detail::get<std::uint8_t>(is);
  if (technique > static_cast<std::uint8_t>(Technique::HilbertCurve) ||
      search > static_cast<std::uint8_t>(SearchKind::Spline)) {
    throw format_error("unknown technique or search kind in index file");
  }
  c.technique = static_cast<Technique>(technique);
  c.search = static_cast<SearchKind>(search);
  c.leaf_size = detail::get<std::uint64_t>(is);
  c.spline_error = detail::get<std::uint64_t>(is);
  c.radix_bits = detail::get<std::uint32_t>(is);
  c.hilbert_order = detail::get<std::uint32_t>(is);
  const auto parts = detail::get<std::uint64_t>(is);
  std::vector<GeoPoint> points;
  std::vector<std::vector<GeoPoint>> stored(parts);
  for (auto& part : stored) {
    const auto n = detail::get<std::uint64_t>(is);
    for (std::uint64_t j = 0; j < n; ++j) {
      const double lat = detail::get<double>(is);
      part.push_back({lat, detail::get<double>(is)});
    }
    points.insert(points.end(), part.begin(), part.end());
  }
  PartitionedIndex idx = PartitionedIndex::build(points, c);
  if (idx.partitions_.size() != parts) throw format_error("index file partition count mismatch");
  // The rebuild may order points with equal lon differently; keep the
  // stored order once the contents are known to agree.
  for (std::size_t i = 0; i < stored.size(); ++i) {
    Partition& part = idx.partitions_[i];
    std::vector<GeoPoint> a = part.points;
    std::vector<GeoPoint> b = stored[i];
    std::sort(a.begin(), a.end(), lat_lon_less);
    std::sort(b.begin(), b.end(), lat_lon_less);
    if (a != b) {
      throw format_error("index file partition " + std::to_string(i) + " does not match its rebuild");
    }
    if (part.points != stored[i]) {
      part.points = std::move(stored[i]);
      part.model = SearchModel::build(c.search, part.view(), c.spline_error, c.radix_bits);
    }
  }
  return idx;
}

inline void save_index(const std::string& path, const PartitionedIndex& idx) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw format_error("cannot write '" + path + "'");
  write_index(os, idx);
}

inline PartitionedIndex load_index(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw format_error("cannot open '" + path + "'");
  return read_index(is);
}

}  // namespace lsi::io
