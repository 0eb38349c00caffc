#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "lsi/search.hpp"

using lsi::GeoPoint;
using lsi::SearchKind;
using lsi::SearchModel;

namespace {

std::vector<double> keys_0_999() {
  std::vector<double> k(1000);
  for (int i = 0; i < 1000; ++i) k[i] = i;
  return k;
}

}  // namespace

TEST(Search, UniformEstimateThenLocalSearch) {
  const auto keys = keys_0_999();
  const std::span<const double> s(keys);
  const SearchModel m = SearchModel::build(SearchKind::Spline, s, 32);
  const std::size_t est = m.estimate_from(s, 500.0);
  EXPECT_GE(est, 468u);
  EXPECT_LE(est, 532u);
  EXPECT_EQ(lsi::local_search_lower(s, est, 500.0), 500u);
  EXPECT_EQ(m.estimate_from(s, -1.0), 0u);
  EXPECT_EQ(m.estimate_from(s, 1e6), keys.size());
  EXPECT_EQ(m.estimate_to(s, -1.0), 0u);
  EXPECT_EQ(m.estimate_to(s, 1e6), keys.size());
}

TEST(Search, BinaryIsExact) {
  const std::vector<double> keys{1, 3, 5, 7};
  const std::span<const double> s(keys);
  const SearchModel m = SearchModel::build(SearchKind::Binary, s);
  EXPECT_EQ(m.kind(), SearchKind::Binary);
  EXPECT_EQ(m.spline(), nullptr);
  EXPECT_EQ(m.estimate_from(s, 4.0), 2u);
  EXPECT_EQ(m.estimate_from(s, 0.0), 0u);
  EXPECT_EQ(m.estimate_to(s, 5.0), 3u);
}

TEST(Search, LocalSearchCorrections) {
  const std::vector<double> keys{10, 20, 30, 40};
  const std::span<const double> s(keys);
  EXPECT_EQ(lsi::local_search_lower(s, 3, 15.0), 1u);
  EXPECT_EQ(lsi::local_search_lower(s, 0, 35.0), 3u);
  EXPECT_EQ(lsi::local_search_lower(s, 2, 45.0), 4u);
  EXPECT_EQ(lsi::local_search_upper(s, 0, 30.0), 3u);
  EXPECT_EQ(lsi::local_search_upper(s, 4, 5.0), 0u);
}

TEST(Search, BothVariantsMatchStdBounds) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> coarse(0, 400);
  std::vector<double> keys(20000);
  for (auto& k : keys) k = -74.0 + coarse(rng) * 1e-3;
  std::sort(keys.begin(), keys.end());
  const std::span<const double> s(keys);
  std::uniform_real_distribution<double> u(-74.05, -73.55);
  std::vector<double> bounds(keys.begin(), keys.begin() + 500);
  for (int i = 0; i < 10000; ++i) bounds.push_back(u(rng));
  for (SearchKind kind : {SearchKind::Binary, SearchKind::Spline}) {
    const SearchModel m = SearchModel::build(kind, s, 32);
    for (double b : bounds) {
      const auto lb = static_cast<std::size_t>(std::lower_bound(keys.begin(), keys.end(), b) - keys.begin());
      const auto ub = static_cast<std::size_t>(std::upper_bound(keys.begin(), keys.end(), b) - keys.begin());
      ASSERT_EQ(lsi::local_search_lower(s, m.estimate_from(s, b), b), lb);
      ASSERT_EQ(lsi::local_search_upper(s, m.estimate_to(s, b), b), ub);
    }
  }
}

TEST(Search, PointExamples) {
  const std::vector<GeoPoint> pts{{1, 10}, {2, 20}, {3, 30}};
  const std::span<const GeoPoint> s(pts);
  EXPECT_TRUE(lsi::search_point(s, 1, {2, 20}));
  EXPECT_FALSE(lsi::search_point(s, 1, {2, 25}));
  EXPECT_TRUE(lsi::search_point(s, 0, {3, 30}));
  EXPECT_TRUE(lsi::search_point(s, 3, {1, 10}));
  EXPECT_FALSE(lsi::search_point(s, 3, {1, 30}));
}

TEST(Search, PointMatchesLinearScan) {
  std::mt19937_64 rng(22);
  std::uniform_int_distribution<int> coarse(0, 30);
  std::vector<GeoPoint> pts(3000);
  for (auto& p : pts) p = {40.0 + coarse(rng) * 0.01, -74.0 + coarse(rng) * 0.01};
  std::stable_sort(pts.begin(), pts.end(), lsi::lon_less);
  const std::span<const GeoPoint> s(pts);
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  std::uniform_int_distribution<std::size_t> any_est(0, pts.size());
  for (SearchKind kind : {SearchKind::Binary, SearchKind::Spline}) {
    const SearchModel m = SearchModel::build(kind, s, 32);
    for (int i = 0; i < 1000; ++i) {
      const GeoPoint q = (i % 2) ? pts[pick(rng)] : GeoPoint{40.0 + coarse(rng) * 0.01, -74.0 + coarse(rng) * 0.0101};
      const bool expected = std::find(pts.begin(), pts.end(), q) != pts.end();
      ASSERT_EQ(lsi::search_point(s, m.estimate_from(s, q.lon), q), expected);
      ASSERT_EQ(lsi::search_point(s, any_est(rng), q), expected);
    }
  }
}
