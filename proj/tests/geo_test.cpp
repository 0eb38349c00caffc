#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lsi/geo.hpp"

using lsi::GeoPoint;
using lsi::Rect;

namespace {

GeoPoint random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lat(-90.0, 90.0);
  std::uniform_real_distribution<double> lon(-180.0, 180.0);
  const double a = lat(rng);
  return {a, lon(rng)};
}

// Point at `meters` from c along initial bearing `theta` (direct problem on
// the sphere).
GeoPoint destination(const GeoPoint& c, double meters, double theta) {
  const double d = meters / lsi::kEarthRadiusMeters;
  const double phi1 = lsi::deg_to_rad(c.lat);
  const double lam1 = lsi::deg_to_rad(c.lon);
  const double phi2 = std::asin(std::sin(phi1) * std::cos(d) + std::cos(phi1) * std::sin(d) * std::cos(theta));
  const double lam2 = lam1 + std::atan2(std::sin(theta) * std::sin(d) * std::cos(phi1),
                                        std::cos(d) - std::sin(phi1) * std::sin(phi2));
  return {lsi::rad_to_deg(phi2), lsi::rad_to_deg(lam2)};
}

}  // namespace

TEST(Haversine, KnownDistances) {
  EXPECT_EQ(lsi::haversine({0, 0}, {0, 0}), 0.0);
  // Quarter and half great circle: (pi/2) R and pi R.
  EXPECT_NEAR(lsi::haversine({0, 0}, {0, 90}), 10007543.0, 1.0);
  EXPECT_NEAR(lsi::haversine({0, 0}, {0, 180}), 20015087.0, 1.0);
  EXPECT_NEAR(lsi::haversine({0, 0}, {90, 0}), std::numbers::pi / 2 * lsi::kEarthRadiusMeters, 1e-6);
}

TEST(Haversine, SymmetryIdentityTriangle) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 5000; ++i) {
    const GeoPoint a = random_point(rng);
    const GeoPoint b = random_point(rng);
    const GeoPoint c = random_point(rng);
    EXPECT_EQ(lsi::haversine(a, b), lsi::haversine(b, a));
    EXPECT_EQ(lsi::haversine(a, a), 0.0);
    EXPECT_GE(lsi::haversine(a, b), 0.0);
    EXPECT_LE(lsi::haversine(a, c), lsi::haversine(a, b) + lsi::haversine(b, c) + 1e-6);
  }
}

TEST(WithinDistance, InclusiveBoundary) {
  const GeoPoint a{10, 20};
  const GeoPoint b{10.5, 20.5};
  const double d = lsi::haversine(a, b);
  EXPECT_TRUE(lsi::within_distance(b, a, d));
  EXPECT_FALSE(lsi::within_distance(b, a, std::nextafter(d, 0.0)));
}

TEST(MbrOfCircle, Examples) {
  EXPECT_EQ(lsi::mbr_of_circle({0, 0}, 0.0), (Rect{0, 0, 0, 0}));

  const Rect one = lsi::mbr_of_circle({0, 0}, 111194.9);
  EXPECT_NEAR(one.xl, -1.0, 1e-3);
  EXPECT_NEAR(one.yl, -1.0, 1e-3);
  EXPECT_NEAR(one.xh, 1.0, 1e-3);
  EXPECT_NEAR(one.yh, 1.0, 1e-3);

  const Rect polar = lsi::mbr_of_circle({89.5, 0}, 111194.9);
  EXPECT_EQ(polar.xh, 90.0);
  EXPECT_EQ(polar.yl, -180.0);
  EXPECT_EQ(polar.yh, 180.0);
  EXPECT_NEAR(polar.xl, 88.5, 1e-3);

  const Rect south = lsi::mbr_of_circle({-89.9, 10}, 50000.0);
  EXPECT_EQ(south.xl, -90.0);
  EXPECT_EQ(south.yl, -180.0);
  EXPECT_EQ(south.yh, 180.0);
}

TEST(MbrOfCircle, AntimeridianSpansAllLongitudes) {
  const Rect r = lsi::mbr_of_circle({0, 179.9}, 50000.0);
  EXPECT_EQ(r.yl, -180.0);
  EXPECT_EQ(r.yh, 180.0);
  EXPECT_LT(r.xl, 0.0);
  EXPECT_GT(r.xh, 0.0);
}

TEST(MbrOfCircle, NegativeDistanceRejected) {
  EXPECT_THROW(lsi::mbr_of_circle({0, 0}, -1.0), std::invalid_argument);
}

TEST(MbrOfCircle, CoversSampledCircle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lat(-70.0, 70.0);
  std::uniform_real_distribution<double> lon(-170.0, 170.0);
  std::uniform_real_distribution<double> meters(1.0, 200000.0);
  for (int i = 0; i < 300; ++i) {
    const GeoPoint c{lat(rng), lon(rng)};
    const double d = meters(rng);
    const Rect r = lsi::mbr_of_circle(c, d);
    ASSERT_TRUE(r.well_formed());
    for (int k = 0; k < 720; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / 720.0;
      // Stay a hair inside so rounding in the direct problem cannot push
      // the sample beyond d.
      const GeoPoint q = destination(c, d * (1.0 - 1e-9), theta);
      ASSERT_LE(lsi::haversine(c, q), d);
      ASSERT_TRUE(r.contains(q)) << "center " << c.lat << "," << c.lon << " d=" << d << " k=" << k;
    }
  }
}

TEST(Rect, Predicates) {
  const Rect r{0, 0, 1, 2};
  EXPECT_TRUE(r.contains(GeoPoint{0, 0}));
  EXPECT_TRUE(r.contains(GeoPoint{1, 2}));
  EXPECT_FALSE(r.contains(GeoPoint{1.0000001, 1}));
  EXPECT_TRUE(r.intersects(Rect{1, 2, 3, 3}));
  EXPECT_FALSE(r.intersects(Rect{1.5, 0, 3, 3}));
  EXPECT_TRUE(r.contains(Rect{0.5, 0.5, 1, 1}));
  EXPECT_EQ(lsi::bounding_rect(std::vector<GeoPoint>{{1, 5}, {-1, 2}, {0, 9}}), (Rect{-1, 2, 1, 9}));
  EXPECT_THROW(lsi::bounding_rect(std::vector<GeoPoint>{}), std::invalid_argument);
}

TEST(GeoPoint, ExactEqualityAndValidity) {
  EXPECT_EQ((GeoPoint{1, 2}), (GeoPoint{1, 2}));
  EXPECT_NE((GeoPoint{1, 2}), (GeoPoint{1, std::nextafter(2.0, 3.0)}));
  EXPECT_TRUE(lsi::is_valid({90, -180}));
  EXPECT_FALSE(lsi::is_valid({90.5, 0}));
  EXPECT_FALSE(lsi::is_valid({0, 180.1}));
}
