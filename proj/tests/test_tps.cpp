// Copyright 2026 The fomo Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "json.hpp"

#include "fomo/tps.hpp"
#include "oracles.hpp"

namespace fomo {
namespace {

using oracle::max_abs_diff;

// Control-point-free evaluation written from the definition.
Point2 reference_eval(const TpsTransform& t, Point2 p) {
  double x = t.affine[0][0] * p.x + t.affine[0][1] * p.y + t.affine[0][2];
  double y = t.affine[1][0] * p.x + t.affine[1][1] * p.y + t.affine[1][2];
  for (std::size_t i = 0; i < t.control_points.size(); ++i) {
    const double r = std::hypot(p.x - t.control_points[i].x, p.y - t.control_points[i].y);
    const double u = r > 0.0 ? r * r * 2.0 * std::log(r) : 0.0;
    x += u * t.weights[i].x;
    y += u * t.weights[i].y;
  }
  return {x, y};
}

bool near_control_point(const TpsTransform& t, Point2 p, double eps) {
  for (const Point2& c : t.control_points) {
    if (std::hypot(p.x - c.x, p.y - c.y) < eps) return true;
  }
  return false;
}

TEST(TpsKernel, Values) {
  EXPECT_EQ(tps_kernel(0.0), 0.0);
  EXPECT_EQ(tps_kernel(1.0), 0.0);
  EXPECT_DOUBLE_EQ(tps_kernel(std::numbers::e), std::numbers::e);
  EXPECT_LT(tps_kernel(0.25), 0.0);
}

TEST(TpsEval, IdentityAndAffine) {
  oracle::Rng rng(50);
  const Mat2 a = rng.matrix();
  const Point2 b = rng.point();
  const TpsTransform t = TpsTransform::from_affine(a, b);
  for (int n = 0; n < 100; ++n) {
    const Point2 p = rng.point();
    EXPECT_EQ(tps_eval(TpsTransform::identity(), p), p);
    EXPECT_LT(max_abs_diff(tps_eval(t, p), {a.a11 * p.x + a.a12 * p.y + b.x,
                                            a.a21 * p.x + a.a22 * p.y + b.y}),
              1e-15);
    EXPECT_EQ(tps_jacobian(t, p), a);
  }
}

TEST(TpsEval, MatchesReferenceOnSamples) {
  oracle::Rng rng(51);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TpsTransform t = tps_sample({0.005, 0.05, 5, seed});
    for (int n = 0; n < 50; ++n) {
      const Point2 p = rng.point();
      EXPECT_LT(max_abs_diff(tps_eval(t, p), reference_eval(t, p)), 1e-13);
    }
  }
}

TEST(TpsJacobian, MatchesFiniteDifferences) {
  oracle::Rng rng(52);
  int pairs = 0;
  for (std::uint64_t seed = 100; pairs < 200; ++seed) {
    const TpsTransform t = tps_sample({0.005, 0.05, 5, seed});
    const Point2 p = rng.point();
    if (near_control_point(t, p, 0.05)) continue;
    const Mat2 fd =
        oracle::finite_difference_jacobian([&](Point2 q) { return reference_eval(t, q); }, p);
    EXPECT_LT(oracle::relative_error(tps_jacobian(t, p), fd), 1e-5);
    ++pairs;
  }
}

TEST(TpsJacobian, IdentityAndLinearPart) {
  EXPECT_EQ(tps_jacobian(TpsTransform::identity(), {0.3, 0.4}), Mat2::identity());
}

TEST(TpsJacobian, ContinuousThroughControlPoints) {
  const TpsTransform t = tps_sample({0.005, 0.05, 5, 7});
  for (const Point2& c : t.control_points) {
    const Mat2 at = tps_jacobian(t, c);
    const Mat2 near = tps_jacobian(t, c + Point2{1e-7, -1e-7});
    EXPECT_TRUE(std::isfinite(at.a11) && std::isfinite(at.a22));
    EXPECT_LT(max_abs_diff(at, near), 1e-4);
  }
}

TEST(TpsEval, ControlPointDropsItsOwnTerm) {
  const TpsTransform t = tps_sample({0.005, 0.05, 5, 21});
  const std::size_t i = 7;
  const Point2 c = t.control_points[i];
  double x = t.affine[0][0] * c.x + t.affine[0][1] * c.y + t.affine[0][2];
  double y = t.affine[1][0] * c.x + t.affine[1][1] * c.y + t.affine[1][2];
  for (std::size_t m = 0; m < t.control_points.size(); ++m) {
    if (m == i) continue;
    const double dx = c.x - t.control_points[m].x;
    const double dy = c.y - t.control_points[m].y;
    const double r2 = dx * dx + dy * dy;
    x += r2 * std::log(r2) * t.weights[m].x;
    y += r2 * std::log(r2) * t.weights[m].y;
  }
  EXPECT_LT(max_abs_diff(tps_eval(t, c), {x, y}), 1e-14);
}

TEST(TpsEval, ContinuousAtControlPoints) {
  const TpsTransform t = tps_sample({0.005, 0.05, 5, 22});
  const Point2 u{0.6, 0.8};
  for (const Point2& c : t.control_points) {
    const Point2 at = tps_eval(t, c);
    EXPECT_TRUE(is_finite(at));
    EXPECT_LT(max_abs_diff(at, tps_eval(t, c + 1e-9 * u)), 1e-6);
  }
}

TEST(TpsEval, AffineOnlyComposesExactly) {
  oracle::Rng rng(55);
  for (int n = 0; n < 50; ++n) {
    const Mat2 a1 = rng.matrix(-1, 1);
    const Mat2 a2 = rng.matrix(-1, 1);
    const Point2 b1 = rng.point();
    const Point2 b2 = rng.point();
    const TpsTransform t1 = TpsTransform::from_affine(a1, b1);
    const TpsTransform t2 = TpsTransform::from_affine(a2, b2);
    const Mat2 a = oracle::multiply(a2, a1);
    const Point2 b{a2.a11 * b1.x + a2.a12 * b1.y + b2.x, a2.a21 * b1.x + a2.a22 * b1.y + b2.y};
    const Point2 p = rng.point();
    const Point2 expect{a.a11 * p.x + a.a12 * p.y + b.x, a.a21 * p.x + a.a22 * p.y + b.y};
    EXPECT_LT(max_abs_diff(tps_eval(t2, tps_eval(t1, p)), expect), 1e-12);
  }
}

TEST(TpsSample, DeterministicPerSeed) {
  const TpsTransform a = tps_sample({0.005, 0.05, 5, 9});
  const TpsTransform b = tps_sample({0.005, 0.05, 5, 9});
  const TpsTransform c = tps_sample({0.005, 0.05, 5, 10});
  EXPECT_EQ(a.affine, b.affine);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_NE(a.affine, c.affine);
  EXPECT_EQ(a.control_points.size(), 25u);
}

TEST(TpsSample, ControlGrid) {
  const auto g = uniform_control_grid(5);
  ASSERT_EQ(g.size(), 25u);
  EXPECT_EQ(g.front(), (Point2{-1.0, -1.0}));
  EXPECT_EQ(g[1], (Point2{-0.5, -1.0}));
  EXPECT_EQ(g.back(), (Point2{1.0, 1.0}));
  EXPECT_EQ(uniform_control_grid(1), std::vector<Point2>{Point2{}});
}

TEST(TpsSample, ZeroVarianceIsIdentity) {
  const TpsTransform t = tps_sample({0.0, 0.0, 5, 3});
  oracle::Rng rng(53);
  for (int n = 0; n < 20; ++n) {
    const Point2 p = rng.point();
    EXPECT_EQ(tps_eval(t, p), p);
  }
}

// Independent stream: mt19937_64 outputs turned into normals by Box-Muller.
TEST(TpsSample, DrawOrderAndTransform) {
  const std::uint64_t seed = 77;
  std::mt19937_64 eng(seed);
  const auto normal = [&] {
    const double u1 = (static_cast<double>(eng() >> 11) + 0.5) / 9007199254740992.0;
    const double u2 = static_cast<double>(eng() >> 11) / 9007199254740992.0;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  };
  const double sa = std::sqrt(0.05);
  const double sw = std::sqrt(0.005);
  const TpsTransform t = tps_sample({0.005, 0.05, 3, seed});
  const double base[2][3] = {{1, 0, 0}, {0, 1, 0}};
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(t.affine[r][c], base[r][c] + sa * normal());
  }
  ASSERT_EQ(t.weights.size(), 9u);
  for (const Point2& w : t.weights) {
    EXPECT_DOUBLE_EQ(w.x, sw * normal());
    EXPECT_DOUBLE_EQ(w.y, sw * normal());
  }
}

TEST(TpsSample, MomentsMatchConfiguredVariances) {
  double sum = 0.0;
  double sq = 0.0;
  double wsq = 0.0;
  int n = 0;
  int nw = 0;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const TpsTransform t = tps_sample({0.005, 0.05, 5, seed});
    const double d = t.affine[0][1];
    sum += d;
    sq += d * d;
    ++n;
    for (const Point2& w : t.weights) {
      wsq += w.x * w.x + w.y * w.y;
      nw += 2;
    }
  }
  EXPECT_NEAR(sum / n, 0.0, 0.015);
  EXPECT_NEAR(sq / n, 0.05, 0.005);
  EXPECT_NEAR(wsq / nw, 0.005, 0.0002);
}

TEST(TpsSample, Golden) {
  std::ifstream in(std::string(FOMO_TEST_DATA_DIR) + "/tps_seed42_golden.json");
  ASSERT_TRUE(in.good());
  const auto golden = nlohmann::json::parse(in);
  const TpsTransform t = tps_sample({0.005, 0.05, 5, golden.at("seed").get<std::uint64_t>()});
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 3; ++c) {
      EXPECT_NEAR(t.affine[r][c], golden["affine"][r][c].get<double>(), 1e-15);
    }
  }
  for (std::size_t i = 0; i < t.weights.size(); ++i) {
    EXPECT_NEAR(t.weights[i].x, golden["weights"][i][0].get<double>(), 1e-15);
    EXPECT_NEAR(t.weights[i].y, golden["weights"][i][1].get<double>(), 1e-15);
  }
  ASSERT_EQ(golden["probes"].size(), 10u);
  for (const auto& probe : golden["probes"]) {
    const Point2 p{probe["p"][0].get<double>(), probe["p"][1].get<double>()};
    const Point2 expect{probe["t"][0].get<double>(), probe["t"][1].get<double>()};
    EXPECT_LT(max_abs_diff(tps_eval(t, p), expect), 1e-13);
  }
}

TEST(TpsSample, InvalidConfig) {
  EXPECT_THROW(tps_sample({-1.0, 0.05, 5, 0}), Error);
  EXPECT_THROW(tps_sample({0.005, 0.05, 0, 0}), Error);
}

TEST(TpsValidate, RejectsMalformed) {
  TpsTransform t = tps_sample({0.005, 0.05, 3, 1});
  EXPECT_NO_THROW(validate(t));
  TpsTransform dup = t;
  dup.control_points[1] = dup.control_points[0];
  EXPECT_THROW(validate(dup), Error);
  TpsTransform count = t;
  count.weights.pop_back();
  EXPECT_THROW(validate(count), Error);
  TpsTransform nan = t;
  nan.affine[1][2] = std::numeric_limits<double>::quiet_NaN();
  try {
    validate(nan);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MalformedTransform);
  }
}

TEST(TpsWarpImage, IdentityIsBitExactAndTranslationShifts) {
  oracle::Rng rng(54);
  Image img(32, 32, 3);
  for (double& v : img.data()) v = rng.uniform(0, 1);
  EXPECT_EQ(tps_warp_image(img, TpsTransform::identity()), img);
  const TpsTransform shift = TpsTransform::from_affine(Mat2::identity(), {4.0 / 32.0, 0.0});
  EXPECT_EQ(tps_warp_image(img, shift), oracle::integer_shift(img, -2, 0));
}

TEST(TpsWarpImage, HalfTurnReflectsSymmetricPattern) {
  oracle::Rng rng(56);
  // Point-symmetric pattern: img(i, j) = img(W-1-i, H-1-j).
  Image img(16, 16, 1);
  for (int j = 0; j < 8; ++j) {
    for (int i = 0; i < 16; ++i) {
      const double v = rng.uniform(0, 1);
      img.at(i, j, 0) = v;
      img.at(15 - i, 15 - j, 0) = v;
    }
  }
  const TpsTransform half = TpsTransform::from_affine(Mat2{-1.0, 0.0, 0.0, -1.0}, {});
  EXPECT_EQ(tps_warp_image(img, half), img);
}

}  // namespace
}  // namespace fomo
