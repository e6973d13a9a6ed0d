#include <gtest/gtest.h>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/mpfr.hpp>
#include <cmath>
#include <vector>

#include "fractalscape/error.hpp"
#include "fractalscape/holder.hpp"
#include "fractalscape/rng.hpp"

using namespace fractalscape;

namespace {

// Direct summation in 200-digit arithmetic: b^n pi x is formed exactly enough
// that every term keeps full double precision, with no phase reduction.
double weierstrass_oracle(double x, double a, int b, int n_terms) {
  using Wide = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<200>>;
  const Wide pi_x = boost::math::constants::pi<Wide>() * Wide(x);
  Wide sum = 0, an = 1, bn = 1;
  for (int n = 0; n < n_terms; ++n) {
    sum += an * cos(bn * pi_x);
    an *= a;
    bn *= b;
  }
  return static_cast<double>(sum);
}

CurveSample sample_curve(double lo, double hi, std::size_t n, double (*f)(double)) {
  CurveSample c;
  c.xs.resize(n);
  c.ys.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    c.ys[i] = f(c.xs[i]);
  }
  return c;
}

}  // namespace

TEST(Weierstrass, ValueAtZeroIsGeometricSum) {
  EXPECT_NEAR(weierstrass(0.0), 2.5, 1e-12);
  EXPECT_LE(std::pow(0.6, 60) / 0.4, 1e-12);
}

TEST(Weierstrass, IsEven) {
  RngStream rng(51, StreamTag::holder, 0);
  for (int i = 0; i < 100; ++i) {
    const double x = 4.0 * rng.uniform() - 2.0;
    EXPECT_EQ(weierstrass(x), weierstrass(-x));
  }
}

TEST(Weierstrass, HalfMatchesLongSummation) {
  EXPECT_NEAR(weierstrass(0.5), weierstrass_oracle(0.5, 0.6, 7, 200), 1e-12);
}

TEST(Weierstrass, RandomPointsMatchHighPrecisionOracle) {
  RngStream rng(52, StreamTag::holder, 0);
  for (int i = 0; i < 50; ++i) {
    const double x = 4.0 * rng.uniform() - 2.0;
    EXPECT_NEAR(weierstrass(x), weierstrass_oracle(x, 0.6, 7, 200), 1e-12) << "x=" << x;
  }
}

TEST(BoxCounting, StraightLine) {
  const CurveSample line = sample_curve(0.0, 1.0, 10000, [](double x) { return x; });
  EXPECT_NEAR(box_count_dimension(line), 1.0, 0.05);
}

TEST(BoxCounting, ConstantCurveCountsAsOneDimensional) {
  const CurveSample flat = sample_curve(0.0, 1.0, 10000, [](double) { return 4.0; });
  EXPECT_NEAR(box_count_dimension(flat), 1.0, 0.05);
}

TEST(BoxCounting, WeierstrassGraph) {
  const CurveSample w = sample_curve(-2.0, 2.0, 200000, [](double x) { return weierstrass(x); });
  const double expected = 2.0 + std::log(0.6) / std::log(7.0);
  EXPECT_NEAR(expected, 1.7375, 1e-4);
  EXPECT_NEAR(box_count_dimension(w), 1.73, 0.10);
}

TEST(BoxCounting, RejectsShortCurves) {
  const CurveSample c = sample_curve(0.0, 1.0, 500, [](double x) { return x; });
  try {
    box_count_dimension(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::insufficient_points);
  }
}
