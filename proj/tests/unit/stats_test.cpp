#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "aalen/random.hpp"
#include "aalen/stats.hpp"

using namespace aalen;

TEST(Stats, Moments) {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(stats::mean(x), 2.5);
  EXPECT_DOUBLE_EQ(stats::variance(x), 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(stats::std_error(x), std::sqrt(5.0 / 3.0 / 4.0));
  EXPECT_DOUBLE_EQ(stats::median(x), 2.5);
  EXPECT_DOUBLE_EQ(stats::quantile(x, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(stats::quantile(x, 1.0 / 3.0), 2.0);
}

TEST(Stats, KolmogorovTailKnownValues) {
  // P(K > 1.36) ≈ 0.05 and P(K > 1.63) ≈ 0.01.
  EXPECT_NEAR(stats::kolmogorov_tail(1.3581), 0.05, 1e-4);
  EXPECT_NEAR(stats::kolmogorov_tail(1.6276), 0.01, 1e-4);
  EXPECT_EQ(stats::kolmogorov_tail(0.0), 1.0);
}

TEST(Stats, KsUniformSample) {
  Stream rng(1);
  std::vector<double> x(2000);
  for (auto& v : x) v = rng.uniform();
  EXPECT_GT(stats::ks_one_sample(x, [](double t) { return std::clamp(t, 0.0, 1.0); }).p_value, 0.01);
  std::vector<double> y(2000);
  for (auto& v : y) v = rng.uniform() * rng.uniform();
  EXPECT_LT(stats::ks_two_sample(x, y).p_value, 1e-6);
}

TEST(Stats, ChiSquareAgainstBoost) {
  const std::vector<double> obs{18, 22, 30, 30};
  const std::vector<double> exp{25, 25, 25, 25};
  const auto r = stats::chi_square(obs, exp);
  EXPECT_NEAR(r.statistic, (49.0 + 9.0 + 25.0 + 25.0) / 25.0, 1e-12);
  const boost::math::chi_squared d(3.0);
  EXPECT_NEAR(r.p_value, boost::math::cdf(boost::math::complement(d, r.statistic)), 1e-12);
}

TEST(Stats, LeastSquaresLine) {
  const std::vector<double> x{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> y{1.0, 3.0, 5.0, 7.0};
  const auto f = stats::least_squares(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
}

TEST(Random, StreamsAreReproducibleAndDistinct) {
  Stream a(5, 1);
  Stream b(5, 1);
  Stream c(5, 2);
  for (int i = 0; i < 10; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
  }
  EXPECT_NE(derive_seed(1, 2), derive_seed(2, 1));
}
