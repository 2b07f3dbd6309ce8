#pragma once

#include <functional>
#include <span>
#include <vector>

namespace aalen::stats {

double mean(std::span<const double> x);
/// Unbiased sample variance; 0 for fewer than two values.
double variance(std::span<const double> x);
/// Standard error of the mean.
double std_error(std::span<const double> x);

/// Linear-interpolation quantile (type 7), p in [0, 1].
double quantile(std::vector<double> x, double p);
double median(std::vector<double> x);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov tail P(K > x).
double kolmogorov_tail(double x);

TestResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf);
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Pearson chi-square goodness of fit, df = cells - 1.
TestResult chi_square(std::span<const double> observed, std::span<const double> expected);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace aalen::stats
