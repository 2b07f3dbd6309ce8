#include "aalen/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace aalen::stats {

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double std_error(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  return std::sqrt(variance(x) / static_cast<double>(x.size()));
}

double quantile(std::vector<double> x, double p) {
  if (x.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(x.begin(), x.end());
  const double h = p * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

double kolmogorov_tail(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

TestResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
  if (x.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d)};
}

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == t) ++i;
    while (j < b.size() && b[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double en = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_tail((en + 0.12 + 0.11 / en) * d)};
}

TestResult chi_square(std::span<const double> observed, std::span<const double> expected) {
  if (observed.size() != expected.size() || observed.size() < 2) {
    throw std::invalid_argument("chi_square: need matching cells, at least two");
  }
  double stat = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    if (!(expected[k] > 0.0)) throw std::invalid_argument("chi_square: expected count <= 0");
    const double d = observed[k] - expected[k];
    stat += d * d / expected[k];
  }
  const boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  return {stat, boost::math::cdf(boost::math::complement(dist, stat))};
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("least_squares: need at least two paired points");
  }
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("least_squares: degenerate abscissa");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace aalen::stats
