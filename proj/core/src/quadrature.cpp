#include "aalen/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

namespace aalen::quadrature {

const Rule& gauss_legendre() {
  static const Rule rule = [] {
    using boost::math::quadrature::gauss;
    const auto& x = gauss<double, kNodes>::abscissa();
    const auto& w = gauss<double, kNodes>::weights();
    // Boost stores the non-negative half of the symmetric rule.
    Rule r{};
    const int half = kNodes / 2;
    for (int i = 0; i < half; ++i) {
      r.nodes[half + i] = x[i];
      r.weights[half + i] = w[i];
      r.nodes[half - 1 - i] = -x[i];
      r.weights[half - 1 - i] = w[i];
    }
    return r;
  }();
  return rule;
}

std::vector<double> partition(double lo, double hi,
                              std::span<const double> breaks, int panels) {
  std::vector<double> cuts;
  cuts.reserve(breaks.size() + static_cast<std::size_t>(std::max(panels, 1)) + 1);
  const int p = std::max(panels, 1);
  for (int i = 0; i <= p; ++i) {
    cuts.push_back(lo + (hi - lo) * static_cast<double>(i) / p);
  }
  for (double b : breaks) {
    if (b > lo && b < hi) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  const double tol = 1e-14 * std::max(1.0, std::abs(hi - lo));
  std::vector<double> out;
  out.reserve(cuts.size());
  for (double c : cuts) {
    if (out.empty() || c - out.back() > tol) out.push_back(c);
  }
  out.back() = hi;
  return out;
}

}  // namespace aalen::quadrature
