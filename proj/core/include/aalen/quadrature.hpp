#pragma once

#include <array>
#include <span>
#include <vector>

namespace aalen::quadrature {

inline constexpr int kNodes = 32;

/// 32-point Gauss-Legendre rule on [-1, 1].
struct Rule {
  std::array<double, kNodes> nodes;
  std::array<double, kNodes> weights;
};

const Rule& gauss_legendre();

/// Integral of `f` over a single smooth panel [a, b].
template <class F>
double integrate(F&& f, double a, double b) {
  if (!(b > a)) return 0.0;
  const Rule& rule = gauss_legendre();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (int i = 0; i < kNodes; ++i) {
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return half * sum;
}

/// Composite rule over consecutive cuts (sorted, one panel per gap).
template <class F>
double integrate(F&& f, std::span<const double> cuts) {
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    sum += integrate(f, cuts[k], cuts[k + 1]);
  }
  return sum;
}

/// Sorted, de-duplicated cut points covering [lo, hi]: the endpoints, every
/// break strictly inside, and `panels` equal-width panel edges.
std::vector<double> partition(double lo, double hi,
                              std::span<const double> breaks, int panels);

}  // namespace aalen::quadrature
