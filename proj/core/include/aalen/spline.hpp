#pragma once

#include <span>
#include <vector>

namespace aalen {

/**
 * B-spline basis of order q (degree q - 1) on [0, 1] with clamped knots.
 *
 * The unit interval is split into K subintervals, giving J = K + q - 1
 * basis functions. The functions are non-negative and sum to one at every
 * point of [0, 1].
 */
class SplineBasis {
 public:
  /// Equally spaced breakpoints.
  SplineBasis(int order, int intervals);

  /// Explicit breakpoints 0 = b_0 < b_1 < ... < b_K = 1.
  SplineBasis(int order, std::vector<double> breakpoints);

  int order() const noexcept { return order_; }
  int intervals() const noexcept {
    return static_cast<int>(breakpoints_.size()) - 1;
  }
  int dimension() const noexcept { return intervals() + order_ - 1; }

  /// Full clamped knot vector (length J + q).
  std::span<const double> knots() const noexcept { return knots_; }

  /// Distinct breakpoints including 0 and 1.
  std::span<const double> breakpoints() const noexcept { return breakpoints_; }

  /// Writes the q possibly-nonzero basis values at x into `out` and returns
  /// the index of the first one. x is clamped to [0, 1].
  int evaluate_nonzero(double x, std::span<double> out) const;

  /// All J basis values at x.
  std::vector<double> evaluate(double x) const;

  /// theta' B(x).
  double dot(std::span<const double> theta, double x) const;

  bool operator==(const SplineBasis& other) const = default;

 private:
  int span_index(double x) const;

  int order_;
  std::vector<double> breakpoints_;
  std::vector<double> knots_;
};

}  // namespace aalen
