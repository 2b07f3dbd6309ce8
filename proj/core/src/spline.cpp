#include "aalen/spline.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace aalen {

namespace {

std::vector<double> uniform_breakpoints(int intervals) {
  if (intervals < 1) {
    throw std::invalid_argument("SplineBasis: need at least one interval");
  }
  std::vector<double> b(static_cast<std::size_t>(intervals) + 1);
  for (int i = 0; i <= intervals; ++i) {
    b[static_cast<std::size_t>(i)] = static_cast<double>(i) / intervals;
  }
  return b;
}

}  // namespace

SplineBasis::SplineBasis(int order, int intervals)
    : SplineBasis(order, uniform_breakpoints(intervals)) {}

SplineBasis::SplineBasis(int order, std::vector<double> breakpoints)
    : order_(order), breakpoints_(std::move(breakpoints)) {
  if (order_ < 1) throw std::invalid_argument("SplineBasis: order must be >= 1");
  if (breakpoints_.size() < 2 || breakpoints_.front() != 0.0 ||
      breakpoints_.back() != 1.0) {
    throw std::invalid_argument("SplineBasis: breakpoints must span [0, 1]");
  }
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > breakpoints_[i - 1])) {
      throw std::invalid_argument("SplineBasis: breakpoints must increase");
    }
  }
  knots_.assign(static_cast<std::size_t>(order_ - 1), 0.0);
  knots_.insert(knots_.end(), breakpoints_.begin(), breakpoints_.end());
  knots_.insert(knots_.end(), static_cast<std::size_t>(order_ - 1), 1.0);
}

int SplineBasis::span_index(double x) const {
  // Knot span i with knots[i] <= x < knots[i + 1], i in [q - 1, J - 1].
  const int degree = order_ - 1;
  const int last = dimension() - 1;
  if (x >= 1.0) return last;
  const auto it = std::upper_bound(knots_.begin() + degree,
                                   knots_.begin() + last + 1, x);
  return static_cast<int>(it - knots_.begin()) - 1;
}

int SplineBasis::evaluate_nonzero(double x, std::span<double> out) const {
  if (out.size() < static_cast<std::size_t>(order_)) {
    throw std::invalid_argument("SplineBasis: output span too small");
  }
  x = std::clamp(x, 0.0, 1.0);
  const int degree = order_ - 1;
  const int i = span_index(x);
  // Cox-de Boor triangle.
  double left[16];
  double right[16];
  if (order_ > 16) throw std::invalid_argument("SplineBasis: order above 16");
  out[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = x - knots_[static_cast<std::size_t>(i + 1 - j)];
    right[j] = knots_[static_cast<std::size_t>(i + j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = out[static_cast<std::size_t>(r)] / (right[r + 1] + left[j - r]);
      out[static_cast<std::size_t>(r)] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[static_cast<std::size_t>(j)] = saved;
  }
  return i - degree;
}

std::vector<double> SplineBasis::evaluate(double x) const {
  std::vector<double> all(static_cast<std::size_t>(dimension()), 0.0);
  std::vector<double> local(static_cast<std::size_t>(order_));
  const int first = evaluate_nonzero(x, local);
  for (int r = 0; r < order_; ++r) {
    all[static_cast<std::size_t>(first + r)] = local[static_cast<std::size_t>(r)];
  }
  return all;
}

double SplineBasis::dot(std::span<const double> theta, double x) const {
  if (theta.size() != static_cast<std::size_t>(dimension())) {
    throw std::invalid_argument("SplineBasis: coefficient dimension " +
                                std::to_string(theta.size()) + " != basis dimension " +
                                std::to_string(dimension()));
  }
  double local[16];
  const int first = evaluate_nonzero(x, std::span<double>(local, static_cast<std::size_t>(order_)));
  double s = 0.0;
  for (int r = 0; r < order_; ++r) s += theta[static_cast<std::size_t>(first + r)] * local[r];
  return s;
}

}  // namespace aalen
