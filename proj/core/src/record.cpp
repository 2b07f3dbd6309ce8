#include "aalen/record.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aalen {

StepFunction::StepFunction(std::vector<double> breaks, std::vector<double> values)
    : breaks_(std::move(breaks)), values_(std::move(values)) {
  if (breaks_.size() != values_.size() + 1 || values_.empty()) {
    throw std::invalid_argument("StepFunction: need breaks.size() == values.size() + 1 >= 2");
  }
  for (std::size_t k = 1; k < breaks_.size(); ++k) {
    if (!(breaks_[k] >= breaks_[k - 1])) {
      throw std::invalid_argument("StepFunction: breaks must be non-decreasing");
    }
  }
  cumulative_.assign(breaks_.size(), 0.0);
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!(values_[k] >= 0.0) || values_[k] != std::floor(values_[k])) {
      throw std::invalid_argument("StepFunction: values must be non-negative integers");
    }
    cumulative_[k + 1] = cumulative_[k] + values_[k] * (breaks_[k + 1] - breaks_[k]);
  }
}

StepFunction StepFunction::constant(double lo, double hi, double value) {
  return StepFunction({lo, hi}, {value});
}

double StepFunction::operator()(double t) const {
  if (breaks_.empty() || t < breaks_.front() || t > breaks_.back()) return 0.0;
  // First break >= t closes the step containing t.
  auto it = std::lower_bound(breaks_.begin() + 1, breaks_.end(), t);
  return values_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
}

double StepFunction::cumulative(double t) const {
  if (breaks_.empty() || t <= breaks_.front()) return 0.0;
  if (t >= breaks_.back()) return cumulative_.back();
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  const auto k = static_cast<std::size_t>(it - breaks_.begin()) - 1;
  return cumulative_[k] + values_[k] * (t - breaks_[k]);
}

double StepFunction::integrate(const IntensityModel& lambda) const {
  double s = 0.0;
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (values_[k] == 0.0 || !(breaks_[k + 1] > breaks_[k])) continue;
    s += values_[k] * lambda.integral(breaks_[k], breaks_[k + 1]);
  }
  return s;
}

double StepFunction::max_value() const {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

CountingRecord::CountingRecord(Fields f) : f_(std::move(f)) {
  if (f_.n < 0) throw std::invalid_argument("CountingRecord: n must be >= 0");
  if (!(f_.horizon > 0.0)) throw std::invalid_argument("CountingRecord: horizon must be > 0");
  for (std::size_t i = 0; i < f_.events.size(); ++i) {
    const double t = f_.events[i];
    if (!(t >= 0.0 && t <= f_.horizon)) {
      throw std::invalid_argument("CountingRecord: event time outside [0, T]");
    }
    if (i > 0 && t < f_.events[i - 1]) {
      throw std::invalid_argument("CountingRecord: event times must be sorted");
    }
  }
  if (!f_.marks.empty() && f_.marks.size() != f_.events.size()) {
    throw std::invalid_argument("CountingRecord: marks must match events");
  }
  if (f_.exposure.steps() == 0) {
    f_.exposure = StepFunction::constant(0.0, f_.horizon, 0.0);
  }
  if (f_.exposure.max_value() > f_.n) {
    throw std::invalid_argument("CountingRecord: exposure exceeds n");
  }
}

std::size_t CountingRecord::count_in(double a, double b) const {
  const auto lo = std::lower_bound(f_.events.begin(), f_.events.end(), a);
  const auto hi = std::upper_bound(f_.events.begin(), f_.events.end(), b);
  return hi > lo ? static_cast<std::size_t>(hi - lo) : 0;
}

bool CountingRecord::operator==(const CountingRecord& o) const {
  return f_.model == o.f_.model && f_.n == o.f_.n && f_.horizon == o.f_.horizon &&
         f_.events == o.f_.events && f_.marks == o.f_.marks && f_.exposure == o.f_.exposure &&
         f_.seed == o.f_.seed && f_.spec_digest == o.f_.spec_digest && f_.audit == o.f_.audit;
}

}  // namespace aalen
