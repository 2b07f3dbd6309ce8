#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aalen/intensity.hpp"

namespace aalen {

/**
 * Integer-valued step function on [breaks.front(), breaks.back()].
 *
 * values[k] holds on (breaks[k], breaks[k+1]]; at breaks.front() the first
 * value applies. This is the predictable (left-continuous) version of an
 * at-risk count, e.g. Y_t = sum_i 1{Z_i >= t}.
 */
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(std::vector<double> breaks, std::vector<double> values);

  /// Constant `value` on [lo, hi].
  static StepFunction constant(double lo, double hi, double value);

  std::span<const double> breaks() const noexcept { return breaks_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t steps() const noexcept { return values_.size(); }

  double operator()(double t) const;

  /// ∫_{breaks.front()}^{t} Y(s) ds.
  double cumulative(double t) const;
  double total() const noexcept { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

  /// ∫ λ(t) Y(t) dt, summed exactly step by step.
  double integrate(const IntensityModel& lambda) const;

  double max_value() const;

  bool operator==(const StepFunction& o) const {
    return breaks_ == o.breaks_ && values_ == o.values_;
  }

 private:
  std::vector<double> breaks_;
  std::vector<double> values_;
  std::vector<double> cumulative_;
};

/// Per-unit audit entry for the right-censoring model.
struct CensoredObservation {
  double z;    // min(X, C), capped at the horizon
  bool delta;  // 1{X <= C} and observed before the horizon

  bool operator==(const CensoredObservation&) const = default;
};

/**
 * One observed path: event times on [0, T] and the exposure process Y.
 *
 * Immutable after construction.
 */
class CountingRecord {
 public:
  struct Fields {
    std::string model;
    int n = 0;
    double horizon = 1.0;
    std::vector<double> events;
    std::vector<std::string> marks;
    StepFunction exposure;
    std::uint64_t seed = 0;
    std::string spec_digest;
    std::vector<CensoredObservation> audit;
  };

  explicit CountingRecord(Fields f);

  const std::string& model() const noexcept { return f_.model; }
  int n() const noexcept { return f_.n; }
  double horizon() const noexcept { return f_.horizon; }
  std::span<const double> events() const noexcept { return f_.events; }
  std::span<const std::string> marks() const noexcept { return f_.marks; }
  const StepFunction& exposure() const noexcept { return f_.exposure; }
  std::uint64_t seed() const noexcept { return f_.seed; }
  const std::string& spec_digest() const noexcept { return f_.spec_digest; }
  std::span<const CensoredObservation> audit() const noexcept { return f_.audit; }
  std::size_t count() const noexcept { return f_.events.size(); }

  /// Number of events in [a, b].
  std::size_t count_in(double a, double b) const;

  bool operator==(const CountingRecord& o) const;

 private:
  Fields f_;
};

}  // namespace aalen
