#pragma once

#include <span>
#include <vector>

#include "aalen/intensity.hpp"
#include "aalen/record.hpp"

namespace aalen {

/// value = event_term - integral_term, in nats. A zero intensity at an
/// event time gives value = event_term = -inf.
struct LogLikValue {
  double value = 0.0;
  double event_term = 0.0;
  double integral_term = 0.0;
};

/// ∫ log λ dN - ∫ λ Y dt, the integral summed exactly over exposure steps.
LogLikValue log_likelihood(const IntensityModel& lambda, const CountingRecord& record);

/**
 * Log-likelihood of M · (uniform mixture) intensities against one record,
 * in O(L log N) per evaluation.
 *
 * Between consecutive sorted atom locations the mixture density is constant,
 * so the event term only needs event counts per piece; the integral term is
 * sum_l w_l / θ_l · ∫_lo^{lo+θ_l} Y.
 */
class MixtureLikelihood {
 public:
  MixtureLikelihood(const CountingRecord& record, Domain domain);

  LogLikValue operator()(std::span<const MixtureAtom> atoms, double mass) const;

  /// ∫_lo^{lo+x} Y dt, clipped to Ω.
  double cumulative_exposure(double x) const;
  std::size_t events() const noexcept { return offsets_.size(); }
  /// ∫_Ω Y dt.
  double total_exposure() const noexcept { return cumulative_exposure(domain_.length()); }

 private:
  Domain domain_;
  std::vector<double> offsets_;  // sorted event offsets from lo inside Ω
  std::size_t outside_ = 0;      // events outside Ω (zero intensity there)
  StepFunction exposure_;
  double base_ = 0.0;
};

/**
 * Fixed quadrature for ∫_Ω f(t) Y_t dt: Gauss-Legendre nodes on every
 * exposure step, split at the supplied breaks and into `panels` equal pieces,
 * with weights pre-multiplied by Y.
 */
class ExposureQuadrature {
 public:
  ExposureQuadrature(const StepFunction& exposure, Domain domain, std::span<const double> breaks,
                     int panels);

  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) s += weights_[i] * f(nodes_[i]);
    return s;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

}  // namespace aalen
