#include "aalen/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "aalen/quadrature.hpp"

namespace aalen {

LogLikValue log_likelihood(const IntensityModel& lambda, const CountingRecord& record) {
  LogLikValue v;
  for (double t : record.events()) {
    const double l = lambda(t);
    if (!(l > 0.0)) {
      v.event_term = -std::numeric_limits<double>::infinity();
      break;
    }
    v.event_term += std::log(l);
  }
  v.integral_term = record.exposure().integrate(lambda);
  v.value = v.event_term - v.integral_term;
  return v;
}

MixtureLikelihood::MixtureLikelihood(const CountingRecord& record, Domain domain)
    : domain_(domain), exposure_(record.exposure()) {
  for (double t : record.events()) {
    if (domain.contains(t)) {
      offsets_.push_back(t - domain.lo);
    } else {
      ++outside_;
    }
  }
  base_ = exposure_.cumulative(domain.lo);
}

double MixtureLikelihood::cumulative_exposure(double x) const {
  const double t = domain_.lo + std::clamp(x, 0.0, domain_.length());
  return exposure_.cumulative(t) - base_;
}

LogLikValue MixtureLikelihood::operator()(std::span<const MixtureAtom> atoms, double mass) const {
  LogLikValue v;
  if (!(mass > 0.0)) {
    throw std::invalid_argument("MixtureLikelihood: mass must be > 0");
  }
  std::vector<MixtureAtom> sorted(atoms.begin(), atoms.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const MixtureAtom& a, const MixtureAtom& b) { return a.theta < b.theta; });
  const std::size_t L = sorted.size();
  std::vector<double> suffix(L + 1, 0.0);
  for (std::size_t k = L; k-- > 0;) suffix[k] = suffix[k + 1] + sorted[k].weight / sorted[k].theta;

  double integral = 0.0;
  for (const auto& a : sorted) integral += a.weight / a.theta * cumulative_exposure(a.theta);
  v.integral_term = mass * integral;

  const double neg_inf = -std::numeric_limits<double>::infinity();
  if (outside_ > 0) {
    v.event_term = neg_inf;
  } else {
    double ev = static_cast<double>(offsets_.size()) * std::log(mass);
    // Piece k covers offsets in [θ_(k-1), θ_(k)), where the density is suffix[k].
    auto it = offsets_.begin();
    for (std::size_t k = 0; k <= L && it != offsets_.end(); ++k) {
      const auto end = k < L ? std::lower_bound(it, offsets_.end(), sorted[k].theta) : offsets_.end();
      const auto count = end - it;
      if (count > 0) {
        if (!(suffix[k] > 0.0)) {
          ev = neg_inf;
          break;
        }
        ev += static_cast<double>(count) * std::log(suffix[k]);
      }
      it = end;
    }
    v.event_term = ev;
  }
  v.value = v.event_term - v.integral_term;
  return v;
}

ExposureQuadrature::ExposureQuadrature(const StepFunction& exposure, Domain domain,
                                       std::span<const double> breaks, int panels) {
  const auto& rule = quadrature::gauss_legendre();
  const auto cuts = quadrature::partition(domain.lo, domain.hi, breaks, std::max(panels, 1));
  const auto eb = exposure.breaks();
  const auto ev = exposure.values();
  for (std::size_t k = 0; k < ev.size(); ++k) {
    if (ev[k] == 0.0) continue;
    const double a = std::max(eb[k], domain.lo);
    const double b = std::min(eb[k + 1], domain.hi);
    if (!(b > a)) continue;
    // Panel edges of the shared partition that fall inside this step.
    auto lo = std::upper_bound(cuts.begin(), cuts.end(), a);
    double left = a;
    while (true) {
      const double right = (lo != cuts.end() && *lo < b) ? *lo : b;
      if (right > left) {
        const double half = 0.5 * (right - left);
        const double mid = 0.5 * (right + left);
        for (int i = 0; i < quadrature::kNodes; ++i) {
          nodes_.push_back(mid + half * rule.nodes[i]);
          weights_.push_back(ev[k] * half * rule.weights[i]);
        }
      }
      if (right >= b) break;
      left = right;
      ++lo;
    }
  }
}

}  // namespace aalen
