#include "aalen/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "aalen/metrics.hpp"
#include "aalen/quadrature.hpp"
#include "aalen/stats.hpp"

namespace aalen {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Metropolis decision that treats -inf current states as always improvable.
bool accept(double log_ratio, double proposed_ll, double current_ll, Stream& rng) {
  if (proposed_ll == kNegInf) return false;
  if (current_ll == kNegInf) return true;
  if (std::isnan(log_ratio)) return false;
  return log_ratio >= 0.0 || std::log(rng.uniform_open()) < log_ratio;
}

/// Robbins-Monro step on a log scale toward the target acceptance.
void adapt(double& step, bool accepted, int round, double target) {
  if (round <= 0) return;
  const double gain = std::min(0.5, 1.0 / std::sqrt(static_cast<double>(round)));
  step *= std::exp(gain * ((accepted ? 1.0 : 0.0) - target));
  step = std::clamp(step, 1e-4, 50.0);
}

void tally(MoveStats& m, bool accepted) {
  ++m.proposed;
  if (accepted) ++m.accepted;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

bool all_in_domain(std::span<const double> events, Domain d) {
  return std::all_of(events.begin(), events.end(), [&](double t) { return d.contains(t); });
}

Domain default_domain(const CountingRecord& record, std::optional<Domain> domain) {
  return domain.value_or(Domain{0.0, record.horizon()});
}

/// Gibbs draw of the multiplicative scale given N events and ∫λ̄Y = integral.
double conjugate_scale(const ScalePrior& prior, double events, double integral, Stream& rng) {
  return rng.gamma(prior.shape + events, prior.rate + integral);
}

template <class Sampler, class State>
PosteriorChain run_chain(Sampler& sampler, State state, const McmcSettings& mcmc,
                         std::uint64_t seed, Stream& rng) {
  PosteriorChain chain;
  chain.iterations = mcmc.iterations;
  chain.burn_in = mcmc.burn_in;
  chain.stride = mcmc.stride;
  chain.seed = seed;
  const auto reset = [&] {
    for (auto& m : sampler.moves()) m.proposed = m.accepted = 0;
  };
  if (mcmc.burn_in == 0) reset();
  for (int it = 0; it < mcmc.iterations; ++it) {
    const int round = (mcmc.adapt && it < mcmc.burn_in) ? it + 1 : 0;
    sampler.sweep(state, rng, round, mcmc.target_acceptance);
    if (it + 1 == mcmc.burn_in) reset();
    if (it >= mcmc.burn_in && (it - mcmc.burn_in) % mcmc.stride == mcmc.stride - 1) {
      chain.draws.push_back(sampler.intensity(state));
      chain.log_likelihood.push_back(sampler.log_likelihood(state));
    }
  }
  chain.moves = sampler.moves();
  long proposed = 0;
  long accepted = 0;
  for (const auto& m : chain.moves) {
    if (m.gibbs) continue;
    proposed += m.proposed;
    accepted += m.accepted;
  }
  if (proposed > 0 && static_cast<double>(accepted) < 0.01 * static_cast<double>(proposed)) {
    throw ChainDiagnosticError("chain acceptance " +
                               std::to_string(static_cast<double>(accepted) / proposed) +
                               " below 1% after burn-in");
  }
  return chain;
}

}  // namespace

// ---------------------------------------------------------------- priors

void ScalePrior::validate() const {
  if (kind == Kind::gamma && !(shape > 0.0 && rate > 0.0)) {
    throw std::invalid_argument("ScalePrior: gamma shape and rate must be > 0");
  }
  if (kind == Kind::lognormal && !(log_sd > 0.0 && std::isfinite(log_mean))) {
    throw std::invalid_argument("ScalePrior: lognormal needs log_sd > 0");
  }
}

double ScalePrior::log_density(double x) const {
  if (!(x > 0.0)) return kNegInf;
  if (kind == Kind::gamma) return (shape - 1.0) * std::log(x) - rate * x;
  const double z = (std::log(x) - log_mean) / log_sd;
  return -std::log(x) - 0.5 * z * z;
}

double ScalePrior::sample(Stream& rng) const {
  if (kind == Kind::gamma) return rng.gamma(shape, rate);
  return std::exp(log_mean + log_sd * rng.normal());
}

void DpmPriorSpec::validate() const {
  if (!(concentration > 0.0)) throw std::invalid_argument("DpmPriorSpec: concentration must be > 0");
  if (!(base_exponent >= 0.0)) throw std::invalid_argument("DpmPriorSpec: base exponent must be >= 0");
  if (truncation < 20) throw std::invalid_argument("DpmPriorSpec: truncation must be >= 20");
  mass_prior.validate();
}

int SplinePriorSpec::dimension_for(int n) const {
  if (dimension > 0) return dimension;
  const double j = std::floor(std::pow(static_cast<double>(std::max(n, 1)),
                                       1.0 / (2.0 * smoothness_alpha + 1.0)));
  return std::max(order, static_cast<int>(j));
}

SplineBasis SplinePriorSpec::basis_for(int n) const {
  const int J = dimension_for(n);
  return SplineBasis(order, J - order + 1);
}

void SplinePriorSpec::validate() const {
  if (order < 1) throw std::invalid_argument("SplinePriorSpec: order must be >= 1");
  if (!(smoothness_alpha >= 0.5 && smoothness_alpha <= order)) {
    throw std::invalid_argument("SplinePriorSpec: smoothness_alpha must lie in [1/2, q]");
  }
  if (dimension > 0 && dimension < order) {
    throw std::invalid_argument("SplinePriorSpec: dimension must be >= order");
  }
  if (!(box >= 0.0)) throw std::invalid_argument("SplinePriorSpec: box must be >= 0");
  scale_prior.validate();
}

double LogLinearPriorSpec::log_dimension_prior(int J) const {
  if (J < 1 || J > j_max) return kNegInf;
  const double lj = std::log(static_cast<double>(J));
  return -J * std::pow(lj, s);
}

void LogLinearPriorSpec::validate() const {
  if (basis != "fourier") throw std::invalid_argument("LogLinearPriorSpec: unknown basis " + basis);
  if (!(tau0 > 0.0 && p > 0.0)) throw std::invalid_argument("LogLinearPriorSpec: need tau0, p > 0");
  if (!(s == 0.0 || s == 1.0)) throw std::invalid_argument("LogLinearPriorSpec: s must be 0 or 1");
  if (j_max < 1) throw std::invalid_argument("LogLinearPriorSpec: j_max must be >= 1");
  scale_prior.validate();
}

void McmcSettings::validate() const {
  if (iterations <= burn_in || burn_in < 0) {
    throw std::invalid_argument("McmcSettings: need iterations > burn_in >= 0");
  }
  if (stride < 1) throw std::invalid_argument("McmcSettings: stride must be >= 1");
  if (!(initial_step > 0.0)) throw std::invalid_argument("McmcSettings: initial_step must be > 0");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) {
    throw std::invalid_argument("McmcSettings: target acceptance must lie in (0, 1)");
  }
}

std::vector<double> stick_weights(std::span<const double> sticks) {
  std::vector<double> w;
  w.reserve(sticks.size() + 1);
  double rest = 1.0;
  for (double v : sticks) {
    w.push_back(rest * v);
    rest *= 1.0 - v;
  }
  w.push_back(rest);
  return w;
}

// ------------------------------------------------------------------ DPM

DpmSampler::DpmSampler(const CountingRecord& record, const DpmPriorSpec& spec, Domain domain,
                       double initial_step)
    : spec_(spec),
      domain_(domain),
      theta_max_(spec.base_max > 0.0 ? spec.base_max : domain.length()),
      lik_(record, domain),
      stick_step_(static_cast<std::size_t>(spec.truncation - 1), initial_step),
      theta_step_(static_cast<std::size_t>(spec.truncation), initial_step),
      mass_step_(initial_step),
      moves_{{"stick"}, {"theta"}, {"mass"}} {
  spec_.validate();
  moves_[2].gibbs = spec.mass_prior.kind == ScalePrior::Kind::gamma;
}

DpmState DpmSampler::prior_draw(Stream& rng) const {
  const std::size_t L = static_cast<std::size_t>(spec_.truncation);
  DpmState s;
  s.sticks.resize(L - 1);
  for (auto& v : s.sticks) v = 1.0 - std::pow(rng.uniform_open(), 1.0 / spec_.concentration);
  s.theta.resize(L);
  const double shape = spec_.base_exponent + 1.0;
  const double top = boost::math::gamma_p(shape, theta_max_);
  for (auto& t : s.theta) {
    t = boost::math::gamma_p_inv(shape, rng.uniform_open() * top);
    t = std::clamp(t, std::numeric_limits<double>::min(), theta_max_);
  }
  s.mass = spec_.mass_prior.sample(rng);
  return s;
}

IntensityModel DpmSampler::intensity(const DpmState& s) const {
  const auto w = stick_weights(s.sticks);
  std::vector<MixtureAtom> atoms(w.size());
  for (std::size_t l = 0; l < w.size(); ++l) atoms[l] = {s.theta[l], w[l]};
  return IntensityModel(UniformMixture(std::move(atoms), s.mass), domain_);
}

double DpmSampler::log_likelihood(const DpmState& s) const {
  const auto w = stick_weights(s.sticks);
  std::vector<MixtureAtom> atoms(w.size());
  for (std::size_t l = 0; l < w.size(); ++l) atoms[l] = {s.theta[l], w[l]};
  return lik_(atoms, s.mass).value;
}

void DpmSampler::sweep(DpmState& s, Stream& rng, int adapt_round, double target) {
  const double A = spec_.concentration;
  const double a = spec_.base_exponent;
  double ll = log_likelihood(s);

  for (std::size_t l = 0; l < s.sticks.size(); ++l) {
    const double v = s.sticks[l];
    const double vp = logistic(std::log(v / (1.0 - v)) + stick_step_[l] * rng.normal());
    bool ok = false;
    if (vp > 0.0 && vp < 1.0) {
      s.sticks[l] = vp;
      const double llp = log_likelihood(s);
      const double lr = llp - ll + (A - 1.0) * (std::log1p(-vp) - std::log1p(-v)) +
                        std::log(vp) + std::log1p(-vp) - std::log(v) - std::log1p(-v);
      ok = accept(lr, llp, ll, rng);
      if (ok) {
        ll = llp;
      } else {
        s.sticks[l] = v;
      }
    }
    tally(moves_[0], ok);
    adapt(stick_step_[l], ok, adapt_round, target);
  }

  for (std::size_t l = 0; l < s.theta.size(); ++l) {
    const double t = s.theta[l];
    const double tp = t * std::exp(theta_step_[l] * rng.normal());
    bool ok = false;
    if (tp > 0.0 && tp <= theta_max_) {
      s.theta[l] = tp;
      const double llp = log_likelihood(s);
      const double lr = llp - ll + (a + 1.0) * (std::log(tp) - std::log(t)) - (tp - t);
      ok = accept(lr, llp, ll, rng);
      if (ok) {
        ll = llp;
      } else {
        s.theta[l] = t;
      }
    }
    tally(moves_[1], ok);
    adapt(theta_step_[l], ok, adapt_round, target);
  }

  // λ = M λ̄, so ℓ = N log M - M ∫λ̄Y + const.
  const double events = static_cast<double>(lik_.events());
  const auto w = stick_weights(s.sticks);
  std::vector<MixtureAtom> atoms(w.size());
  for (std::size_t l = 0; l < w.size(); ++l) atoms[l] = {s.theta[l], w[l]};
  const double integral = lik_(atoms, 1.0).integral_term;
  if (spec_.mass_prior.kind == ScalePrior::Kind::gamma) {
    s.mass = conjugate_scale(spec_.mass_prior, events, integral, rng);
    tally(moves_[2], true);
  } else {
    const double m = s.mass;
    const double mp = m * std::exp(mass_step_ * rng.normal());
    const double lr = events * (std::log(mp) - std::log(m)) - (mp - m) * integral +
                      spec_.mass_prior.log_density(mp) - spec_.mass_prior.log_density(m) +
                      std::log(mp) - std::log(m);
    const bool ok = std::log(rng.uniform_open()) < lr;
    if (ok) s.mass = mp;
    tally(moves_[2], ok);
    adapt(mass_step_, ok, adapt_round, target);
  }
}

// ----------------------------------------------------------- log-spline

LogSplineSampler::LogSplineSampler(const CountingRecord& record, const SplinePriorSpec& spec,
                                   SplineBasis basis, Domain domain, double initial_step)
    : spec_(spec),
      basis_(std::move(basis)),
      domain_(domain),
      theta_step_(static_cast<std::size_t>(basis_.dimension()), initial_step),
      shift_step_(initial_step),
      scale_step_(initial_step),
      moves_{{"coefficient"}, {"shift"}, {"scale"}} {
  spec_.validate();
  moves_[2].gibbs = spec.scale_prior.kind == ScalePrior::Kind::gamma;
  const int q = basis_.order();
  const std::size_t J = static_cast<std::size_t>(basis_.dimension());
  const double len = domain.length();
  std::vector<double> vals(static_cast<std::size_t>(q));

  suff_.assign(J, 0.0);
  outside_ = !all_in_domain(record.events(), domain);
  events_ = static_cast<double>(record.count());
  for (double t : record.events()) {
    if (!domain.contains(t)) continue;
    const int f = basis_.evaluate_nonzero((t - domain.lo) / len, vals);
    for (int i = 0; i < q; ++i) suff_[static_cast<std::size_t>(f + i)] += vals[static_cast<std::size_t>(i)];
  }

  std::vector<double> breaks;
  for (double b : basis_.breakpoints()) breaks.push_back(domain.lo + b * len);
  const ExposureQuadrature quad(record.exposure(), domain, breaks, 1);
  const auto nodes = quad.nodes();
  weight_.assign(quad.weights().begin(), quad.weights().end());
  first_.resize(nodes.size());
  basis_vals_.resize(nodes.size() * static_cast<std::size_t>(q));
  support_.assign(J, {});
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    std::span<double> out(basis_vals_.data() + k * static_cast<std::size_t>(q),
                          static_cast<std::size_t>(q));
    first_[k] = basis_.evaluate_nonzero((nodes[k] - domain.lo) / len, out);
    for (int i = 0; i < q; ++i) support_[static_cast<std::size_t>(first_[k] + i)].push_back(k);
  }
  eta_.assign(nodes.size(), 0.0);
}

SplineState LogSplineSampler::prior_draw(Stream& rng) const {
  SplineState s;
  s.theta.resize(static_cast<std::size_t>(basis_.dimension()));
  for (auto& t : s.theta) t = spec_.box * (2.0 * rng.uniform() - 1.0);
  s.scale = spec_.scale_prior.sample(rng);
  return s;
}

IntensityModel LogSplineSampler::intensity(const SplineState& s) const {
  return IntensityModel(LogSpline{basis_, s.theta, s.scale}, domain_);
}

void LogSplineSampler::refresh(const SplineState& s) {
  const std::size_t q = static_cast<std::size_t>(basis_.order());
  for (std::size_t k = 0; k < eta_.size(); ++k) {
    double e = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      e += s.theta[static_cast<std::size_t>(first_[k]) + i] * basis_vals_[k * q + i];
    }
    eta_[k] = e;
  }
}

double LogSplineSampler::log_likelihood(const SplineState& s) const {
  if (outside_) return kNegInf;
  const std::size_t q = static_cast<std::size_t>(basis_.order());
  double integral = 0.0;
  for (std::size_t k = 0; k < weight_.size(); ++k) {
    double e = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      e += s.theta[static_cast<std::size_t>(first_[k]) + i] * basis_vals_[k * q + i];
    }
    integral += weight_[k] * std::exp(e);
  }
  const double linear = std::inner_product(s.theta.begin(), s.theta.end(), suff_.begin(), 0.0);
  return events_ * std::log(s.scale) + linear - s.scale * integral;
}

void LogSplineSampler::sweep(SplineState& s, Stream& rng, int adapt_round, double target) {
  if (s.theta.size() != suff_.size()) {
    throw std::invalid_argument("LogSplineSampler: state dimension mismatch");
  }
  refresh(s);
  const std::size_t q = static_cast<std::size_t>(basis_.order());
  double E = 0.0;
  for (std::size_t k = 0; k < eta_.size(); ++k) E += weight_[k] * std::exp(eta_[k]);
  const double box = spec_.box;

  if (box > 0.0) {
    for (std::size_t j = 0; j < s.theta.size(); ++j) {
      const double d = theta_step_[j] * rng.normal();
      const double tp = s.theta[j] + d;
      bool ok = false;
      if (std::abs(tp) <= box) {
        double dE = 0.0;
        for (std::size_t k : support_[j]) {
          const double b = basis_vals_[k * q + (j - static_cast<std::size_t>(first_[k]))];
          dE += weight_[k] * std::exp(eta_[k]) * std::expm1(d * b);
        }
        const double lr = d * suff_[j] - s.scale * dE;
        ok = !outside_ && (lr >= 0.0 || std::log(rng.uniform_open()) < lr);
        if (ok) {
          s.theta[j] = tp;
          for (std::size_t k : support_[j]) {
            eta_[k] += d * basis_vals_[k * q + (j - static_cast<std::size_t>(first_[k]))];
          }
          E += dE;
        }
      }
      tally(moves_[0], ok);
      adapt(theta_step_[j], ok, adapt_round, target);
    }

    // θ + δ1 with A e^{-δ} leaves λ unchanged because the basis sums to one.
    const double d = shift_step_ * rng.normal();
    const double ap = s.scale * std::exp(-d);
    bool ok = std::all_of(s.theta.begin(), s.theta.end(),
                          [&](double t) { return std::abs(t + d) <= box; });
    if (ok) {
      const double lr = spec_.scale_prior.log_density(ap) - spec_.scale_prior.log_density(s.scale) +
                        std::log(ap) - std::log(s.scale);
      ok = lr >= 0.0 || std::log(rng.uniform_open()) < lr;
      if (ok) {
        for (auto& t : s.theta) t += d;
        for (auto& e : eta_) e += d;
        E *= std::exp(d);
        s.scale = ap;
      }
    }
    tally(moves_[1], ok);
    adapt(shift_step_, ok, adapt_round, target);
  }

  if (spec_.scale_prior.kind == ScalePrior::Kind::gamma) {
    s.scale = conjugate_scale(spec_.scale_prior, events_, E, rng);
    tally(moves_[2], true);
  } else {
    const double a = s.scale;
    const double ap = a * std::exp(scale_step_ * rng.normal());
    const double lr = events_ * (std::log(ap) - std::log(a)) - (ap - a) * E +
                      spec_.scale_prior.log_density(ap) - spec_.scale_prior.log_density(a) +
                      std::log(ap) - std::log(a);
    const bool ok = std::log(rng.uniform_open()) < lr;
    if (ok) s.scale = ap;
    tally(moves_[2], ok);
    adapt(scale_step_, ok, adapt_round, target);
  }
}

// ----------------------------------------------------------- log-linear

LogLinearSampler::LogLinearSampler(const CountingRecord& record, const LogLinearPriorSpec& spec,
                                   Domain domain, double initial_step)
    : spec_(spec),
      domain_(domain),
      theta_step_(static_cast<std::size_t>(spec.j_max), initial_step),
      scale_step_(initial_step),
      moves_{{"coefficient"}, {"birth_death"}, {"scale"}} {
  spec_.validate();
  moves_[2].gibbs = spec.scale_prior.kind == ScalePrior::Kind::gamma;
  const std::size_t jm = static_cast<std::size_t>(spec.j_max);
  const double len = domain.length();
  suff_.assign(jm, 0.0);
  outside_ = !all_in_domain(record.events(), domain);
  events_ = static_cast<double>(record.count());
  for (double t : record.events()) {
    if (!domain.contains(t)) continue;
    for (std::size_t j = 0; j < jm; ++j) {
      suff_[j] += fourier_basis(static_cast<int>(j) + 1, (t - domain.lo) / len);
    }
  }
  const ExposureQuadrature quad(record.exposure(), domain, {}, std::max(16, 4 * spec.j_max));
  weight_.assign(quad.weights().begin(), quad.weights().end());
  phi_.resize(weight_.size() * jm);
  for (std::size_t k = 0; k < weight_.size(); ++k) {
    const double x = (quad.nodes()[k] - domain.lo) / len;
    for (std::size_t j = 0; j < jm; ++j) phi_[k * jm + j] = fourier_basis(static_cast<int>(j) + 1, x);
  }
  eta_.assign(weight_.size(), 0.0);
}

double LogLinearSampler::log_coef_prior(int j, double v) const {
  return -std::pow(std::abs(v / spec_.coefficient_scale(j)), spec_.p) / spec_.p;
}

double LogLinearSampler::draw_coef(int j, Stream& rng) const {
  // |z|^p / p ~ Gamma(1/p, 1).
  const double z = std::pow(spec_.p * rng.gamma(1.0 / spec_.p, 1.0), 1.0 / spec_.p);
  return spec_.coefficient_scale(j) * (rng.uniform() < 0.5 ? -z : z);
}

LogLinearState LogLinearSampler::prior_draw(Stream& rng) const {
  std::vector<double> logp(static_cast<std::size_t>(spec_.j_max));
  for (int J = 1; J <= spec_.j_max; ++J) logp[static_cast<std::size_t>(J - 1)] = spec_.log_dimension_prior(J);
  const double top = *std::max_element(logp.begin(), logp.end());
  double total = 0.0;
  for (auto& v : logp) total += (v = std::exp(v - top));
  double u = rng.uniform() * total;
  int J = 1;
  while (J < spec_.j_max && u >= logp[static_cast<std::size_t>(J - 1)]) u -= logp[static_cast<std::size_t>(J++ - 1)];
  LogLinearState s;
  for (int j = 1; j <= J; ++j) s.theta.push_back(draw_coef(j, rng));
  s.scale = spec_.scale_prior.sample(rng);
  return s;
}

IntensityModel LogLinearSampler::intensity(const LogLinearState& s) const {
  return IntensityModel(LogLinear{spec_.basis, s.theta, s.scale}, domain_);
}

double LogLinearSampler::integral(std::span<const double> eta) const {
  double e = 0.0;
  for (std::size_t k = 0; k < eta.size(); ++k) e += weight_[k] * std::exp(eta[k]);
  return e;
}

double LogLinearSampler::log_likelihood(const LogLinearState& s) const {
  if (outside_) return kNegInf;
  const std::size_t jm = static_cast<std::size_t>(spec_.j_max);
  double I = 0.0;
  for (std::size_t k = 0; k < weight_.size(); ++k) {
    double e = 0.0;
    for (std::size_t j = 0; j < s.theta.size(); ++j) e += s.theta[j] * phi_[k * jm + j];
    I += weight_[k] * std::exp(e);
  }
  const double linear = std::inner_product(s.theta.begin(), s.theta.end(), suff_.begin(), 0.0);
  return events_ * std::log(s.scale) + linear - s.scale * I;
}

void LogLinearSampler::sweep(LogLinearState& s, Stream& rng, int adapt_round, double target) {
  const std::size_t jm = static_cast<std::size_t>(spec_.j_max);
  if (s.theta.empty() || s.theta.size() > jm) {
    throw std::invalid_argument("LogLinearSampler: state dimension outside 1..j_max");
  }
  for (std::size_t k = 0; k < eta_.size(); ++k) {
    double e = 0.0;
    for (std::size_t j = 0; j < s.theta.size(); ++j) e += s.theta[j] * phi_[k * jm + j];
    eta_[k] = e;
  }
  double E = integral(eta_);
  std::vector<double> trial(eta_.size());
  const auto shifted = [&](std::size_t j, double d) {
    for (std::size_t k = 0; k < eta_.size(); ++k) trial[k] = eta_[k] + d * phi_[k * jm + j];
    return integral(trial);
  };

  for (std::size_t j = 0; j < s.theta.size(); ++j) {
    const double d = theta_step_[j] * rng.normal();
    const double Ep = shifted(j, d);
    const int idx = static_cast<int>(j) + 1;
    const double lr = d * suff_[j] - s.scale * (Ep - E) + log_coef_prior(idx, s.theta[j] + d) -
                      log_coef_prior(idx, s.theta[j]);
    const bool ok = !outside_ && (lr >= 0.0 || std::log(rng.uniform_open()) < lr);
    if (ok) {
      s.theta[j] += d;
      eta_.swap(trial);
      E = Ep;
    }
    tally(moves_[0], ok);
    adapt(theta_step_[j], ok, adapt_round, target);
  }

  // Birth or death of the last coefficient, each chosen with probability 1/2;
  // births draw from the prior so the coefficient density cancels.
  const int J = static_cast<int>(s.theta.size());
  const bool birth = rng.uniform() < 0.5;
  bool ok = false;
  if (birth && J < spec_.j_max) {
    const double v = draw_coef(J + 1, rng);
    const double Ep = shifted(static_cast<std::size_t>(J), v);
    const double lr = v * suff_[static_cast<std::size_t>(J)] - s.scale * (Ep - E) +
                      spec_.log_dimension_prior(J + 1) - spec_.log_dimension_prior(J);
    ok = !outside_ && (lr >= 0.0 || std::log(rng.uniform_open()) < lr);
    if (ok) {
      s.theta.push_back(v);
      eta_.swap(trial);
      E = Ep;
    }
    tally(moves_[1], ok);
  } else if (!birth && J > 1) {
    const double v = s.theta.back();
    const double Ep = shifted(static_cast<std::size_t>(J - 1), -v);
    const double lr = -v * suff_[static_cast<std::size_t>(J - 1)] - s.scale * (Ep - E) +
                      spec_.log_dimension_prior(J - 1) - spec_.log_dimension_prior(J);
    ok = !outside_ && (lr >= 0.0 || std::log(rng.uniform_open()) < lr);
    if (ok) {
      s.theta.pop_back();
      eta_.swap(trial);
      E = Ep;
    }
    tally(moves_[1], ok);
  }

  if (spec_.scale_prior.kind == ScalePrior::Kind::gamma) {
    s.scale = conjugate_scale(spec_.scale_prior, events_, E, rng);
    tally(moves_[2], true);
  } else {
    const double a = s.scale;
    const double ap = a * std::exp(scale_step_ * rng.normal());
    const double lr = events_ * (std::log(ap) - std::log(a)) - (ap - a) * E +
                      spec_.scale_prior.log_density(ap) - spec_.scale_prior.log_density(a) +
                      std::log(ap) - std::log(a);
    const bool acc = std::log(rng.uniform_open()) < lr;
    if (acc) s.scale = ap;
    tally(moves_[2], acc);
    adapt(scale_step_, acc, adapt_round, target);
  }
}

// ---------------------------------------------------------------- drivers

namespace {

CountingRecord empty_record(Domain d) {
  CountingRecord::Fields f;
  f.model = "prior";
  f.horizon = d.hi;
  return CountingRecord(std::move(f));
}

}  // namespace

IntensityModel sample_prior(const DpmPriorSpec& spec, Domain domain, std::uint64_t seed) {
  Stream rng(seed);
  const DpmSampler s(empty_record(domain), spec, domain);
  return s.intensity(s.prior_draw(rng));
}

IntensityModel sample_prior(const SplinePriorSpec& spec, int n, Domain domain, std::uint64_t seed) {
  Stream rng(seed);
  const LogSplineSampler s(empty_record(domain), spec, spec.basis_for(n), domain);
  return s.intensity(s.prior_draw(rng));
}

IntensityModel sample_prior(const LogLinearPriorSpec& spec, Domain domain, std::uint64_t seed) {
  Stream rng(seed);
  const LogLinearSampler s(empty_record(domain), spec, domain);
  return s.intensity(s.prior_draw(rng));
}

PosteriorChain fit_dpm(const CountingRecord& record, const DpmPriorSpec& spec,
                       const McmcSettings& mcmc, std::uint64_t seed, std::optional<Domain> domain) {
  mcmc.validate();
  const Domain d = default_domain(record, domain);
  Stream rng(seed);
  DpmSampler sampler(record, spec, d, mcmc.initial_step);
  DpmState state = sampler.prior_draw(rng);
  // Start with support covering every event so the likelihood is finite.
  if (record.count() > 0) {
    const double last = record.events().back() - d.lo;
    if (*std::max_element(state.theta.begin(), state.theta.end()) <= last) {
      const auto w = stick_weights(state.sticks);
      const auto heavy = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
      state.theta[heavy] = sampler.theta_max();
    }
  }
  return run_chain(sampler, std::move(state), mcmc, seed, rng);
}

PosteriorChain fit_logspline(const CountingRecord& record, const SplinePriorSpec& spec,
                             const McmcSettings& mcmc, std::uint64_t seed,
                             std::optional<Domain> domain) {
  mcmc.validate();
  const Domain d = default_domain(record, domain);
  Stream rng(seed);
  LogSplineSampler sampler(record, spec, spec.basis_for(record.n()), d, mcmc.initial_step);
  SplineState state = sampler.prior_draw(rng);
  return run_chain(sampler, std::move(state), mcmc, seed, rng);
}

PosteriorChain fit_loglinear(const CountingRecord& record, const LogLinearPriorSpec& spec,
                             const McmcSettings& mcmc, std::uint64_t seed,
                             std::optional<Domain> domain) {
  mcmc.validate();
  const Domain d = default_domain(record, domain);
  Stream rng(seed);
  LogLinearSampler sampler(record, spec, d, mcmc.initial_step);
  LogLinearState state = sampler.prior_draw(rng);
  return run_chain(sampler, std::move(state), mcmc, seed, rng);
}

double mass_outside(std::span<const double> l1_errors, double radius) {
  if (l1_errors.empty()) return 0.0;
  const auto c = std::count_if(l1_errors.begin(), l1_errors.end(),
                               [&](double e) { return e > radius; });
  return static_cast<double>(c) / static_cast<double>(l1_errors.size());
}

PosteriorSummary posterior_bands(const PosteriorChain& chain) {
  if (chain.draws.empty()) throw std::invalid_argument("posterior_bands: empty chain");
  PosteriorSummary s;
  const Domain dom = chain.draws.front().domain();
  std::vector<double> column(chain.draws.size());
  for (int i = 0; i < kBandGrid; ++i) {
    const double t = dom.lo + dom.length() * i / (kBandGrid - 1);
    for (std::size_t k = 0; k < chain.draws.size(); ++k) column[k] = chain.draws[k](t);
    s.grid.push_back(t);
    s.mean.push_back(stats::mean(column));
    s.lower.push_back(stats::quantile(column, 0.05));
    s.upper.push_back(stats::quantile(column, 0.95));
  }
  return s;
}

PosteriorSummary posterior_summary(const PosteriorChain& chain, const IntensityModel& lambda0,
                                   double radius) {
  PosteriorSummary s = posterior_bands(chain);
  s.l1_errors.reserve(chain.draws.size());
  for (const auto& d : chain.draws) s.l1_errors.push_back(l1_distance(d, lambda0));
  s.mean_l1_error = stats::mean(s.l1_errors);
  s.median_l1_error = stats::median(s.l1_errors);
  s.mass_outside_radius = mass_outside(s.l1_errors, radius);
  return s;
}

}  // namespace aalen
