#include "aalen/processes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "aalen/io.hpp"
#include "aalen/quadrature.hpp"
#include "aalen/random.hpp"

namespace aalen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> uniform_grid(Domain d, int points) {
  std::vector<double> g(static_cast<std::size_t>(points) + 1);
  for (int i = 0; i <= points; ++i) {
    g[static_cast<std::size_t>(i)] = d.lo + d.length() * static_cast<double>(i) / points;
  }
  return g;
}

/// Step function from per-unit contributions `weight` on (start, end].
StepFunction build_exposure(std::vector<std::pair<double, double>> deltas, double horizon) {
  // deltas: (time, change applying for t > time); changes at the same time merge.
  std::sort(deltas.begin(), deltas.end());
  std::vector<double> breaks{0.0};
  std::vector<double> values;
  double level = 0.0;
  std::size_t i = 0;
  // Changes at time 0 set the initial level.
  while (i < deltas.size() && deltas[i].first <= 0.0) level += deltas[i++].second;
  double current = level;
  while (i < deltas.size()) {
    const double t = std::min(deltas[i].first, horizon);
    double change = 0.0;
    while (i < deltas.size() && std::min(deltas[i].first, horizon) == t) change += deltas[i++].second;
    if (change == 0.0) continue;
    if (t >= horizon) break;
    breaks.push_back(t);
    values.push_back(std::round(current));
    current += change;
  }
  breaks.push_back(horizon);
  values.push_back(std::round(std::max(current, 0.0)));
  return StepFunction(std::move(breaks), std::move(values));
}

double thinning_bound(const IntensityModel& lambda, std::optional<double> supplied) {
  if (supplied) {
    const double b = *supplied;
    if (!std::isfinite(b) || b < 0.0) {
      throw std::invalid_argument("simulate: lambda_max must be finite and >= 0");
    }
    const Domain d = lambda.domain();
    double grid_sup = 0.0;
    for (double t : uniform_grid(d, kEnvironmentGrid)) grid_sup = std::max(grid_sup, lambda(t));
    for (double t : lambda.breakpoints()) grid_sup = std::max(grid_sup, lambda(t));
    if (b < grid_sup) {
      throw std::invalid_argument("simulate: lambda_max " + std::to_string(b) +
                                  " is below sup lambda0 = " + std::to_string(grid_sup));
    }
    return b;
  }
  const double b = lambda.sup_bound();
  if (!std::isfinite(b)) {
    throw std::invalid_argument(
        "simulate: intensity has no finite upper bound; supply lambda_max");
  }
  return b;
}

/// Next accepted point after `t` of a process with intensity `lambda` on
/// [t, end], or +inf.
double next_event(const IntensityModel& lambda, double bound, double t, double end, Stream& rng) {
  if (bound <= 0.0) return kInf;
  while (true) {
    t += rng.exponential(bound);
    if (t > end) return kInf;
    const double v = lambda(t);
    if (v > bound * (1.0 + 1e-12)) {
      throw std::domain_error("simulate: dominating constant violated at t = " +
                              std::to_string(t));
    }
    if (rng.uniform() * bound < v) return t;
  }
}

/// First jump time of a unit-exposure process with hazard λ on [0, T], by
/// inverting the cumulative hazard.
double invert_cumulative(const IntensityModel& hazard, double horizon, Stream& rng) {
  const double e = rng.exponential(1.0);
  if (hazard.integral(0.0, horizon) < e) return kInf;
  double lo = 0.0;
  double hi = horizon;
  for (int it = 0; it < 100 && hi - lo > 1e-14 * horizon; ++it) {
    const double mid = 0.5 * (lo + hi);
    (hazard.integral(0.0, mid) < e ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

CountingRecord::Fields poisson_fields(const IntensityModel& lambda0, const ModelEnvironment& env,
                                      std::uint64_t seed, std::optional<double> lambda_max) {
  const double bound = thinning_bound(lambda0, lambda_max);
  Stream rng(seed);
  CountingRecord::Fields f;
  f.model = "poisson";
  f.n = env.n;
  f.horizon = env.horizon;
  f.seed = seed;
  const double rate = bound * env.n;
  double t = env.omega.lo;
  while (rate > 0.0) {
    t += rng.exponential(rate);
    if (t > env.omega.hi) break;
    const double v = lambda0(t);
    if (v > bound * (1.0 + 1e-12)) {
      throw std::domain_error("simulate_poisson: dominating constant violated");
    }
    if (rng.uniform() * bound < v) f.events.push_back(t);
  }
  std::vector<std::pair<double, double>> deltas{{env.omega.lo, env.n}, {env.omega.hi, -env.n}};
  if (env.omega.lo > 0.0) {
    // Exposure starts strictly after 0.
    f.exposure = StepFunction({0.0, env.omega.lo, env.omega.hi, env.horizon},
                              {0.0, static_cast<double>(env.n), 0.0});
    if (env.omega.hi >= env.horizon) {
      f.exposure = StepFunction({0.0, env.omega.lo, env.horizon}, {0.0, static_cast<double>(env.n)});
    }
  } else {
    f.exposure = build_exposure(std::move(deltas), env.horizon);
  }
  return f;
}

CountingRecord::Fields censoring_fields(const IntensityModel& hazard, const CensoringSpec& censoring,
                                        int n, double horizon, std::uint64_t seed) {
  if (n <= 0) throw std::invalid_argument("simulate_censoring: n must be > 0");
  if (!std::isfinite(hazard.integral(0.0, horizon))) {
    throw std::invalid_argument("simulate_censoring: hazard has non-finite integral on [0, T]");
  }
  if (censoring.kind != CensoringKind::none &&
      !(censoring.value >= 0.0 && std::isfinite(censoring.value))) {
    throw std::invalid_argument("simulate_censoring: invalid censoring parameter");
  }
  const double bound = hazard.sup_bound();
  CountingRecord::Fields f;
  f.model = "censoring";
  f.n = n;
  f.horizon = horizon;
  f.seed = seed;
  f.audit.reserve(static_cast<std::size_t>(n));
  std::vector<std::pair<double, double>> deltas;
  deltas.reserve(static_cast<std::size_t>(n) + 1);
  deltas.emplace_back(0.0, static_cast<double>(n));
  int at_zero = 0;
  for (int i = 0; i < n; ++i) {
    Stream rng(seed, static_cast<std::uint64_t>(i));
    const double x = std::isfinite(bound) ? next_event(hazard, bound, 0.0, horizon, rng)
                                          : invert_cumulative(hazard, horizon, rng);
    double c = kInf;
    switch (censoring.kind) {
      case CensoringKind::none:
        break;
      case CensoringKind::fixed:
        c = censoring.value;
        break;
      case CensoringKind::exponential:
        c = censoring.value > 0.0 ? rng.exponential(censoring.value) : kInf;
        break;
    }
    const bool delta = x <= c && x <= horizon;
    const double z = std::min({x, c, horizon});
    f.audit.push_back({z, delta});
    if (delta) f.events.push_back(z);
    if (z <= 0.0) ++at_zero;
    deltas.emplace_back(z, -1.0);
  }
  std::sort(f.events.begin(), f.events.end());
  StepFunction y = build_exposure(std::move(deltas), horizon);
  if (at_zero > 0) {
    // Units with Z = 0 are at risk at t = 0 only; keep Y_0 = n with a
    // zero-width leading step.
    std::vector<double> b{0.0};
    std::vector<double> v{static_cast<double>(n)};
    b.insert(b.end(), y.breaks().begin(), y.breaks().end());
    v.insert(v.end(), y.values().begin(), y.values().end());
    y = StepFunction(std::move(b), std::move(v));
  }
  f.exposure = std::move(y);
  return f;
}

CountingRecord::Fields markov_fields(const MarkovSpec& spec, int n, double horizon,
                                     std::span<const Transition> target, std::uint64_t seed) {
  spec.validate();
  if (n <= 0) throw std::invalid_argument("simulate_markov: n must be > 0");
  if (target.empty()) throw std::invalid_argument("simulate_markov: empty target set");
  const std::size_t S = spec.states.size();

  std::vector<std::vector<std::size_t>> out(S);  // rate indices leaving each state
  for (std::size_t r = 0; r < spec.rates.size(); ++r) {
    out[spec.state_index(spec.rates[r].transition.from)].push_back(r);
  }
  std::vector<double> multiplicity(S, 0.0);
  std::vector<bool> is_target(spec.rates.size(), false);
  const IntensityModel* common = nullptr;
  for (const auto& tr : target) {
    spec.state_index(tr.from);
    spec.state_index(tr.to);
    bool found = false;
    for (std::size_t r = 0; r < spec.rates.size(); ++r) {
      if (spec.rates[r].transition == tr) {
        if (common && !(spec.rates[r].intensity == *common)) {
          throw std::invalid_argument("simulate_markov: pooled target transitions must share one intensity");
        }
        common = &spec.rates[r].intensity;
        is_target[r] = true;
        found = true;
      }
    }
    if (!found) {
      throw std::invalid_argument("simulate_markov: target transition " + tr.from + "->" + tr.to +
                                  " has no rate");
    }
    multiplicity[spec.state_index(tr.from)] += 1.0;
  }
  std::vector<double> bound(S, 0.0);
  for (std::size_t h = 0; h < S; ++h) {
    for (std::size_t r : out[h]) bound[h] += spec.rates[r].intensity.sup_bound();
    if (!std::isfinite(bound[h])) {
      throw std::invalid_argument("simulate_markov: transition intensities must be bounded");
    }
  }

  CountingRecord::Fields f;
  f.model = "markov";
  f.n = n;
  f.horizon = horizon;
  f.seed = seed;
  std::vector<std::pair<double, std::string>> events;
  std::vector<std::pair<double, double>> deltas;
  std::vector<double> cumulative_initial(S);
  std::partial_sum(spec.initial.begin(), spec.initial.end(), cumulative_initial.begin());

  for (int i = 0; i < n; ++i) {
    Stream rng(seed, static_cast<std::uint64_t>(i));
    const double u0 = rng.uniform() * cumulative_initial.back();
    std::size_t h = static_cast<std::size_t>(
        std::upper_bound(cumulative_initial.begin(), cumulative_initial.end(), u0) -
        cumulative_initial.begin());
    h = std::min(h, S - 1);
    double t = 0.0;
    double entered = 0.0;
    while (true) {
      const double R = bound[h];
      if (R <= 0.0) break;
      t += rng.exponential(R);
      if (t > horizon) break;
      double total = 0.0;
      std::vector<double> rates(out[h].size());
      for (std::size_t k = 0; k < out[h].size(); ++k) {
        rates[k] = spec.rates[out[h][k]].intensity(t);
        total += rates[k];
      }
      if (total > R * (1.0 + 1e-12)) {
        throw std::domain_error("simulate_markov: dominating constant violated");
      }
      double u = rng.uniform() * R;
      if (u >= total) continue;
      std::size_t k = 0;
      while (k + 1 < rates.size() && u >= rates[k]) u -= rates[k++];
      const std::size_t r = out[h][k];
      if (is_target[r]) {
        events.emplace_back(t, spec.rates[r].transition.from + "->" + spec.rates[r].transition.to);
      }
      if (multiplicity[h] > 0.0) {
        deltas.emplace_back(entered, multiplicity[h]);
        deltas.emplace_back(t, -multiplicity[h]);
      }
      h = spec.state_index(spec.rates[r].transition.to);
      entered = t;
    }
    if (multiplicity[h] > 0.0) {
      deltas.emplace_back(entered, multiplicity[h]);
      deltas.emplace_back(horizon, -multiplicity[h]);
    }
  }
  std::sort(events.begin(), events.end());
  for (auto& [t, m] : events) {
    f.events.push_back(t);
    f.marks.push_back(std::move(m));
  }
  f.exposure = build_exposure(std::move(deltas), horizon);
  // Pooling several targets out of one state counts each copy once per target.
  f.n = n * static_cast<int>(*std::max_element(multiplicity.begin(), multiplicity.end()));
  return f;
}

double integral_squared_gap(const CountingRecord& record, const ModelEnvironment& env) {
  const auto& y = record.exposure();
  const auto breaks = y.breaks();
  const auto values = y.values();
  double s = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double a = std::max(breaks[k], env.omega.lo);
    const double b = std::min(breaks[k + 1], env.omega.hi);
    if (!(b > a)) continue;
    const double yk = values[k];
    const auto cuts = quadrature::partition(a, b, env.mu_breaks, 1);
    s += quadrature::integrate(
        [&](double t) {
          const double d = yk - env.mu(t);
          return d * d;
        },
        cuts);
  }
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------

void ModelEnvironment::validate() const {
  if (!(gamma_alpha > 0.0 && gamma_alpha < 1.0)) {
    throw std::invalid_argument("ModelEnvironment: alpha must lie in (0, 1)");
  }
  if (!(m1 > 0.0 && m2 >= m1)) {
    throw std::invalid_argument("ModelEnvironment: need 0 < m1 <= m2");
  }
  if (!mu_tilde) throw std::invalid_argument("ModelEnvironment: mu_tilde missing");
  for (double t : uniform_grid(omega, kEnvironmentGrid)) {
    const double m = mu_tilde(t);
    if (m < m1 * (1.0 - 1e-12) || m > m2 * (1.0 + 1e-12)) {
      throw std::invalid_argument("ModelEnvironment: mu_tilde(" + std::to_string(t) + ") = " +
                                  std::to_string(m) + " outside [m1, m2]");
    }
  }
}

double CensoringSpec::survival_left(double t) const {
  switch (kind) {
    case CensoringKind::none:
      return 1.0;
    case CensoringKind::fixed:
      return t <= value ? 1.0 : 0.0;
    case CensoringKind::exponential:
      return std::exp(-value * std::max(t, 0.0));
  }
  return 1.0;
}

std::size_t MarkovSpec::state_index(const std::string& label) const {
  const auto it = std::find(states.begin(), states.end(), label);
  if (it == states.end()) throw std::invalid_argument("MarkovSpec: unknown state '" + label + "'");
  return static_cast<std::size_t>(it - states.begin());
}

void MarkovSpec::validate() const {
  if (states.empty()) throw std::invalid_argument("MarkovSpec: no states");
  if (initial.size() != states.size()) {
    throw std::invalid_argument("MarkovSpec: initial distribution size mismatch");
  }
  double total = 0.0;
  for (double p : initial) {
    if (!(p >= 0.0)) throw std::invalid_argument("MarkovSpec: negative initial probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("MarkovSpec: initial distribution must sum to 1");
  }
  for (const auto& r : rates) {
    state_index(r.transition.from);
    state_index(r.transition.to);
    if (r.transition.from == r.transition.to) {
      throw std::invalid_argument("MarkovSpec: self-transition " + r.transition.from);
    }
  }
}

std::string_view model_name(const ModelSpec& spec) {
  static constexpr std::array<std::string_view, 3> names{"poisson", "censoring", "markov"};
  return names[spec.index()];
}

int model_n(const ModelSpec& spec) {
  return std::visit([](const auto& m) { return m.n; }, spec);
}

double model_horizon(const ModelSpec& spec) {
  return std::visit([](const auto& m) { return m.horizon; }, spec);
}

ModelSpec with_n(ModelSpec spec, int n) {
  std::visit([n](auto& m) { m.n = n; }, spec);
  return spec;
}

const IntensityModel& true_intensity(const ModelSpec& spec) {
  return std::visit(
      [](const auto& m) -> const IntensityModel& {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PoissonModel>) {
          return m.intensity;
        } else if constexpr (std::is_same_v<T, CensoringModel>) {
          return m.hazard;
        } else {
          if (m.target.empty()) throw std::invalid_argument("markov model has no target");
          for (const auto& r : m.spec.rates) {
            if (r.transition == m.target.front()) return r.intensity;
          }
          throw std::invalid_argument("markov target has no rate");
        }
      },
      spec);
}

ModelSpec with_intensity(ModelSpec spec, const IntensityModel& lambda) {
  std::visit(
      [&](auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PoissonModel>) {
          m.intensity = lambda;
        } else if constexpr (std::is_same_v<T, CensoringModel>) {
          m.hazard = lambda;
        } else {
          for (auto& r : m.spec.rates) {
            for (const auto& tr : m.target) {
              if (r.transition == tr) r.intensity = lambda;
            }
          }
        }
      },
      spec);
  return spec;
}

ModelEnvironment poisson_environment(int n, double horizon, Domain omega, double gamma_alpha) {
  if (n <= 0) throw std::invalid_argument("poisson_environment: n must be > 0");
  if (omega.lo < 0.0 || omega.hi > horizon) {
    throw std::invalid_argument("poisson_environment: omega must lie in [0, T]");
  }
  ModelEnvironment env;
  env.omega = omega;
  env.horizon = horizon;
  env.n = n;
  env.m1 = env.m2 = 1.0;
  env.gamma_alpha = gamma_alpha;
  env.mu_tilde = [omega](double t) { return omega.contains(t) ? 1.0 : 0.0; };
  env.mu_breaks = {omega.lo, omega.hi};
  env.validate();
  return env;
}

ModelEnvironment censoring_environment(const IntensityModel& hazard, const CensoringSpec& c, int n,
                                       double horizon, double gamma_alpha) {
  if (n <= 0) throw std::invalid_argument("censoring_environment: n must be > 0");
  double top = horizon;
  if (c.kind == CensoringKind::fixed) top = std::min(top, c.value);
  if (!(top > 0.0)) {
    throw std::invalid_argument("censoring_environment: censoring leaves an empty Ω");
  }
  ModelEnvironment env;
  env.omega = {0.0, top};
  env.horizon = horizon;
  env.n = n;
  env.gamma_alpha = gamma_alpha;
  env.mu_tilde = [hazard, c, top](double t) {
    if (t < 0.0 || t > top) return 0.0;
    return std::exp(-hazard.integral(0.0, t)) * c.survival_left(t);
  };
  env.mu_breaks = hazard.breakpoints();
  env.mu_breaks.push_back(top);
  double lo = kInf;
  double hi = 0.0;
  for (double t : uniform_grid(env.omega, kEnvironmentGrid)) {
    const double m = env.mu_tilde(t);
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  env.m1 = lo;
  env.m2 = hi;
  env.validate();
  return env;
}

std::vector<std::vector<double>> markov_occupancy(const MarkovSpec& spec, double horizon,
                                                  int steps) {
  spec.validate();
  const std::size_t S = spec.states.size();
  std::vector<std::size_t> from(spec.rates.size());
  std::vector<std::size_t> to(spec.rates.size());
  for (std::size_t r = 0; r < spec.rates.size(); ++r) {
    from[r] = spec.state_index(spec.rates[r].transition.from);
    to[r] = spec.state_index(spec.rates[r].transition.to);
  }
  const auto deriv = [&](double t, const std::vector<double>& p) {
    std::vector<double> d(S, 0.0);
    for (std::size_t r = 0; r < spec.rates.size(); ++r) {
      const double flow = p[from[r]] * spec.rates[r].intensity(t);
      d[from[r]] -= flow;
      d[to[r]] += flow;
    }
    return d;
  };
  std::vector<std::vector<double>> grid;
  grid.reserve(static_cast<std::size_t>(steps) + 1);
  std::vector<double> p = spec.initial;
  grid.push_back(p);
  const double h = horizon / steps;
  for (int s = 0; s < steps; ++s) {
    const double t = s * h;
    const auto k1 = deriv(t, p);
    std::vector<double> tmp(S);
    for (std::size_t j = 0; j < S; ++j) tmp[j] = p[j] + 0.5 * h * k1[j];
    const auto k2 = deriv(t + 0.5 * h, tmp);
    for (std::size_t j = 0; j < S; ++j) tmp[j] = p[j] + 0.5 * h * k2[j];
    const auto k3 = deriv(t + 0.5 * h, tmp);
    for (std::size_t j = 0; j < S; ++j) tmp[j] = p[j] + h * k3[j];
    const auto k4 = deriv(t + h, tmp);
    for (std::size_t j = 0; j < S; ++j) {
      p[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    grid.push_back(p);
  }
  return grid;
}

ModelEnvironment markov_environment(const MarkovSpec& spec, std::span<const Transition> target,
                                    int n, double horizon, double gamma_alpha) {
  if (n <= 0) throw std::invalid_argument("markov_environment: n must be > 0");
  const int steps = kEnvironmentGrid;
  const auto occ = markov_occupancy(spec, horizon, steps);
  std::vector<double> curve(occ.size(), 0.0);
  for (const auto& tr : target) {
    const std::size_t h = spec.state_index(tr.from);
    for (std::size_t s = 0; s < occ.size(); ++s) curve[s] += occ[s][h];
  }
  ModelEnvironment env;
  env.omega = {0.0, horizon};
  env.horizon = horizon;
  env.n = n;
  env.gamma_alpha = gamma_alpha;
  env.mu_tilde = [curve, horizon, steps](double t) {
    if (t < 0.0 || t > horizon) return 0.0;
    const double pos = t / horizon * steps;
    const auto i = std::min(static_cast<std::size_t>(pos), static_cast<std::size_t>(steps - 1));
    const double w = pos - static_cast<double>(i);
    return (1.0 - w) * curve[i] + w * curve[i + 1];
  };
  env.m1 = *std::min_element(curve.begin(), curve.end());
  env.m2 = *std::max_element(curve.begin(), curve.end());
  if (!(env.m1 > 0.0)) {
    throw std::invalid_argument("markov_environment: source-state occupancy vanishes on [0, T]");
  }
  env.validate();
  return env;
}

ModelEnvironment environment(const ModelSpec& spec, double gamma_alpha) {
  return std::visit(
      [&](const auto& m) -> ModelEnvironment {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PoissonModel>) {
          return poisson_environment(m.n, m.horizon, m.omega.value_or(Domain{0.0, m.horizon}),
                                     gamma_alpha);
        } else if constexpr (std::is_same_v<T, CensoringModel>) {
          return censoring_environment(m.hazard, m.censoring, m.n, m.horizon, gamma_alpha);
        } else {
          return markov_environment(m.spec, m.target, m.n, m.horizon, gamma_alpha);
        }
      },
      spec);
}

CountingRecord simulate_poisson(const IntensityModel& lambda0, const ModelEnvironment& env,
                                std::uint64_t seed, std::optional<double> lambda_max) {
  return CountingRecord(poisson_fields(lambda0, env, seed, lambda_max));
}

CountingRecord simulate_censoring(const IntensityModel& hazard, const CensoringSpec& censoring,
                                  int n, double horizon, std::uint64_t seed) {
  return CountingRecord(censoring_fields(hazard, censoring, n, horizon, seed));
}

CountingRecord simulate_markov(const MarkovSpec& spec, int n, double horizon,
                               std::span<const Transition> target, std::uint64_t seed) {
  return CountingRecord(markov_fields(spec, n, horizon, target, seed));
}

CountingRecord simulate(const ModelSpec& spec, std::uint64_t seed) {
  CountingRecord::Fields f = std::visit(
      [&](const auto& m) -> CountingRecord::Fields {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PoissonModel>) {
          const Domain omega = m.omega.value_or(Domain{0.0, m.horizon});
          if (m.n <= 0) throw std::invalid_argument("simulate: n must be > 0");
          ModelEnvironment env;
          env.omega = omega;
          env.horizon = m.horizon;
          env.n = m.n;
          return poisson_fields(m.intensity, env, seed, m.lambda_max);
        } else if constexpr (std::is_same_v<T, CensoringModel>) {
          return censoring_fields(m.hazard, m.censoring, m.n, m.horizon, seed);
        } else {
          return markov_fields(m.spec, m.n, m.horizon, m.target, seed);
        }
      },
      spec);
  f.spec_digest = model_digest(spec);
  return CountingRecord(std::move(f));
}

CountingRecord aggregate(std::span<const CountingRecord> records) {
  if (records.empty()) throw std::invalid_argument("aggregate: no records");
  CountingRecord::Fields f;
  f.model = records.front().model();
  f.horizon = records.front().horizon();
  f.seed = records.front().seed();
  std::vector<std::pair<double, double>> deltas;
  std::vector<std::pair<double, std::string>> events;
  bool marked = false;
  for (const auto& r : records) {
    if (r.horizon() != f.horizon) throw std::invalid_argument("aggregate: horizons differ");
    f.n += r.n();
    marked = marked || !r.marks().empty();
    for (std::size_t i = 0; i < r.count(); ++i) {
      events.emplace_back(r.events()[i], r.marks().empty() ? std::string{} : r.marks()[i]);
    }
    const auto b = r.exposure().breaks();
    const auto v = r.exposure().values();
    double prev = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (b[k + 1] > b[k] || k == 0) {
        deltas.emplace_back(b[k], v[k] - prev);
        prev = v[k];
      }
    }
    deltas.emplace_back(b.back(), -prev);
    for (const auto& a : r.audit()) f.audit.push_back(a);
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  for (auto& [t, m] : events) {
    f.events.push_back(t);
    if (marked) f.marks.push_back(std::move(m));
  }
  f.exposure = build_exposure(std::move(deltas), f.horizon);
  return CountingRecord(std::move(f));
}

double compensator(const CountingRecord& record, const IntensityModel& lambda0) {
  return record.exposure().integrate(lambda0);
}

GammaReport check_gamma_event(const CountingRecord& record, const ModelEnvironment& env) {
  GammaReport rep;
  rep.tolerance = env.gamma_alpha * env.m1;
  const auto& y = record.exposure();
  const auto breaks = y.breaks();
  const auto values = y.values();
  const double n = env.n;
  const Domain om = env.omega;
  const double h = om.length() / kEnvironmentGrid;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double b0 = breaks[k];
    const double b1 = breaks[k + 1];
    // Y takes values[k] on (b0, b1], and at b0 only for the first step.
    const double a = std::max(b0, om.lo);
    const double b = std::min(b1, om.hi);
    if (b >= a && (b > a || k == 0 || b0 == b1)) {
      const double level = values[k] / n;
      const auto gap = [&](double t) {
        rep.sup_gap = std::max(rep.sup_gap, std::abs(level - env.mu_tilde(t)));
      };
      if (b > a || b0 == om.lo || k == 0) gap(b);
      if (b > a) {
        gap(a + 1e-12 * std::max(1.0, std::abs(a)));
        const auto first = static_cast<long>(std::ceil((a - om.lo) / h));
        const auto last = static_cast<long>(std::floor((b - om.lo) / h));
        for (long i = std::max(first, 0L); i <= last; ++i) gap(om.lo + static_cast<double>(i) * h);
        for (double m : env.mu_breaks) {
          if (m > a && m < b) gap(m);
        }
      }
    }
    const bool before = b1 > b0 && b0 < om.lo;
    const bool after = b1 > om.hi && b1 > b0;
    if ((before || after) && values[k] > 0.0) {
      rep.sup_outside = std::max(rep.sup_outside, values[k]);
    }
  }
  rep.holds = rep.sup_gap <= rep.tolerance && rep.sup_outside == 0.0;
  return rep;
}

MomentEstimate moment_condition_estimate(const ModelSpec& spec, int k, int replicates,
                                         std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("moment_condition_estimate: k must be >= 2");
  if (replicates < 2) throw std::invalid_argument("moment_condition_estimate: need >= 2 replicates");
  const ModelEnvironment env = environment(spec);
  const double n = model_n(spec);
  std::vector<double> vals(static_cast<std::size_t>(replicates));
  for (int r = 0; r < replicates; ++r) {
    const CountingRecord rec = simulate(spec, derive_seed(seed, static_cast<std::uint64_t>(r)));
    const double i = integral_squared_gap(rec, env);
    vals[static_cast<std::size_t>(r)] = std::pow(i / n, k);
  }
  const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / replicates;
  double ss = 0.0;
  for (double v : vals) ss += (v - mean) * (v - mean);
  MomentEstimate est;
  est.n = model_n(spec);
  est.k = k;
  est.value = mean;
  est.se = std::sqrt(ss / (replicates - 1) / replicates);
  return est;
}

MomentStudy moment_condition_study(const ModelSpec& spec, std::span<const int> n_grid, int k,
                                   int replicates, std::uint64_t seed) {
  if (n_grid.empty()) throw std::invalid_argument("moment_condition_study: empty n grid");
  MomentStudy study;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    study.rows.push_back(
        moment_condition_estimate(with_n(spec, n_grid[i]), k, replicates, derive_seed(seed, i)));
  }
  const auto& first = study.rows.front();
  study.bound = 2.0 * first.value;
  study.bounded = std::all_of(study.rows.begin(), study.rows.end(), [&](const MomentEstimate& r) {
    return r.value <= study.bound + 3.0 * (r.se + first.se);
  });
  return study;
}

}  // namespace aalen
