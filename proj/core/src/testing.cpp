#include "aalen/testing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aalen/quadrature.hpp"
#include "aalen/random.hpp"

namespace aalen {

namespace {

constexpr int kRegionGrid = 4096;

std::vector<double> merged_breaks(const IntensityModel& a, const IntensityModel& b,
                                  std::span<const double> extra) {
  std::vector<double> out = a.breakpoints();
  const auto bb = b.breakpoints();
  out.insert(out.end(), bb.begin(), bb.end());
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

/// ∫_lo^hi f μ̃ over pieces split at every relevant breakpoint.
template <class F>
double weighted_integral(F&& f, double lo, double hi, const IntensityModel& a,
                         const IntensityModel& b, const ModelEnvironment& env) {
  if (!(hi > lo)) return 0.0;
  const int panels = std::max(
      1, static_cast<int>(std::ceil(std::max(a.quadrature_panels(), b.quadrature_panels()) *
                                    (hi - lo) / env.omega.length())));
  const auto cuts = quadrature::partition(lo, hi, merged_breaks(a, b, env.mu_breaks), panels);
  return quadrature::integrate([&](double t) { return f(t) * env.mu_tilde(t); }, cuts);
}

std::vector<Interval> complement_of(const std::vector<Interval>& a, Domain om) {
  std::vector<Interval> out;
  double cur = om.lo;
  for (const auto& i : a) {
    if (i.lo > cur) out.push_back({cur, i.lo});
    cur = std::max(cur, i.hi);
  }
  if (om.hi > cur) out.push_back({cur, om.hi});
  return out;
}

/// ∫_S λ Y for a union of intervals S, exact per exposure step.
double exposure_integral(const StepFunction& y, const IntensityModel& lambda,
                         const std::vector<Interval>& set) {
  const auto b = y.breaks();
  const auto v = y.values();
  double s = 0.0;
  for (const auto& i : set) {
    auto k = static_cast<std::size_t>(std::upper_bound(b.begin(), b.end(), i.lo) - b.begin());
    k = k == 0 ? 0 : k - 1;
    for (; k < v.size() && b[k] < i.hi; ++k) {
      const double lo = std::max(b[k], i.lo);
      const double hi = std::min(b[k + 1], i.hi);
      if (hi > lo && v[k] > 0.0) s += v[k] * lambda.integral(lo, hi);
    }
  }
  return s;
}

std::size_t count_in(const CountingRecord& r, const std::vector<Interval>& set) {
  std::size_t c = 0;
  for (const auto& i : set) c += r.count_in(i.lo, i.hi);
  return c;
}

}  // namespace

std::vector<Interval> region_where_greater(const IntensityModel& lambda1,
                                           const IntensityModel& lambda0, Domain om,
                                           std::span<const double> extra_breaks) {
  const auto cuts =
      quadrature::partition(om.lo, om.hi, merged_breaks(lambda1, lambda0, extra_breaks), kRegionGrid);
  const auto above = [&](double t) { return lambda1(t) - lambda0(t) >= 0.0; };
  std::vector<Interval> out;
  const auto add = [&](double a, double b) {
    if (!(b > a)) return;
    if (!out.empty() && std::abs(out.back().hi - a) <= 1e-12 * (1.0 + std::abs(a))) {
      out.back().hi = b;
    } else {
      out.push_back({a, b});
    }
  };
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = cuts[k + 1];
    const double eps = 1e-9 * (b - a);
    const bool left = above(a + eps);
    const bool right = above(b - eps);
    if (left == right) {
      if (left) add(a, b);
      continue;
    }
    double lo = a + eps;
    double hi = b - eps;
    while (hi - lo > 1e-11) {
      const double mid = 0.5 * (lo + hi);
      (above(mid) == left ? lo : hi) = mid;
    }
    const double root = 0.5 * (lo + hi);
    if (left) {
      add(a, root);
    } else {
      add(root, b);
    }
  }
  return out;
}

double weighted_l1(const IntensityModel& lambda, const IntensityModel& lambdap,
                   const ModelEnvironment& env) {
  const auto a = region_where_greater(lambda, lambdap, env.omega, env.mu_breaks);
  const auto ac = complement_of(a, env.omega);
  const auto diff = [&](double t) { return lambda(t) - lambdap(t); };
  double s = 0.0;
  for (const auto& i : a) s += weighted_integral(diff, i.lo, i.hi, lambda, lambdap, env);
  for (const auto& i : ac) s -= weighted_integral(diff, i.lo, i.hi, lambda, lambdap, env);
  return s;
}

double variance_proxy(const IntensityModel& lambda, const ModelEnvironment& env) {
  return (1.0 + env.gamma_alpha) *
         weighted_integral([&](double t) { return lambda(t); }, env.omega.lo, env.omega.hi, lambda,
                           lambda, env);
}

double test_threshold(int n, double v, double u) {
  if (!(u >= 0.0)) throw std::invalid_argument("test_threshold: u must be >= 0");
  return std::sqrt(2.0 * n * v * u) + u / 3.0;
}

TestSpec build_test(const IntensityModel& lambda1, const IntensityModel& lambda0,
                    const ModelEnvironment& env, double u) {
  auto region = region_where_greater(lambda1, lambda0, env.omega, env.mu_breaks);
  auto complement = complement_of(region, env.omega);
  TestSpec s{lambda1, lambda0, env, std::move(region), std::move(complement)};
  const auto diff = [&](double t) { return lambda1(t) - lambda0(t); };
  for (const auto& i : s.region) s.d_a += weighted_integral(diff, i.lo, i.hi, lambda1, lambda0, env);
  for (const auto& i : s.complement) {
    s.d_ac -= weighted_integral(diff, i.lo, i.hi, lambda1, lambda0, env);
  }
  const double total = s.d_a + s.d_ac;
  if (!(total > 1e-12 * std::max(1.0, lambda0.mass()))) {
    throw std::invalid_argument("build_test: alternative equals the null almost everywhere");
  }
  s.u = u;
  s.v0 = variance_proxy(lambda0, env);
  s.rho = test_threshold(env.n, s.v0, u);
  s.side = s.d_a >= s.d_ac ? TestSide::A : TestSide::Ac;
  return s;
}

double test_statistic(const TestSpec& spec, const CountingRecord& record) {
  const auto& set = spec.side == TestSide::A ? spec.region : spec.complement;
  return static_cast<double>(count_in(record, set)) -
         exposure_integral(record.exposure(), spec.lambda0, set);
}

int apply_test(const TestSpec& spec, const CountingRecord& record) {
  const double stat = test_statistic(spec, record);
  return spec.side == TestSide::A ? (stat >= spec.rho ? 1 : 0) : (stat <= -spec.rho ? 1 : 0);
}

BoundedFunction BoundedFunction::constant(double c) {
  return {[c](double) { return c; }, std::abs(c), {}};
}

BoundedFunction BoundedFunction::indicator(std::vector<Interval> set) {
  std::vector<double> breaks;
  for (const auto& i : set) {
    breaks.push_back(i.lo);
    breaks.push_back(i.hi);
  }
  return {[set](double t) {
            for (const auto& i : set) {
              if (t >= i.lo && t <= i.hi) return 1.0;
            }
            return 0.0;
          },
          1.0, std::move(breaks)};
}

std::vector<TailRow> bernstein_tail_check(const BoundedFunction& H, const IntensityModel& lambda,
                                          const ModelSpec& spec, double v,
                                          std::span<const double> u_grid, int replicates,
                                          std::uint64_t seed) {
  if (replicates < 1) throw std::invalid_argument("bernstein_tail_check: need replicates >= 1");
  if (!(v >= 0.0)) throw std::invalid_argument("bernstein_tail_check: v must be >= 0");
  const ModelSpec truth = with_intensity(spec, lambda);
  const ModelEnvironment env = environment(truth);
  std::vector<double> breaks = lambda.breakpoints();
  breaks.insert(breaks.end(), H.breaks.begin(), H.breaks.end());
  std::vector<long> hits(u_grid.size(), 0);
  int in_gamma = 0;
  for (int r = 0; r < replicates; ++r) {
    const CountingRecord rec = simulate(truth, derive_seed(seed, static_cast<std::uint64_t>(r)));
    if (!check_gamma_event(rec, env).holds) continue;
    ++in_gamma;
    double jumps = 0.0;
    for (double t : rec.events()) jumps += H.f(t);
    double drift = 0.0;
    double quad = 0.0;
    const auto b = rec.exposure().breaks();
    const auto y = rec.exposure().values();
    for (std::size_t k = 0; k < y.size(); ++k) {
      if (y[k] == 0.0 || !(b[k + 1] > b[k])) continue;
      const auto cuts = quadrature::partition(b[k], b[k + 1], breaks, lambda.quadrature_panels());
      drift += y[k] * quadrature::integrate([&](double t) { return H.f(t) * lambda(t); }, cuts);
      quad += y[k] * quadrature::integrate(
                         [&](double t) {
                           const double h = H.f(t);
                           return h * h * lambda(t);
                         },
                         cuts);
    }
    if (quad > v * (1.0 + 1e-9) + 1e-12) {
      throw std::invalid_argument("bernstein_tail_check: v = " + std::to_string(v) +
                                  " is below ∫H²Yλ = " + std::to_string(quad) + " on replicate " +
                                  std::to_string(r));
    }
    const double m = std::abs(jumps - drift);
    for (std::size_t i = 0; i < u_grid.size(); ++i) {
      const double u = u_grid[i];
      // Strict exceedance, so a degenerate H ≡ 0 never counts.
      if (m > std::sqrt(2.0 * v * u) + H.bound * u / 3.0) ++hits[i];
    }
  }
  std::vector<TailRow> rows;
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    TailRow row;
    row.u = u_grid[i];
    row.threshold = std::sqrt(2.0 * v * row.u) + H.bound * row.u / 3.0;
    row.in_gamma = in_gamma;
    // Frequency of {tail, Γ_n} among all replicates.
    row.empirical = static_cast<double>(hits[i]) / replicates;
    row.bound = 2.0 * std::exp(-row.u);
    row.se = std::sqrt(row.empirical * (1.0 - row.empirical) / replicates);
    row.pass = row.empirical <= row.bound + 3.0 * row.se;
    rows.push_back(row);
  }
  return rows;
}

std::vector<TypeOneRow> type_one_study(const IntensityModel& lambda1, const ModelSpec& null_spec,
                                       std::span<const double> u_grid, int replicates,
                                       std::uint64_t seed, double gamma_alpha) {
  if (replicates < 1) throw std::invalid_argument("type_one_study: need replicates >= 1");
  const ModelEnvironment env = environment(null_spec, gamma_alpha);
  const IntensityModel& lambda0 = true_intensity(null_spec);
  std::vector<TestSpec> tests;
  for (double u : u_grid) tests.push_back(build_test(lambda1, lambda0, env, u));
  std::vector<long> rejections(u_grid.size(), 0);
  for (int r = 0; r < replicates; ++r) {
    const CountingRecord rec = simulate(null_spec, derive_seed(seed, static_cast<std::uint64_t>(r)));
    if (!check_gamma_event(rec, env).holds) continue;
    for (std::size_t i = 0; i < tests.size(); ++i) rejections[i] += apply_test(tests[i], rec);
  }
  std::vector<TypeOneRow> rows;
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    TypeOneRow row;
    row.u = u_grid[i];
    row.n = env.n;
    row.empirical_type1 = static_cast<double>(rejections[i]) / replicates;
    row.bound = 2.0 * std::exp(-row.u);
    row.se = std::sqrt(row.empirical_type1 * (1.0 - row.empirical_type1) / replicates);
    row.pass = row.empirical_type1 <= row.bound + 3.0 * row.se;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace aalen
