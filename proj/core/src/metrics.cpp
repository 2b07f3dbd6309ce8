#include "aalen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "aalen/likelihood.hpp"
#include "aalen/quadrature.hpp"
#include "aalen/random.hpp"
#include "aalen/stats.hpp"

namespace aalen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kGradingLevels = 24;

void require_same_domain(const IntensityModel& f, const IntensityModel& g) {
  if (!(f.domain() == g.domain())) {
    throw std::invalid_argument("metrics: intensities live on different domains");
  }
}

std::vector<double> joint_cuts(const IntensityModel& f, const IntensityModel& g,
                               std::span<const double> extra = {}) {
  std::vector<double> breaks = f.breakpoints();
  const auto gb = g.breakpoints();
  breaks.insert(breaks.end(), gb.begin(), gb.end());
  breaks.insert(breaks.end(), extra.begin(), extra.end());
  const Domain d = f.domain();
  return quadrature::partition(d.lo, d.hi, breaks,
                               std::max(f.quadrature_panels(), g.quadrature_panels()));
}

/// Geometric refinement toward both ends of every panel, for integrands
/// with log or root singularities where a density vanishes.
std::vector<double> graded(std::span<const double> cuts) {
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = cuts[k + 1];
    const double half = 0.5 * (b - a);
    out.push_back(a);
    for (int l = kGradingLevels; l >= 1; --l) out.push_back(a + half * std::ldexp(1.0, -l));
    out.push_back(a + half);
    for (int l = 1; l <= kGradingLevels; ++l) out.push_back(b - half * std::ldexp(1.0, -l));
  }
  out.push_back(cuts.back());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Adds the roots of f - g inside each panel, located by bisection.
std::vector<double> split_at_crossings(const IntensityModel& f, const IntensityModel& g,
                                       std::span<const double> cuts) {
  constexpr int kProbe = 32;
  std::vector<double> out;
  const auto diff = [&](double t) { return f(t) - g(t); };
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = cuts[k + 1];
    out.push_back(a);
    // Probe strictly inside so one-sided limits at the cuts do not matter.
    double prev_t = a + 1e-9 * (b - a);
    double prev = diff(prev_t);
    for (int i = 1; i <= kProbe; ++i) {
      const double t = i == kProbe ? b - 1e-9 * (b - a) : a + (b - a) * i / kProbe;
      const double cur = diff(t);
      if ((prev < 0.0 && cur > 0.0) || (prev > 0.0 && cur < 0.0)) {
        double lo = prev_t;
        double hi = t;
        for (int it = 0; it < 80 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
          const double mid = 0.5 * (lo + hi);
          ((diff(mid) < 0.0) == (prev < 0.0) ? lo : hi) = mid;
        }
        out.push_back(0.5 * (lo + hi));
      }
      prev_t = t;
      prev = cur;
    }
  }
  out.push_back(cuts.back());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> sup_points(const IntensityModel& f, const IntensityModel& g) {
  const Domain d = f.domain();
  std::vector<double> pts;
  pts.reserve(kSupGrid + 64);
  for (int i = 0; i <= kSupGrid; ++i) pts.push_back(d.lo + d.length() * i / kSupGrid);
  const double eps = 1e-12 * std::max(1.0, d.length());
  for (const auto* m : {&f, &g}) {
    for (double b : m->breakpoints()) {
      for (double t : {b - eps, b, b + eps}) {
        if (d.contains(t)) pts.push_back(t);
      }
    }
  }
  return pts;
}

void check_density(const IntensityModel& f, const char* who) {
  const double m = f.mass();
  if (!(std::abs(m - 1.0) <= 1e-6)) {
    throw std::invalid_argument(std::string(who) + ": input integrates to " + std::to_string(m) +
                                ", not 1");
  }
}

struct KlPieces {
  double mass0 = 0.0;  // ∫ λ0 μ_n
  double mass = 0.0;   // ∫ λ μ_n
  double cross = 0.0;  // ∫ λ0 log(λ0/λ) μ_n
  bool divergent = false;
};

KlPieces kl_pieces(const IntensityModel& lambda0, const IntensityModel& lambda,
                   const ModelEnvironment& env) {
  require_same_domain(lambda0, lambda);
  const Domain om = env.omega;
  std::vector<double> breaks = lambda0.breakpoints();
  const auto lb = lambda.breakpoints();
  breaks.insert(breaks.end(), lb.begin(), lb.end());
  breaks.insert(breaks.end(), env.mu_breaks.begin(), env.mu_breaks.end());
  const auto cuts = graded(quadrature::partition(
      om.lo, om.hi, breaks, std::max(lambda0.quadrature_panels(), lambda.quadrature_panels())));
  KlPieces p;
  const auto& rule = quadrature::gauss_legendre();
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double half = 0.5 * (cuts[k + 1] - cuts[k]);
    const double mid = 0.5 * (cuts[k + 1] + cuts[k]);
    for (int i = 0; i < quadrature::kNodes; ++i) {
      const double t = mid + half * rule.nodes[i];
      const double w = half * rule.weights[i] * env.mu(t);
      const double l0 = lambda0(t);
      const double l = lambda(t);
      p.mass0 += w * l0;
      p.mass += w * l;
      if (l0 > 0.0) {
        if (!(l > 0.0)) {
          p.divergent = true;
        } else {
          p.cross += w * l0 * std::log(l0 / l);
        }
      }
    }
  }
  return p;
}

}  // namespace

double l1_distance(const IntensityModel& f, const IntensityModel& g) {
  require_same_domain(f, g);
  const auto cuts = split_at_crossings(f, g, joint_cuts(f, g));
  return quadrature::integrate([&](double t) { return std::abs(f(t) - g(t)); }, cuts);
}

double hellinger(const IntensityModel& f, const IntensityModel& g) {
  require_same_domain(f, g);
  check_density(f, "hellinger");
  check_density(g, "hellinger");
  const auto cuts = graded(joint_cuts(f, g));
  const double h2 = quadrature::integrate(
      [&](double t) {
        const double d = std::sqrt(f(t)) - std::sqrt(g(t));
        return d * d;
      },
      cuts);
  return std::sqrt(std::clamp(h2, 0.0, 2.0));
}

double ej_moment(const IntensityModel& f0, const IntensityModel& f, int j) {
  if (j < 2) throw std::invalid_argument("ej_moment: j must be >= 2");
  require_same_domain(f0, f);
  const auto cuts = graded(joint_cuts(f0, f));
  bool divergent = false;
  const double v = quadrature::integrate(
      [&](double t) {
        const double a = f0(t);
        if (!(a > 0.0)) return 0.0;
        const double b = f(t);
        if (!(b > 0.0)) {
          divergent = true;
          return 0.0;
        }
        return a * std::pow(std::abs(std::log(a) - std::log(b)), j);
      },
      cuts);
  return divergent ? kInf : v;
}

double sup_ratio(const IntensityModel& f0, const IntensityModel& f) {
  require_same_domain(f0, f);
  double r = 0.0;
  for (double t : sup_points(f0, f)) {
    const double a = f0(t);
    if (!(a > 0.0)) continue;
    const double b = f(t);
    if (!(b > 0.0)) return kInf;
    r = std::max(r, a / b);
  }
  return r;
}

double sup_norm(const IntensityModel& f) {
  double s = 0.0;
  for (double t : sup_points(f, f)) s = std::max(s, f(t));
  return s;
}

double phi(double x) {
  if (!(x > 0.0)) return kInf;
  return x - 1.0 - std::log(x);
}

double kappa0(double m1, double m2, double M0) {
  if (!(m1 > 0.0 && m2 >= m1 && M0 > 0.0)) {
    throw std::invalid_argument("kappa0: need 0 < m1 <= m2 and M0 > 0");
  }
  const double r = m2 / m1;
  const double first = (4.0 / m1) * (1.0 + std::log(r)) * (1.0 + r * r);
  const double second = m2 * (2.0 * M0 + 1.0) * (2.0 * M0 + 1.0) / (m1 * m1 * M0 * M0);
  return m2 * m2 * M0 * (first + second);
}

int BknParams::k2() const {
  if (k < 2) throw std::invalid_argument("BknParams: k must be >= 2");
  int p = 1;
  while (p < k) p *= 2;
  return p;
}

BknReport bkn_membership(const IntensityModel& f0bar, const IntensityModel& fbar,
                         const BknParams& p) {
  BknReport r;
  const double v2 = p.v_n * p.v_n;
  r.sup_ratio = sup_ratio(f0bar, fbar);
  r.ratio_bound = std::pow(static_cast<double>(p.n), p.H);
  r.sup_density = sup_norm(fbar);
  r.density_bound = p.H;
  r.hellinger_bound =
      std::isfinite(r.sup_ratio) ? v2 / (1.0 + std::log(std::max(r.sup_ratio, 1.0))) : 0.0;
  const double h = hellinger(f0bar, fbar);
  r.hellinger_sq = h * h;
  r.ej_bound = v2;
  for (int j = 2; j <= p.k2(); ++j) {
    r.ej.push_back(ej_moment(f0bar, fbar, j));
    r.ej_max = std::max(r.ej_max, r.ej.back());
  }
  r.hellinger_ok = r.hellinger_sq <= r.hellinger_bound;
  r.ej_ok = r.ej_max <= r.ej_bound;
  r.ratio_ok = r.sup_ratio <= r.ratio_bound;
  r.density_ok = r.sup_density <= r.density_bound;
  r.member = r.hellinger_ok && r.ej_ok && r.ratio_ok && r.density_ok;
  return r;
}

double kl_aalen(const IntensityModel& lambda0, const IntensityModel& lambda,
                const ModelEnvironment& env) {
  const KlPieces p = kl_pieces(lambda0, lambda, env);
  if (p.divergent) return kInf;
  if (!(p.mass0 > 0.0)) return p.mass;
  // KL(λ̄0n; λ̄n) = ∫ λ̄0n log(λ̄0n / λ̄n) = cross / M0 + log(M / M0).
  const double kl_bar = p.cross / p.mass0 + std::log(p.mass / p.mass0);
  return p.mass0 * (kl_bar + phi(p.mass / p.mass0));
}

double kl_aalen_direct(const IntensityModel& lambda0, const IntensityModel& lambda,
                       const ModelEnvironment& env) {
  const KlPieces p = kl_pieces(lambda0, lambda, env);
  if (p.divergent) return kInf;
  return p.cross - p.mass0 + p.mass;
}

MassNormCheck mass_norm_inequality_check(const IntensityModel& lambda,
                                         const IntensityModel& lambda0) {
  const Decomposition a = decompose(lambda);
  const Decomposition b = decompose(lambda0);
  MassNormCheck c;
  c.lhs = l1_distance(lambda, lambda0);
  c.rhs = std::max(std::max(a.mass, b.mass) * l1_distance(a.normalized, b.normalized) / 2.0,
                   std::abs(a.mass - b.mass));
  c.holds = c.lhs >= c.rhs - 1e-9 * std::max(1.0, c.rhs);
  return c;
}

VarianceEstimate v2_monte_carlo(const IntensityModel& lambda0, const IntensityModel& lambda,
                                const ModelSpec& spec, int replicates, std::uint64_t seed) {
  if (replicates < 100) throw std::invalid_argument("v2_monte_carlo: need >= 100 replicates");
  const ModelSpec truth = with_intensity(spec, lambda0);
  std::vector<double> d(static_cast<std::size_t>(replicates));
  for (int r = 0; r < replicates; ++r) {
    const CountingRecord rec = simulate(truth, derive_seed(seed, static_cast<std::uint64_t>(r)));
    d[static_cast<std::size_t>(r)] =
        log_likelihood(lambda0, rec).value - log_likelihood(lambda, rec).value;
  }
  VarianceEstimate e;
  e.replicates = replicates;
  e.mean = stats::mean(d);
  if (!std::isfinite(e.mean)) {
    e.value = kInf;
    e.se = kInf;
    return e;
  }
  e.value = stats::variance(d);
  double m4 = 0.0;
  for (double x : d) m4 += std::pow(x - e.mean, 4);
  m4 /= replicates;
  e.se = std::sqrt(std::max(m4 - e.value * e.value, 0.0) / replicates);
  return e;
}

}  // namespace aalen
