#include "aalen/intensity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "aalen/quadrature.hpp"

namespace aalen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr std::array<ClosedFormInfo, 4> kRegistry{{
    {ClosedFormKind::constant, "constant", {"value", "", ""}, 1},
    {ClosedFormKind::linear_decreasing, "linear_decreasing", {"level", "slope", ""}, 2},
    {ClosedFormKind::exp_sine, "exp_sine", {"scale", "amplitude", "frequency"}, 3},
    {ClosedFormKind::weibull_hazard, "weibull_hazard", {"shape", "scale", ""}, 2},
}};

bool finite(double x) { return std::isfinite(x); }

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("IntensityModel: " + what);
}

double closed_form_value(const ClosedForm& f, double t) {
  const auto& p = f.params;
  double v = 0.0;
  switch (f.kind) {
    case ClosedFormKind::constant:
      v = p[0];
      break;
    case ClosedFormKind::linear_decreasing:
      v = std::max(p[0] - p[1] * t, 0.0);
      break;
    case ClosedFormKind::exp_sine:
      v = p[0] * std::exp(p[1] * std::sin(2.0 * std::numbers::pi * p[2] * t));
      break;
    case ClosedFormKind::weibull_hazard:
      v = (p[0] / p[1]) * std::pow(t / p[1], p[0] - 1.0);
      break;
  }
  return f.multiplier * v;
}

void validate_closed_form(const ClosedForm& f) {
  const auto& p = f.params;
  require(finite(f.multiplier) && f.multiplier >= 0.0, "multiplier must be >= 0");
  for (double x : p) require(finite(x), "closed-form parameters must be finite");
  switch (f.kind) {
    case ClosedFormKind::constant:
      require(p[0] >= 0.0, "constant value must be >= 0");
      break;
    case ClosedFormKind::linear_decreasing:
      require(p[0] >= 0.0 && p[1] >= 0.0, "linear_decreasing needs level, slope >= 0");
      break;
    case ClosedFormKind::exp_sine:
      require(p[0] >= 0.0, "exp_sine scale must be >= 0");
      break;
    case ClosedFormKind::weibull_hazard:
      require(p[0] > 0.0 && p[1] > 0.0, "weibull_hazard needs shape, scale > 0");
      break;
  }
}

double log_spline_exponent(const LogSpline& s, double x) { return s.basis.dot(s.coef, x); }

double log_linear_exponent(const LogLinear& s, double x) {
  double e = 0.0;
  for (std::size_t j = 0; j < s.coef.size(); ++j) {
    e += s.coef[j] * fourier_basis(static_cast<int>(j) + 1, x);
  }
  return e;
}

thread_local std::uint64_t g_normalizer_calls = 0;

}  // namespace

std::span<const ClosedFormInfo> closed_form_registry() { return kRegistry; }

const ClosedFormInfo& closed_form_info(ClosedFormKind kind) {
  for (const auto& info : kRegistry) {
    if (info.kind == kind) return info;
  }
  throw std::invalid_argument("unknown closed-form kind");
}

const ClosedFormInfo& closed_form_info(std::string_view id) {
  for (const auto& info : kRegistry) {
    if (info.id == id) return info;
  }
  throw std::invalid_argument("unknown closed-form intensity id '" + std::string(id) + "'");
}

double fourier_basis(int j, double x) noexcept {
  if (j <= 1) return 1.0;
  const int m = j / 2;
  const double arg = 2.0 * std::numbers::pi * m * x;
  return (j % 2 == 0) ? std::numbers::sqrt2 * std::cos(arg)
                      : std::numbers::sqrt2 * std::sin(arg);
}

// ---------------------------------------------------------------------------
// UniformMixture

UniformMixture::UniformMixture(std::vector<MixtureAtom> atoms, double mass)
    : atoms_(std::move(atoms)), mass_(mass) {
  require(!atoms_.empty(), "uniform mixture needs at least one atom");
  require(finite(mass_) && mass_ >= 0.0, "uniform mixture mass must be >= 0");
  double total = 0.0;
  for (const auto& a : atoms_) {
    require(finite(a.theta) && a.theta > 0.0, "mixture atom location must be > 0");
    require(finite(a.weight) && a.weight >= 0.0, "mixture weight must be >= 0");
    total += a.weight;
  }
  require(std::abs(total - 1.0) < 1e-9, "mixture weights must sum to 1");

  std::vector<std::size_t> order(atoms_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
    return atoms_[a].theta < atoms_[b].theta;
  });
  const std::size_t L = atoms_.size();
  sorted_theta_.resize(L);
  prefix_weight_.assign(L + 1, 0.0);
  suffix_height_.assign(L + 1, 0.0);
  for (std::size_t k = 0; k < L; ++k) {
    sorted_theta_[k] = atoms_[order[k]].theta;
    prefix_weight_[k + 1] = prefix_weight_[k] + atoms_[order[k]].weight / total;
  }
  for (std::size_t k = L; k-- > 0;) {
    const auto& a = atoms_[order[k]];
    suffix_height_[k] = suffix_height_[k + 1] + (a.weight / total) / a.theta;
  }
}

double UniformMixture::density(double x) const noexcept {
  if (x < 0.0) return 0.0;
  const auto k = std::upper_bound(sorted_theta_.begin(), sorted_theta_.end(), x) -
                 sorted_theta_.begin();
  return suffix_height_[static_cast<std::size_t>(k)];
}

double UniformMixture::cumulative(double x) const noexcept {
  if (x <= 0.0) return 0.0;
  const auto k = static_cast<std::size_t>(
      std::upper_bound(sorted_theta_.begin(), sorted_theta_.end(), x) -
      sorted_theta_.begin());
  return prefix_weight_[k] + x * suffix_height_[k];
}

double eval_uniform_mixture(std::span<const MixtureAtom> atoms, double x) {
  double v = 0.0;
  for (const auto& a : atoms) {
    if (!(a.theta > 0.0)) {
      throw std::invalid_argument("eval_uniform_mixture: atom location must be > 0");
    }
    if (x > 0.0 && x < a.theta) v += a.weight / a.theta;
  }
  return v;
}

// ---------------------------------------------------------------------------
// IntensityModel

IntensityModel::IntensityModel(Family family, Domain domain)
    : family_(std::move(family)), domain_(domain) {
  require(finite(domain_.lo) && finite(domain_.hi) && domain_.lo < domain_.hi,
          "domain must be a non-empty finite interval");
  std::visit(
      [](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ClosedForm>) {
          validate_closed_form(f);
        } else if constexpr (std::is_same_v<T, PiecewiseConstant>) {
          require(!f.values.empty() && f.breaks.size() == f.values.size() + 1,
                  "piecewise_constant needs breaks.size() == values.size() + 1");
          for (std::size_t i = 1; i < f.breaks.size(); ++i) {
            require(f.breaks[i] > f.breaks[i - 1], "piecewise breaks must increase");
          }
          for (double v : f.values) require(finite(v) && v >= 0.0, "piecewise values must be >= 0");
        } else if constexpr (std::is_same_v<T, UniformMixture>) {
          // validated by its own constructor
        } else if constexpr (std::is_same_v<T, LogSpline>) {
          require(f.coef.size() == static_cast<std::size_t>(f.basis.dimension()),
                  "log_spline coefficient dimension mismatch");
          require(finite(f.scale) && f.scale >= 0.0, "log_spline scale must be >= 0");
          for (double c : f.coef) require(finite(c), "log_spline coefficients must be finite");
        } else if constexpr (std::is_same_v<T, LogLinear>) {
          require(f.basis == "fourier", "unknown log_linear basis '" + f.basis + "'");
          require(!f.coef.empty(), "log_linear needs at least one coefficient");
          require(finite(f.scale) && f.scale >= 0.0, "log_linear scale must be >= 0");
          for (double c : f.coef) require(finite(c), "log_linear coefficients must be finite");
        }
      },
      family_);
}

IntensityModel IntensityModel::constant(double value, Domain domain) {
  return IntensityModel(ClosedForm{ClosedFormKind::constant, {value, 0.0, 0.0}, 1.0}, domain);
}

double IntensityModel::operator()(double t) const {
  if (!domain_.contains(t)) return 0.0;
  const double x = (t - domain_.lo) / domain_.length();
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ClosedForm>) {
          return closed_form_value(f, t);
        } else if constexpr (std::is_same_v<T, PiecewiseConstant>) {
          if (t < f.breaks.front() || t > f.breaks.back()) return 0.0;
          auto it = std::upper_bound(f.breaks.begin(), f.breaks.end(), t);
          auto k = static_cast<std::size_t>(it - f.breaks.begin());
          k = std::min(k, f.values.size());
          return f.values[k - 1];
        } else if constexpr (std::is_same_v<T, UniformMixture>) {
          return f.mass() * f.density(t - domain_.lo);
        } else if constexpr (std::is_same_v<T, LogSpline>) {
          return f.scale * std::exp(log_spline_exponent(f, x));
        } else {
          return f.scale * std::exp(log_linear_exponent(f, x));
        }
      },
      family_);
}

std::vector<double> IntensityModel::breakpoints() const {
  std::vector<double> out;
  const auto push = [&](double b) {
    if (b > domain_.lo && b < domain_.hi) out.push_back(b);
  };
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ClosedForm>) {
          if (f.kind == ClosedFormKind::linear_decreasing && f.params[1] > 0.0) {
            push(f.params[0] / f.params[1]);
          }
        } else if constexpr (std::is_same_v<T, PiecewiseConstant>) {
          for (double b : f.breaks) push(b);
        } else if constexpr (std::is_same_v<T, UniformMixture>) {
          for (const auto& a : f.atoms()) push(domain_.lo + a.theta);
        } else if constexpr (std::is_same_v<T, LogSpline>) {
          for (double b : f.basis.breakpoints()) push(domain_.lo + b * domain_.length());
        }
      },
      family_);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int IntensityModel::quadrature_panels() const {
  return std::visit(
      [](const auto& f) -> int {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ClosedForm>) {
          if (f.kind == ClosedFormKind::exp_sine) {
            return 16 * std::max(1, static_cast<int>(std::ceil(std::abs(f.params[2]))));
          }
          return 16;
        } else if constexpr (std::is_same_v<T, LogLinear>) {
          return std::max(16, 4 * static_cast<int>(f.coef.size()));
        } else {
          return 1;
        }
      },
      family_);
}

double IntensityModel::integral(double a, double b) const {
  a = std::max(a, domain_.lo);
  b = std::min(b, domain_.hi);
  if (!(b > a)) return 0.0;
  const auto by_quadrature = [&]() {
    const auto breaks = breakpoints();
    const int panels = std::max(
        1, static_cast<int>(std::ceil(quadrature_panels() * (b - a) / domain_.length())));
    const auto cuts = quadrature::partition(a, b, breaks, panels);
    return quadrature::integrate([this](double t) { return (*this)(t); }, cuts);
  };
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ClosedForm>) {
          const auto& p = f.params;
          switch (f.kind) {
            case ClosedFormKind::constant:
              return f.multiplier * p[0] * (b - a);
            case ClosedFormKind::linear_decreasing: {
              double top = b;
              if (p[1] > 0.0) top = std::min(b, p[0] / p[1]);
              if (!(top > a)) return 0.0;
              return f.multiplier * (p[0] * (top - a) - 0.5 * p[1] * (top * top - a * a));
            }
            case ClosedFormKind::weibull_hazard:
              return f.multiplier *
                     (std::pow(std::max(b, 0.0) / p[1], p[0]) -
                      std::pow(std::max(a, 0.0) / p[1], p[0]));
            case ClosedFormKind::exp_sine:
              return by_quadrature();
          }
          return 0.0;
        } else if constexpr (std::is_same_v<T, PiecewiseConstant>) {
          double s = 0.0;
          for (std::size_t k = 0; k < f.values.size(); ++k) {
            const double lo = std::max(a, f.breaks[k]);
            const double hi = std::min(b, f.breaks[k + 1]);
            if (hi > lo) s += f.values[k] * (hi - lo);
          }
          return s;
        } else if constexpr (std::is_same_v<T, UniformMixture>) {
          return f.mass() *
                 (f.cumulative(b - domain_.lo) - f.cumulative(a - domain_.lo));
        } else {
          return by_quadrature();
        }
      },
      family_);
}

double IntensityModel::sup_bound() const {
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ClosedForm>) {
          const auto& p = f.params;
          switch (f.kind) {
            case ClosedFormKind::constant:
              return f.multiplier * p[0];
            case ClosedFormKind::linear_decreasing:
              return f.multiplier * std::max(p[0] - p[1] * domain_.lo, 0.0);
            case ClosedFormKind::exp_sine:
              return f.multiplier * p[0] * std::exp(std::abs(p[1]));
            case ClosedFormKind::weibull_hazard:
              if (p[0] < 1.0) {
                return domain_.lo <= 0.0 ? kInf : closed_form_value(f, domain_.lo);
              }
              return closed_form_value(f, domain_.hi);
          }
          return kInf;
        } else if constexpr (std::is_same_v<T, PiecewiseConstant>) {
          return *std::max_element(f.values.begin(), f.values.end());
        } else if constexpr (std::is_same_v<T, UniformMixture>) {
          return f.mass() * f.density(0.0);
        } else if constexpr (std::is_same_v<T, LogSpline>) {
          // B-splines are a partition of unity, so θ'B <= max θ.
          return f.scale * std::exp(*std::max_element(f.coef.begin(), f.coef.end()));
        } else {
          double e = std::abs(f.coef[0]);
          for (std::size_t j = 1; j < f.coef.size(); ++j) {
            e += std::numbers::sqrt2 * std::abs(f.coef[j]);
          }
          return f.scale * std::exp(e);
        }
      },
      family_);
}

IntensityModel IntensityModel::scaled(double factor) const {
  require(finite(factor) && factor >= 0.0, "scale factor must be >= 0");
  Family g = std::visit(
      [&](const auto& f) -> Family {
        using T = std::decay_t<decltype(f)>;
        T copy = f;
        if constexpr (std::is_same_v<T, ClosedForm>) {
          copy.multiplier *= factor;
          return copy;
        } else if constexpr (std::is_same_v<T, PiecewiseConstant>) {
          for (double& v : copy.values) v *= factor;
          return copy;
        } else if constexpr (std::is_same_v<T, UniformMixture>) {
          return UniformMixture(std::vector<MixtureAtom>(f.atoms().begin(), f.atoms().end()),
                                f.mass() * factor);
        } else {
          copy.scale *= factor;
          return copy;
        }
      },
      family_);
  return IntensityModel(std::move(g), domain_);
}

bool IntensityModel::is_zero() const {
  return std::visit(
      [](const auto& f) -> bool {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ClosedForm>) {
          if (f.multiplier == 0.0) return true;
          return (f.kind == ClosedFormKind::constant && f.params[0] == 0.0) ||
                 (f.kind == ClosedFormKind::linear_decreasing && f.params[0] == 0.0) ||
                 (f.kind == ClosedFormKind::exp_sine && f.params[0] == 0.0);
        } else if constexpr (std::is_same_v<T, PiecewiseConstant>) {
          return std::all_of(f.values.begin(), f.values.end(), [](double v) { return v == 0.0; });
        } else if constexpr (std::is_same_v<T, UniformMixture>) {
          return f.mass() == 0.0;
        } else {
          return f.scale == 0.0;
        }
      },
      family_);
}

std::string_view IntensityModel::variant_name() const {
  static constexpr std::array<std::string_view, 5> names{
      "closed_form", "piecewise_constant", "uniform_mixture", "log_spline", "log_linear"};
  return names[family_.index()];
}

Decomposition decompose(const IntensityModel& lambda) {
  if (lambda.is_zero()) {
    throw std::domain_error("decompose: zero intensity has no normalized part");
  }
  const double m = lambda.mass();
  if (!(m > 0.0) || !finite(m)) {
    throw std::domain_error("decompose: mass must be finite and positive");
  }
  return {m, lambda.scaled(1.0 / m)};
}

// ---------------------------------------------------------------------------
// Log-spline and log-linear helpers

double log_normalizer(const SplineBasis& basis, std::span<const double> theta) {
  ++g_normalizer_calls;
  if (theta.size() != static_cast<std::size_t>(basis.dimension())) {
    throw std::invalid_argument("log_normalizer: coefficient dimension mismatch");
  }
  const double shift = *std::max_element(theta.begin(), theta.end());
  const auto cuts = basis.breakpoints();
  const double s = quadrature::integrate(
      [&](double x) { return std::exp(basis.dot(theta, x) - shift); }, cuts);
  return shift + std::log(s);
}

std::uint64_t log_normalizer_calls() noexcept { return g_normalizer_calls; }

double eval_log_spline(const SplineBasis& basis, std::span<const double> theta, double x) {
  const double c = log_normalizer(basis, theta);
  return std::exp(basis.dot(theta, x) - c);
}

double eval_log_linear(std::string_view basis_id, std::span<const double> theta, double scale,
                       double x) {
  if (basis_id != "fourier") {
    throw std::invalid_argument("eval_log_linear: unknown basis '" + std::string(basis_id) + "'");
  }
  double e = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    e += theta[j] * fourier_basis(static_cast<int>(j) + 1, x);
  }
  return scale * std::exp(e);
}

IntensityModel normalized_log_spline(const SplineBasis& basis, std::vector<double> theta,
                                     Domain domain) {
  const double c = log_normalizer(basis, theta);
  const double scale = std::exp(-c) / domain.length();
  return IntensityModel(LogSpline{basis, std::move(theta), scale}, domain);
}

}  // namespace aalen
