#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aalen/spline.hpp"

namespace aalen {

/// Closed interval Ω = [lo, hi] on which an intensity is estimated.
struct Domain {
  double lo = 0.0;
  double hi = 1.0;

  double length() const noexcept { return hi - lo; }
  bool contains(double t) const noexcept { return t >= lo && t <= hi; }
  bool operator==(const Domain&) const = default;
};

/// Registry of closed-form intensities, referenced by id in serialized specs.
enum class ClosedFormKind {
  constant,           // value
  linear_decreasing,  // max(level - slope * t, 0)
  exp_sine,           // scale * exp(amplitude * sin(2 pi frequency t))
  weibull_hazard,     // (shape / scale) (t / scale)^(shape - 1)
};

struct ClosedFormInfo {
  ClosedFormKind kind;
  std::string_view id;
  std::array<std::string_view, 3> params;
  int param_count;
};

std::span<const ClosedFormInfo> closed_form_registry();
const ClosedFormInfo& closed_form_info(ClosedFormKind kind);
const ClosedFormInfo& closed_form_info(std::string_view id);

struct ClosedForm {
  ClosedFormKind kind = ClosedFormKind::constant;
  std::array<double, 3> params{};
  double multiplier = 1.0;

  bool operator==(const ClosedForm&) const = default;
};

/// Right-continuous step function; zero outside [breaks.front(), breaks.back()).
struct PiecewiseConstant {
  std::vector<double> breaks;
  std::vector<double> values;

  bool operator==(const PiecewiseConstant&) const = default;
};

struct MixtureAtom {
  double theta;
  double weight;

  bool operator==(const MixtureAtom&) const = default;
};

/**
 * mass * sum_l w_l 1{0 <= x < theta_l} / theta_l with x = t - lo.
 *
 * Every member of this family is non-increasing in t. Sorted atom
 * locations and suffix sums are cached so evaluation is O(log L).
 */
class UniformMixture {
 public:
  UniformMixture(std::vector<MixtureAtom> atoms, double mass = 1.0);

  std::span<const MixtureAtom> atoms() const noexcept { return atoms_; }
  double mass() const noexcept { return mass_; }

  /// Normalized density at offset x.
  double density(double x) const noexcept;
  /// Normalized distribution function at offset x.
  double cumulative(double x) const noexcept;
  double max_theta() const noexcept { return sorted_theta_.back(); }

  bool operator==(const UniformMixture& o) const {
    return atoms_ == o.atoms_ && mass_ == o.mass_;
  }

 private:
  std::vector<MixtureAtom> atoms_;
  double mass_;
  std::vector<double> sorted_theta_;
  std::vector<double> prefix_weight_;      // sum of w over atoms with index < k
  std::vector<double> suffix_height_;      // sum of w/theta over index >= k
};

/// scale * exp(theta' B(x)), x = (t - lo) / (hi - lo).
struct LogSpline {
  SplineBasis basis;
  std::vector<double> coef;
  double scale = 1.0;

  bool operator==(const LogSpline&) const = default;
};

/// scale * exp(sum_j theta_j phi_j(x)) for an orthonormal basis with phi_1 = 1.
struct LogLinear {
  std::string basis = "fourier";
  std::vector<double> coef;
  double scale = 1.0;

  bool operator==(const LogLinear&) const = default;
};

/// j-th (1-based) function of the orthonormal cosine/sine system on [0, 1].
double fourier_basis(int j, double x) noexcept;

/**
 * A non-negative intensity on a domain Ω, in one of the supported families.
 *
 * Immutable after construction. Evaluates to zero outside Ω.
 */
class IntensityModel {
 public:
  using Family =
      std::variant<ClosedForm, PiecewiseConstant, UniformMixture, LogSpline, LogLinear>;

  IntensityModel(Family family, Domain domain);

  static IntensityModel constant(double value, Domain domain);

  double operator()(double t) const;

  /// Integral over [a, b] ∩ Ω.
  double integral(double a, double b) const;
  double mass() const { return integral(domain_.lo, domain_.hi); }

  /// Points inside Ω where the function may be non-smooth.
  std::vector<double> breakpoints() const;

  /// Panels a composite quadrature over Ω should use for this family.
  int quadrature_panels() const;

  /// Finite upper bound on sup_Ω λ, or +inf when none exists.
  double sup_bound() const;

  IntensityModel scaled(double factor) const;

  bool is_zero() const;

  const Family& family() const noexcept { return family_; }
  const Domain& domain() const noexcept { return domain_; }
  std::string_view variant_name() const;

  bool operator==(const IntensityModel&) const = default;

 private:
  Family family_;
  Domain domain_;
};

/// λ = M_λ · λ̄ with ∫_Ω λ̄ = 1.
struct Decomposition {
  double mass;
  IntensityModel normalized;
};

/// Throws std::domain_error for the zero intensity.
Decomposition decompose(const IntensityModel& lambda);

double eval_uniform_mixture(std::span<const MixtureAtom> atoms, double x);

/// c(θ) = log ∫_0^1 exp(θ' B(x)) dx.
double log_normalizer(const SplineBasis& basis, std::span<const double> theta);

/// Number of log_normalizer calls made on this thread.
std::uint64_t log_normalizer_calls() noexcept;

/// Normalized log-spline density exp(θ' B(x) - c(θ)) on [0, 1].
double eval_log_spline(const SplineBasis& basis, std::span<const double> theta, double x);

/// A exp(sum_j θ_j φ_j(x)) on [0, 1].
double eval_log_linear(std::string_view basis_id, std::span<const double> theta,
                       double scale, double x);

/// A · exp(θ'B) rescaled so its integral over `domain` is one.
IntensityModel normalized_log_spline(const SplineBasis& basis, std::vector<double> theta,
                                     Domain domain = {});

}  // namespace aalen
