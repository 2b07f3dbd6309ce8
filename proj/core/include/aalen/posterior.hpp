#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aalen/intensity.hpp"
#include "aalen/likelihood.hpp"
#include "aalen/random.hpp"
#include "aalen/record.hpp"

namespace aalen {

/// Positive continuous prior on a mass or scale parameter.
struct ScalePrior {
  enum class Kind { gamma, lognormal };
  Kind kind = Kind::gamma;
  double shape = 1.0;  // gamma
  double rate = 1.0;   // gamma
  double log_mean = 0.0;  // lognormal
  double log_sd = 1.0;    // lognormal

  double log_density(double x) const;
  double sample(Stream& rng) const;
  void validate() const;
};

/**
 * Dirichlet-process mixture of uniform kernels U(0, θ) with concentration A
 * and base density g(θ) ∝ θ^a e^{-θ} on (0, θ_max], truncated after L sticks.
 */
struct DpmPriorSpec {
  double concentration = 1.0;
  double base_exponent = 1.0;
  /// Upper end of the base measure; <= 0 means the length of Ω.
  double base_max = 0.0;
  int truncation = 30;
  ScalePrior mass_prior;

  void validate() const;
};

struct SplinePriorSpec {
  int order = 2;
  double smoothness_alpha = 1.0;
  /// Fixed dimension J; <= 0 selects floor(n^{1/(2α+1)}), at least `order`.
  int dimension = 0;
  /// Coefficients are uniform on [-box, box]^J.
  double box = 4.0;
  ScalePrior scale_prior;

  int dimension_for(int n) const;
  SplineBasis basis_for(int n) const;
  void validate() const;
};

struct LogLinearPriorSpec {
  std::string basis = "fourier";
  double tau0 = 1.0;
  double beta = 0.6;
  /// Coefficient density ∝ exp(-|z|^p / p).
  double p = 2.0;
  /// log π(J) = -J (log J)^s + const on 1..j_max.
  double s = 1.0;
  int j_max = 30;
  ScalePrior scale_prior;

  double log_dimension_prior(int J) const;  // unnormalized
  double coefficient_scale(int j) const { return tau0 * std::pow(static_cast<double>(j), -beta); }
  void validate() const;
};

struct McmcSettings {
  int iterations = 4000;
  int burn_in = 2000;
  int stride = 5;
  double initial_step = 0.5;
  double target_acceptance = 0.44;
  bool adapt = true;

  void validate() const;
};

struct MoveStats {
  std::string name;
  long proposed = 0;
  long accepted = 0;
  bool gibbs = false;

  double rate() const { return proposed ? static_cast<double>(accepted) / proposed : 0.0; }
};

struct PosteriorChain {
  std::vector<IntensityModel> draws;
  std::vector<double> log_likelihood;  // per draw
  std::vector<MoveStats> moves;        // counted after burn-in
  int iterations = 0;
  int burn_in = 0;
  int stride = 1;
  std::uint64_t seed = 0;
};

/// Raised when a chain fails its post-burn-in acceptance check.
class ChainDiagnosticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stick-breaking weights from L - 1 stick fractions; the last weight takes
/// the remaining length.
std::vector<double> stick_weights(std::span<const double> sticks);

// ---------------------------------------------------------------- DPM

struct DpmState {
  std::vector<double> sticks;  // L - 1 fractions in (0, 1)
  std::vector<double> theta;   // L locations in (0, θ_max]
  double mass = 1.0;
};

class DpmSampler {
 public:
  DpmSampler(const CountingRecord& record, const DpmPriorSpec& spec, Domain domain,
             double initial_step = 0.5);

  DpmState prior_draw(Stream& rng) const;
  /// One Metropolis-within-Gibbs sweep. Adapts step sizes when `adapt_round`
  /// is positive.
  void sweep(DpmState& s, Stream& rng, int adapt_round = 0, double target = 0.44);
  IntensityModel intensity(const DpmState& s) const;
  double log_likelihood(const DpmState& s) const;

  std::vector<MoveStats>& moves() noexcept { return moves_; }
  double theta_max() const noexcept { return theta_max_; }

 private:
  double log_target_sticks(const DpmState& s, double loglik) const;

  DpmPriorSpec spec_;
  Domain domain_;
  double theta_max_;
  MixtureLikelihood lik_;
  std::vector<double> stick_step_;
  std::vector<double> theta_step_;
  double mass_step_;
  std::vector<MoveStats> moves_;
};

// ---------------------------------------------------------- log-spline

struct SplineState {
  std::vector<double> theta;
  double scale = 1.0;
};

/**
 * Sampler for A exp(θ'B) with θ uniform on a box. Works with the
 * non-normalized form only: the likelihood needs sum_i B(t_i) and a fixed
 * exposure quadrature, so no normalizing constant is ever computed.
 */
class LogSplineSampler {
 public:
  LogSplineSampler(const CountingRecord& record, const SplinePriorSpec& spec, SplineBasis basis,
                   Domain domain, double initial_step = 0.5);

  SplineState prior_draw(Stream& rng) const;
  void sweep(SplineState& s, Stream& rng, int adapt_round = 0, double target = 0.44);
  IntensityModel intensity(const SplineState& s) const;
  double log_likelihood(const SplineState& s) const;

  std::vector<MoveStats>& moves() noexcept { return moves_; }

 private:
  void refresh(const SplineState& s);

  SplinePriorSpec spec_;
  SplineBasis basis_;
  Domain domain_;
  double events_ = 0.0;
  bool outside_ = false;
  std::vector<double> suff_;        // sum_i B_j(x_i)
  std::vector<double> weight_;      // quadrature weight · Y per node
  std::vector<int> first_;          // first nonzero basis index per node
  std::vector<double> basis_vals_;  // q values per node
  std::vector<std::vector<std::size_t>> support_;  // nodes touched by each coefficient
  std::vector<double> eta_;         // θ'B at each node for the current state
  std::vector<double> theta_step_;
  double shift_step_;
  double scale_step_;
  std::vector<MoveStats> moves_;
};

// ---------------------------------------------------------- log-linear

struct LogLinearState {
  std::vector<double> theta;  // size J
  double scale = 1.0;
};

class LogLinearSampler {
 public:
  LogLinearSampler(const CountingRecord& record, const LogLinearPriorSpec& spec, Domain domain,
                   double initial_step = 0.5);

  LogLinearState prior_draw(Stream& rng) const;
  void sweep(LogLinearState& s, Stream& rng, int adapt_round = 0, double target = 0.44);
  IntensityModel intensity(const LogLinearState& s) const;
  double log_likelihood(const LogLinearState& s) const;

  std::vector<MoveStats>& moves() noexcept { return moves_; }

 private:
  double log_coef_prior(int j, double v) const;
  double draw_coef(int j, Stream& rng) const;
  double integral(std::span<const double> eta) const;

  LogLinearPriorSpec spec_;
  Domain domain_;
  double events_ = 0.0;
  bool outside_ = false;
  std::vector<double> suff_;     // sum_i φ_j(x_i), j = 1..j_max
  std::vector<double> weight_;
  std::vector<double> phi_;      // node-major, j_max values per node
  std::vector<double> eta_;
  std::vector<double> theta_step_;
  double scale_step_;
  std::vector<MoveStats> moves_;
};

// ------------------------------------------------------------- drivers

IntensityModel sample_prior(const DpmPriorSpec& spec, Domain domain, std::uint64_t seed);
IntensityModel sample_prior(const SplinePriorSpec& spec, int n, Domain domain, std::uint64_t seed);
IntensityModel sample_prior(const LogLinearPriorSpec& spec, Domain domain, std::uint64_t seed);

/// Ω defaults to [0, T] of the record. Throws ChainDiagnosticError when the
/// post-burn-in Metropolis acceptance is below 1%.
PosteriorChain fit_dpm(const CountingRecord& record, const DpmPriorSpec& spec,
                       const McmcSettings& mcmc, std::uint64_t seed,
                       std::optional<Domain> domain = std::nullopt);
PosteriorChain fit_logspline(const CountingRecord& record, const SplinePriorSpec& spec,
                             const McmcSettings& mcmc, std::uint64_t seed,
                             std::optional<Domain> domain = std::nullopt);
PosteriorChain fit_loglinear(const CountingRecord& record, const LogLinearPriorSpec& spec,
                             const McmcSettings& mcmc, std::uint64_t seed,
                             std::optional<Domain> domain = std::nullopt);

inline constexpr int kBandGrid = 256;

struct PosteriorSummary {
  std::vector<double> l1_errors;  // per draw
  double mean_l1_error = 0.0;
  double median_l1_error = 0.0;
  double mass_outside_radius = 0.0;
  std::vector<double> grid;
  std::vector<double> mean;   // pointwise posterior mean
  std::vector<double> lower;  // 5%
  std::vector<double> upper;  // 95%
};

PosteriorSummary posterior_summary(const PosteriorChain& chain, const IntensityModel& lambda0,
                                   double radius);

/// Pointwise mean and 5% / 95% bands on a 256-point grid; error fields empty.
PosteriorSummary posterior_bands(const PosteriorChain& chain);

/// Fraction of errors strictly above `radius`.
double mass_outside(std::span<const double> l1_errors, double radius);

}  // namespace aalen
