#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "aalen/intensity.hpp"
#include "aalen/record.hpp"

namespace aalen {

/**
 * Everything the concentration conditions quantify over for one n:
 * the estimation set Ω, the normalized mean exposure μ̃_n = E[Y]/n, its
 * bounds m1 <= μ̃_n <= m2 on Ω, and the Γ_n tolerance α.
 */
struct ModelEnvironment {
  Domain omega;
  double horizon = 1.0;
  int n = 1;
  double m1 = 1.0;
  double m2 = 1.0;
  double gamma_alpha = 0.5;
  std::function<double(double)> mu_tilde;
  /// Points where μ̃_n may be non-smooth.
  std::vector<double> mu_breaks;

  double mu(double t) const { return n * mu_tilde(t); }

  /// Throws std::invalid_argument unless m1 <= μ̃_n <= m2 on a 4096-point
  /// grid over Ω, 0 < m1 <= m2 and α ∈ (0, 1).
  void validate() const;
};

inline constexpr int kEnvironmentGrid = 4096;

enum class CensoringKind { none, fixed, exponential };

struct CensoringSpec {
  CensoringKind kind = CensoringKind::fixed;
  double value = 1.0;  // fixed time c, or exponential rate

  double survival_left(double t) const;  // P(C >= t)
};

struct Transition {
  std::string from;
  std::string to;

  bool operator==(const Transition&) const = default;
};

struct MarkovRate {
  Transition transition;
  IntensityModel intensity;
};

/// Finite-state, time-inhomogeneous Markov chain.
struct MarkovSpec {
  std::vector<std::string> states;
  std::vector<MarkovRate> rates;
  std::vector<double> initial;

  /// Index of `label` in `states`; throws for unknown labels.
  std::size_t state_index(const std::string& label) const;
  void validate() const;
};

struct PoissonModel {
  IntensityModel intensity;
  int n = 1;
  double horizon = 1.0;
  std::optional<Domain> omega;  // defaults to [0, T]
  std::optional<double> lambda_max;
};

struct CensoringModel {
  IntensityModel hazard;
  CensoringSpec censoring;
  int n = 1;
  double horizon = 1.0;
};

struct MarkovModel {
  MarkovSpec spec;
  std::vector<Transition> target;
  int n = 1;
  double horizon = 1.0;
};

using ModelSpec = std::variant<PoissonModel, CensoringModel, MarkovModel>;

std::string_view model_name(const ModelSpec& spec);
int model_n(const ModelSpec& spec);
double model_horizon(const ModelSpec& spec);
ModelSpec with_n(ModelSpec spec, int n);

/// The intensity λ0 driving the counted process.
const IntensityModel& true_intensity(const ModelSpec& spec);
ModelSpec with_intensity(ModelSpec spec, const IntensityModel& lambda);

ModelEnvironment poisson_environment(int n, double horizon, Domain omega, double gamma_alpha = 0.5);
ModelEnvironment censoring_environment(const IntensityModel& hazard, const CensoringSpec& c, int n,
                                       double horizon, double gamma_alpha = 0.5);
ModelEnvironment markov_environment(const MarkovSpec& spec, std::span<const Transition> target,
                                    int n, double horizon, double gamma_alpha = 0.5);
ModelEnvironment environment(const ModelSpec& spec, double gamma_alpha = 0.5);

/// Occupancy probabilities P(X(t) = h) on a uniform grid of `steps` + 1
/// points over [0, T], by RK4 on the forward equation.
std::vector<std::vector<double>> markov_occupancy(const MarkovSpec& spec, double horizon,
                                                  int steps);

/// Poisson process with intensity n·λ0 on Ω by Lewis-Shedler thinning.
CountingRecord simulate_poisson(const IntensityModel& lambda0, const ModelEnvironment& env,
                                std::uint64_t seed,
                                std::optional<double> lambda_max = std::nullopt);

CountingRecord simulate_censoring(const IntensityModel& hazard, const CensoringSpec& censoring,
                                  int n, double horizon, std::uint64_t seed);

CountingRecord simulate_markov(const MarkovSpec& spec, int n, double horizon,
                               std::span<const Transition> target, std::uint64_t seed);

CountingRecord simulate(const ModelSpec& spec, std::uint64_t seed);

/// Superposition of independent records on a common horizon: events are
/// merged and exposures add.
CountingRecord aggregate(std::span<const CountingRecord> records);

/// ∫_0^T Y_t λ0(t) dt for a record.
double compensator(const CountingRecord& record, const IntensityModel& lambda0);

struct GammaReport {
  bool holds = false;
  double sup_gap = 0.0;      // sup_Ω |Y/n - μ̃_n|
  double tolerance = 0.0;    // α m1
  double sup_outside = 0.0;  // sup_{Ω^c} Y
};

GammaReport check_gamma_event(const CountingRecord& record, const ModelEnvironment& env);

struct MomentEstimate {
  int n = 0;
  int k = 0;
  double value = 0.0;  // E[(∫_Ω (Y - μ_n)^2)^k] / n^k
  double se = 0.0;
};

MomentEstimate moment_condition_estimate(const ModelSpec& spec, int k, int replicates,
                                         std::uint64_t seed);

struct MomentStudy {
  std::vector<MomentEstimate> rows;
  double bound = 0.0;  // common constant the ratios are checked against
  bool bounded = false;
};

/**
 * Ratio estimates over an n-grid. `bounded` holds when every ratio stays
 * below twice the ratio at the smallest n, with 3 standard errors of slack.
 */
MomentStudy moment_condition_study(const ModelSpec& spec, std::span<const int> n_grid, int k,
                                   int replicates, std::uint64_t seed);

}  // namespace aalen
