#pragma once

#include <cstdint>
#include <vector>

#include "aalen/intensity.hpp"
#include "aalen/processes.hpp"

namespace aalen {

/// Grid used for sup-norms and sup-ratios (plus every breakpoint).
inline constexpr int kSupGrid = 4096;

/// ∫_Ω |f - g|. Panels are split at breakpoints and at sign changes of f - g.
/// Throws std::invalid_argument when the domains differ.
double l1_distance(const IntensityModel& f, const IntensityModel& g);

/// Hellinger distance h with h² = ∫ (√f - √g)². Both inputs must integrate
/// to one within 1e-6.
double hellinger(const IntensityModel& f, const IntensityModel& g);

/// ∫ f0 |log f0 - log f|^j; +inf when f vanishes where f0 > 0.
double ej_moment(const IntensityModel& f0, const IntensityModel& f, int j);

/// sup_Ω f0 / f over the sup grid; +inf when f vanishes where f0 > 0.
double sup_ratio(const IntensityModel& f0, const IntensityModel& f);
double sup_norm(const IntensityModel& f);

/// x - 1 - log x, +inf for x <= 0.
double phi(double x);

/**
 * Constant bounding KL(λ0; λ) by κ0 n v² on the neighborhood:
 * m2² M0 {(4/m1)(1 + log(m2/m1))(1 + m2²/m1²) + m2 (2 M0 + 1)² / (m1² M0²)}.
 */
double kappa0(double m1, double m2, double M0);

struct BknParams {
  double v_n = 0.1;
  double H = 1.0;
  int k = 2;
  int n = 1;

  /// Smallest power of two >= k.
  int k2() const;
};

struct BknReport {
  double hellinger_sq = 0.0;
  double hellinger_bound = 0.0;  // v² / (1 + log sup_ratio)
  std::vector<double> ej;        // E_j for j = 2 .. k2
  double ej_max = 0.0;
  double ej_bound = 0.0;  // v²
  double sup_ratio = 0.0;
  double ratio_bound = 0.0;  // n^H
  double sup_density = 0.0;
  double density_bound = 0.0;  // H
  bool hellinger_ok = false;
  bool ej_ok = false;
  bool ratio_ok = false;
  bool density_ok = false;
  bool member = false;
};

/// Membership of λ̄ in the Hellinger / log-moment / sup-ratio neighborhood
/// of λ̄0.
BknReport bkn_membership(const IntensityModel& f0bar, const IntensityModel& fbar,
                         const BknParams& p);

/**
 * E[ℓ_n(λ0) - ℓ_n(λ)] = M_n(λ0)[KL(λ̄0n; λ̄n) + φ(M_n(λ)/M_n(λ0))], with
 * M_n(λ) = ∫_Ω λ μ_n and λ̄_n ∝ λ μ̃_n. +inf when λ vanishes where λ0 > 0.
 */
double kl_aalen(const IntensityModel& lambda0, const IntensityModel& lambda,
                const ModelEnvironment& env);

/// Same quantity as ∫_Ω (λ0 log(λ0/λ) - λ0 + λ) μ_n.
double kl_aalen_direct(const IntensityModel& lambda0, const IntensityModel& lambda,
                       const ModelEnvironment& env);

struct MassNormCheck {
  double lhs = 0.0;  // ‖λ - λ0‖₁
  double rhs = 0.0;  // max{(M ∨ M0) ‖λ̄ - λ̄0‖₁ / 2, |M - M0|}
  bool holds = false;
};

MassNormCheck mass_norm_inequality_check(const IntensityModel& lambda,
                                         const IntensityModel& lambda0);

struct VarianceEstimate {
  double value = 0.0;  // sample variance of ℓ_n(λ0) - ℓ_n(λ)
  double se = 0.0;
  double mean = 0.0;
  int replicates = 0;
};

/// Monte-Carlo V_2: records simulated from `spec` with its intensity
/// replaced by λ0. Requires at least 100 replicates.
VarianceEstimate v2_monte_carlo(const IntensityModel& lambda0, const IntensityModel& lambda,
                                const ModelSpec& spec, int replicates, std::uint64_t seed);

}  // namespace aalen
