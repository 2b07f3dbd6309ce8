#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "aalen/intensity.hpp"
#include "aalen/processes.hpp"
#include "aalen/record.hpp"

namespace aalen {

struct Interval {
  double lo;
  double hi;

  bool operator==(const Interval&) const = default;
};

enum class TestSide { A, Ac };

/**
 * One-alternative test of λ0 against λ1 on the region A = {λ1 >= λ0} or on
 * its complement, whichever carries more weighted distance.
 */
struct TestSpec {
  IntensityModel lambda1;
  IntensityModel lambda0;
  ModelEnvironment env;
  std::vector<Interval> region;      // A
  std::vector<Interval> complement;  // Ω \ A
  double d_a = 0.0;   // ∫_A (λ1 - λ0) μ̃
  double d_ac = 0.0;  // ∫_Ac (λ0 - λ1) μ̃
  double u = 0.0;
  double v0 = 0.0;   // (1 + α) ∫_Ω λ0 μ̃
  double rho = 0.0;  // √(2 n v0 u) + u / 3
  TestSide side = TestSide::A;
};

/// Sorted disjoint intervals of Ω where λ1 >= λ0; boundaries to 1e-10.
std::vector<Interval> region_where_greater(const IntensityModel& lambda1,
                                           const IntensityModel& lambda0, Domain omega,
                                           std::span<const double> extra_breaks = {});

/// ∫_Ω |λ - λ'| μ̃.
double weighted_l1(const IntensityModel& lambda, const IntensityModel& lambdap,
                   const ModelEnvironment& env);

/// (1 + α) ∫_Ω λ μ̃.
double variance_proxy(const IntensityModel& lambda, const ModelEnvironment& env);

double test_threshold(int n, double v, double u);

/// Throws std::invalid_argument when λ1 and λ0 agree almost everywhere.
TestSpec build_test(const IntensityModel& lambda1, const IntensityModel& lambda0,
                    const ModelEnvironment& env, double u);

/// N(S) - ∫_S λ0 Y on the side's region S.
double test_statistic(const TestSpec& spec, const CountingRecord& record);

/// 1 when the test rejects λ0.
int apply_test(const TestSpec& spec, const CountingRecord& record);

struct BoundedFunction {
  std::function<double(double)> f;
  double bound = 1.0;          // sup |H|
  std::vector<double> breaks;  // where H may jump

  static BoundedFunction constant(double c);
  static BoundedFunction indicator(std::vector<Interval> set);
};

struct TailRow {
  double u = 0.0;
  double threshold = 0.0;  // √(2vu) + b u / 3
  double empirical = 0.0;  // tail frequency among replicates in Γ_n
  double bound = 0.0;      // 2 e^{-u}
  double se = 0.0;
  int in_gamma = 0;
  bool pass = false;
};

/**
 * Monte-Carlo check of P(|∫H (dN - Y λ dt)| >= √(2vu) + bu/3, Γ_n) <= 2e^{-u}.
 * Throws std::invalid_argument naming the replicate if ∫H² Y λ exceeds v on
 * any sampled path in Γ_n.
 */
std::vector<TailRow> bernstein_tail_check(const BoundedFunction& H, const IntensityModel& lambda,
                                          const ModelSpec& spec, double v,
                                          std::span<const double> u_grid, int replicates,
                                          std::uint64_t seed);

struct TypeOneRow {
  double u = 0.0;
  int n = 0;
  double empirical_type1 = 0.0;
  double bound = 0.0;
  double se = 0.0;
  bool pass = false;
};

/// Rejection frequency of the test built for each u, on records simulated
/// under λ0 (rejections counted on Γ_n only). Replicates are shared across u.
std::vector<TypeOneRow> type_one_study(const IntensityModel& lambda1, const ModelSpec& null_spec,
                                       std::span<const double> u_grid, int replicates,
                                       std::uint64_t seed, double gamma_alpha = 0.5);

}  // namespace aalen
