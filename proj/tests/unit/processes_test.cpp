#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "aalen/io.hpp"
#include "aalen/processes.hpp"
#include "aalen/random.hpp"
#include "aalen/stats.hpp"

using namespace aalen;

namespace {

const Domain kUnit{0.0, 1.0};

IntensityModel linear_decreasing() {
  return IntensityModel(ClosedForm{ClosedFormKind::linear_decreasing, {2.0, 2.0, 0.0}, 1.0}, kUnit);
}

PoissonModel poisson(const IntensityModel& l, int n) { return {l, n, 1.0, std::nullopt, std::nullopt}; }

MarkovModel two_state(double r12, double r21, int n) {
  MarkovModel m;
  m.spec.states = {"1", "2"};
  m.spec.initial = {1.0, 0.0};
  m.spec.rates = {{{"1", "2"}, IntensityModel::constant(r12, kUnit)},
                  {{"2", "1"}, IntensityModel::constant(r21, kUnit)}};
  m.target = {{"1", "2"}};
  m.n = n;
  return m;
}

CensoringModel exp_censoring(double c, int n) {
  return {IntensityModel::constant(1.0, kUnit), {CensoringKind::fixed, c}, n, 1.0};
}

}  // namespace

TEST(Poisson, NullIntensityHasNoEvents) {
  const auto rec = simulate(poisson(IntensityModel::constant(0.0, kUnit), 50), 3);
  EXPECT_EQ(rec.count(), 0u);
  EXPECT_EQ(rec.exposure()(0.5), 50.0);
}

TEST(Poisson, MeanCountMatchesIntegral) {
  const int n = 1000;
  std::vector<double> per_unit;
  for (int r = 0; r < 500; ++r) {
    per_unit.push_back(static_cast<double>(simulate(poisson(linear_decreasing(), n), derive_seed(1, r)).count()) / n);
  }
  EXPECT_NEAR(stats::mean(per_unit), 1.0, 3.0 * stats::std_error(per_unit));
}

TEST(Poisson, SameSeedIsBitIdentical) {
  const auto a = simulate(poisson(linear_decreasing(), 200), 42);
  const auto b = simulate(poisson(linear_decreasing(), 200), 42);
  EXPECT_EQ(a, b);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_NE(a, simulate(poisson(linear_decreasing(), 200), 43));
}

TEST(Poisson, RejectsInvalidDominatingConstant) {
  auto m = poisson(linear_decreasing(), 10);
  m.lambda_max = 1.0;  // sup λ0 = 2
  EXPECT_THROW(simulate(m, 1), std::invalid_argument);
  m.lambda_max = std::numeric_limits<double>::infinity();
  EXPECT_THROW(simulate(m, 1), std::invalid_argument);
}

TEST(Poisson, ConstantCountsArePoisson) {
  // λ0 ≡ 2, n = 5: N_T ~ Poisson(10).
  const double mu = 10.0;
  const int reps = 2000;
  std::vector<double> observed(19, 0.0);
  for (int r = 0; r < reps; ++r) {
    const auto c = simulate(poisson(IntensityModel::constant(2.0, kUnit), 5), derive_seed(9, r)).count();
    const auto bin = c <= 3 ? 0 : std::min<std::size_t>(c - 3, 18);
    observed[bin] += 1.0;
  }
  std::vector<double> pmf(40);
  for (int k = 0; k < 40; ++k) pmf[k] = std::exp(k * std::log(mu) - mu - std::lgamma(k + 1.0));
  std::vector<double> expected(19, 0.0);
  for (int k = 0; k <= 3; ++k) expected[0] += reps * pmf[k];
  for (int k = 4; k < 21; ++k) expected[k - 3] = reps * pmf[k];
  double tail = 1.0;
  for (int k = 0; k < 21; ++k) tail -= pmf[k];
  expected[18] = reps * tail;
  EXPECT_GT(stats::chi_square(observed, expected).p_value, 0.01);
}

TEST(Censoring, EveryoneCensoredAtZero) {
  const auto rec = simulate(exp_censoring(0.0, 40), 5);
  EXPECT_EQ(rec.count(), 0u);
  EXPECT_EQ(rec.exposure()(0.25), 0.0);
  EXPECT_EQ(rec.exposure()(1.0), 0.0);
}

TEST(Censoring, AllAtRiskInitially) {
  const auto rec = simulate(exp_censoring(1.0, 40), 5);
  EXPECT_EQ(rec.exposure()(0.0), 40.0);
  EXPECT_EQ(rec.audit().size(), 40u);
}

TEST(Censoring, MeanCountMatchesExponentialCdf) {
  const int n = 100;
  std::vector<double> counts;
  for (int r = 0; r < 1000; ++r) {
    counts.push_back(static_cast<double>(simulate(exp_censoring(1.0, n), derive_seed(11, r)).count()));
  }
  EXPECT_NEAR(stats::mean(counts), n * (1.0 - std::exp(-1.0)), 3.0 * stats::std_error(counts));
}

TEST(Censoring, ExposureDropsByOnePerExit) {
  const CensoringModel m{IntensityModel(ClosedForm{ClosedFormKind::weibull_hazard, {1.5, 1.0, 0.0}, 1.0}, kUnit),
                         {CensoringKind::exponential, 0.7}, 60, 1.0};
  const auto rec = simulate(m, 17);
  const auto v = rec.exposure().values();
  for (std::size_t k = 1; k < v.size(); ++k) EXPECT_LE(v[k], v[k - 1]);
  int exits = 0;
  for (const auto& o : rec.audit()) exits += o.z < 1.0;
  EXPECT_EQ(v.front() - v.back(), static_cast<double>(exits));
  // Events are the uncensored exits.
  int deaths = 0;
  for (const auto& o : rec.audit()) deaths += o.delta;
  EXPECT_EQ(rec.count(), static_cast<std::size_t>(deaths));
}

TEST(Censoring, RejectsBadInput) {
  EXPECT_THROW(simulate(exp_censoring(1.0, 0), 1), std::invalid_argument);
}

TEST(Markov, FrozenChain) {
  const auto rec = simulate(two_state(0.0, 0.0, 30), 2);
  EXPECT_EQ(rec.count(), 0u);
  EXPECT_EQ(rec.exposure().max_value(), 30.0);
  EXPECT_EQ(rec.exposure()(0.9), 30.0);
}

TEST(Markov, TransitionCountMatchesOccupancy) {
  // p1(t) = (1 + e^{-2t}) / 2 for unit rates starting in state 1.
  const int n = 200;
  const double want = n * (0.5 + (1.0 - std::exp(-2.0)) / 4.0);
  std::vector<double> counts;
  for (int r = 0; r < 500; ++r) {
    counts.push_back(static_cast<double>(simulate(two_state(1.0, 1.0, n), derive_seed(13, r)).count()));
  }
  EXPECT_NEAR(stats::mean(counts), want, 3.0 * stats::std_error(counts));
}

TEST(Markov, OccupancyMatchesClosedForm) {
  const auto occ = markov_occupancy(two_state(1.0, 1.0, 1).spec, 1.0, 200);
  for (std::size_t i = 0; i < occ.size(); ++i) {
    const double t = static_cast<double>(i) / 200.0;
    EXPECT_NEAR(occ[i][0], 0.5 * (1.0 + std::exp(-2.0 * t)), 1e-9);
  }
}

TEST(Markov, AggregationIdentity) {
  std::vector<CountingRecord> parts;
  std::size_t total = 0;
  for (int i = 0; i < 5; ++i) {
    parts.push_back(simulate(two_state(1.0, 2.0, 1), derive_seed(21, i)));
    total += parts.back().count();
  }
  const auto agg = aggregate(parts);
  EXPECT_EQ(agg.count(), total);
  EXPECT_EQ(agg.n(), 5);
  double y = 0.0;
  for (const auto& p : parts) y += p.exposure().total();
  EXPECT_NEAR(agg.exposure().total(), y, 1e-12);
}

TEST(Markov, RejectsUnknownLabelsAndNegativeRates) {
  auto m = two_state(1.0, 1.0, 10);
  m.target = {{"1", "3"}};
  EXPECT_THROW(simulate(m, 1), std::invalid_argument);
  EXPECT_THROW(two_state(-1.0, 1.0, 10), std::invalid_argument);
}

TEST(Compensator, MartingaleMeanZeroForEachModel) {
  const std::vector<ModelSpec> specs{poisson(linear_decreasing(), 100), exp_censoring(1.0, 100),
                                     two_state(1.0, 0.5, 100)};
  for (std::size_t m = 0; m < specs.size(); ++m) {
    std::vector<double> gap;
    for (int r = 0; r < 400; ++r) {
      const auto rec = simulate(specs[m], derive_seed(30 + m, r));
      gap.push_back(static_cast<double>(rec.count()) - compensator(rec, true_intensity(specs[m])));
    }
    EXPECT_LE(std::abs(stats::mean(gap)), 4.0 * stats::std_error(gap)) << model_name(specs[m]);
  }
}

TEST(GammaEvent, PoissonHoldsTrivially) {
  const auto env = poisson_environment(100, 1.0, kUnit);
  const auto rep = check_gamma_event(simulate(poisson(linear_decreasing(), 100), 1), env);
  EXPECT_TRUE(rep.holds);
  EXPECT_EQ(rep.sup_gap, 0.0);
}

TEST(GammaEvent, ExposureOutsideOmegaFails) {
  const auto env = poisson_environment(10, 1.0, Domain{0.0, 0.5});
  CountingRecord::Fields f;
  f.model = "poisson";
  f.n = 10;
  f.events = {0.2, 0.8};
  f.exposure = StepFunction::constant(0.0, 1.0, 10.0);
  const auto rep = check_gamma_event(CountingRecord(f), env);
  EXPECT_FALSE(rep.holds);
  EXPECT_EQ(rep.sup_outside, 10.0);
}

TEST(GammaEvent, CensoringProbabilityGrowsWithN) {
  std::vector<double> freq;
  for (int n : {200, 800, 3200}) {
    const auto spec = exp_censoring(1.0, n);
    const auto env = environment(spec);
    int hits = 0;
    for (int r = 0; r < 500; ++r) hits += check_gamma_event(simulate(spec, derive_seed(n, r)), env).holds;
    freq.push_back(hits / 500.0);
  }
  EXPECT_LE(freq[0], freq[1]);
  EXPECT_LE(freq[1], freq[2]);
  EXPECT_GE(freq[2], 0.95);
}

TEST(Environment, CensoringSurvivalIsExact) {
  const auto env = environment(exp_censoring(1.0, 50));
  for (double t : {0.0, 0.3, 0.7, 1.0}) EXPECT_NEAR(env.mu_tilde(t), std::exp(-t), 1e-12);
  EXPECT_NEAR(env.m1, std::exp(-1.0), 1e-9);
  EXPECT_NEAR(env.m2, 1.0, 1e-12);
  EXPECT_NO_THROW(env.validate());
}

TEST(Environment, ValidateRejectsBadAlpha) {
  auto env = poisson_environment(10, 1.0, kUnit);
  env.gamma_alpha = 1.0;
  EXPECT_THROW(env.validate(), std::invalid_argument);
}

TEST(MomentCondition, PoissonIsExactlyZero) {
  for (int k : {2, 3}) {
    EXPECT_EQ(moment_condition_estimate(poisson(linear_decreasing(), 100), k, 20, 1).value, 0.0);
  }
}

TEST(MomentCondition, CensoringRatioBounded) {
  const std::vector<int> grid{100, 400, 1600};
  const auto study = moment_condition_study(exp_censoring(1.0, 100), grid, 2, 300, 7);
  EXPECT_TRUE(study.bounded);
  EXPECT_EQ(study.rows.size(), 3u);
}

TEST(MomentCondition, RejectsFirstMoment) {
  EXPECT_THROW(moment_condition_estimate(exp_censoring(1.0, 10), 1, 10, 1), std::invalid_argument);
}
