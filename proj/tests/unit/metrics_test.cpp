#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "aalen/metrics.hpp"
#include "aalen/processes.hpp"
#include "aalen/random.hpp"
#include "generators.hpp"

using namespace aalen;

namespace {

const Domain kUnit{0.0, 1.0};

IntensityModel uniform_on(double theta, Domain d) { return IntensityModel(UniformMixture({{theta, 1.0}}), d); }

/// exp(ε sin 2πx) / I0(ε): a normalized perturbation of the flat density.
IntensityModel tilted(double eps) {
  return IntensityModel(ClosedForm{ClosedFormKind::exp_sine, {1.0, eps, 1.0}, 1.0 / std::cyl_bessel_i(0.0, eps)}, kUnit);
}

template <class F>
double riemann(F&& f, int cells = 1000000) {
  const double h = 1.0 / cells;
  double s = 0.0;
  for (int i = 0; i < cells; ++i) s += f((i + 0.5) * h);
  return s * h;
}

}  // namespace

TEST(L1, IdenticalIsZero) {
  const auto f = tilted(0.7);
  EXPECT_EQ(l1_distance(f, f), 0.0);
}

TEST(L1, UniformPair) {
  const Domain d{0.0, 2.0};
  EXPECT_NEAR(l1_distance(uniform_on(1.0, d), uniform_on(2.0, d)), 1.0, 1e-12);
}

TEST(L1, DomainMismatchThrows) {
  EXPECT_THROW(l1_distance(IntensityModel::constant(1.0, kUnit), IntensityModel::constant(1.0, {0.0, 2.0})),
               std::invalid_argument);
}

TEST(L1, MatchesRiemannAcrossCrossings) {
  const auto f = tilted(1.2);
  const auto g = IntensityModel::constant(1.0, kUnit);
  const double want = riemann([&](double x) { return std::abs(f(x) - 1.0); });
  EXPECT_NEAR(l1_distance(f, g), want, 1e-9);
}

TEST(L1, SymmetricAndTriangle) {
  Stream rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    const auto a = testgen::random_intensity(rng, kUnit, rep);
    const auto b = testgen::random_intensity(rng, kUnit, rep + 1);
    const auto c = testgen::random_intensity(rng, kUnit, rep + 2);
    const double ab = l1_distance(a, b);
    EXPECT_GE(ab, 0.0);
    EXPECT_NEAR(ab, l1_distance(b, a), 1e-12);
    EXPECT_LE(ab, l1_distance(a, c) + l1_distance(c, b) + 1e-10);
  }
}

TEST(Hellinger, IdenticalIsZero) {
  const auto f = tilted(0.3);
  EXPECT_NEAR(hellinger(f, f), 0.0, 1e-15);
}

TEST(Hellinger, UniformPair) {
  const Domain d{0.0, 2.0};
  const double h = hellinger(uniform_on(1.0, d), uniform_on(2.0, d));
  EXPECT_NEAR(h * h, 2.0 - std::numbers::sqrt2, 1e-12);
}

TEST(Hellinger, RejectsUnnormalizedInput) {
  EXPECT_THROW(hellinger(IntensityModel::constant(2.0, kUnit), IntensityModel::constant(1.0, kUnit)),
               std::invalid_argument);
}

TEST(Hellinger, SandwichWithL1) {
  Stream rng(2);
  for (int rep = 0; rep < 200; ++rep) {
    const auto f = testgen::random_density(rng, kUnit, rep);
    const auto g = testgen::random_density(rng, kUnit, rep + 2);
    const double h = hellinger(f, g);
    const double l1 = l1_distance(f, g);
    EXPECT_NEAR(h, hellinger(g, f), 1e-12);
    EXPECT_LE(h * h, 2.0 + 1e-12);
    EXPECT_LE(h * h, l1 + 1e-10);
    EXPECT_LE(l1, 2.0 * h + 1e-10);
  }
}

TEST(EjMoment, IdenticalIsZero) {
  const auto f = tilted(0.5);
  for (int j = 2; j <= 8; ++j) EXPECT_NEAR(ej_moment(f, f, j), 0.0, 1e-15);
}

TEST(EjMoment, LogLinearRampMatchesRiemann) {
  const auto f0 = IntensityModel::constant(1.0, kUnit);
  const IntensityModel f(ClosedForm{ClosedFormKind::weibull_hazard, {2.0, 1.0, 0.0}, 1.0}, kUnit);  // 2x
  const double ln2 = std::numbers::ln2;
  const double exact = ln2 * ln2 - 2.0 * ln2 + 2.0;
  const double e2 = ej_moment(f0, f, 2);
  EXPECT_NEAR(e2, exact, 1e-9);
  // The midpoint sum misses O(h log² h) at the singular left end.
  const double brute = riemann([&](double x) { return std::pow(std::log(2.0 * x), 2); });
  EXPECT_NEAR(e2, brute, 1e-4);
}

TEST(EjMoment, SignIrrelevantUnderAbsoluteValue) {
  // log-ratio ±ε on two halves: every E_j equals ε^j.
  const auto f0 = IntensityModel::constant(1.0, kUnit);
  const double e = 0.3;
  const double c = 2.0 / (std::exp(e) + std::exp(-e));
  const IntensityModel f(PiecewiseConstant{{0.0, 0.5, 1.0}, {c * std::exp(e), c * std::exp(-e)}}, kUnit);
  const double shift = std::log(c);
  for (int j = 2; j <= 5; ++j) {
    const double want = 0.5 * std::pow(std::abs(e + shift), j) + 0.5 * std::pow(std::abs(-e + shift), j);
    EXPECT_NEAR(ej_moment(f0, f, j), want, 1e-12);
  }
}

TEST(EjMoment, DivergesWhenDensityVanishes) {
  const Domain d{0.0, 2.0};
  EXPECT_EQ(ej_moment(uniform_on(2.0, d), uniform_on(1.0, d), 2), std::numeric_limits<double>::infinity());
}

TEST(EjMoment, Asymmetric) {
  EXPECT_GT(std::abs(ej_moment(tilted(0.2), tilted(1.5), 3) - ej_moment(tilted(1.5), tilted(0.2), 3)), 1e-3);
}

TEST(Phi, NonNegativeWithMinimumAtOne) {
  EXPECT_EQ(phi(1.0), 0.0);
  for (int i = 1; i <= 400; ++i) {
    const double x = i / 100.0;
    if (i != 100) {
      EXPECT_GT(phi(x), 0.0);
    }
  }
}

TEST(Kappa0, KnownValues) {
  EXPECT_NEAR(kappa0(1, 1, 1), 17.0, 1e-12);
  EXPECT_NEAR(kappa0(1, 1, 2), 28.5, 1e-12);
  EXPECT_GT(kappa0(0.3, 2.0, 0.1), 0.0);
  EXPECT_THROW(kappa0(0.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(kappa0(2.0, 1.0, 1.0), std::invalid_argument);
}

TEST(Bkn, PowerOfTwoOrder) {
  EXPECT_EQ((BknParams{0.1, 1.0, 2, 10}.k2()), 2);
  EXPECT_EQ((BknParams{0.1, 1.0, 3, 10}.k2()), 4);
  EXPECT_EQ((BknParams{0.1, 1.0, 5, 10}.k2()), 8);
  EXPECT_EQ((BknParams{0.1, 1.0, 8, 10}.k2()), 8);
}

TEST(Bkn, CenterIsMember) {
  const auto f0 = tilted(0.8);
  const auto r = bkn_membership(f0, f0, {0.01, sup_norm(f0) + 0.1, 3, 100});
  EXPECT_TRUE(r.member);
  EXPECT_NEAR(r.sup_ratio, 1.0, 1e-12);
  EXPECT_EQ(r.ej.size(), 3u);  // j = 2, 3, 4
}

TEST(Bkn, VanishingDensityViolatesRatioClause) {
  const auto f0 = IntensityModel::constant(1.0, kUnit);
  const IntensityModel f(ClosedForm{ClosedFormKind::linear_decreasing, {2.0, 2.0, 0.0}, 1.0}, kUnit);
  const auto r = bkn_membership(f0, f, {0.5, 4.0, 2, 100});
  EXPECT_FALSE(r.ratio_ok);
  EXPECT_FALSE(r.member);
}

TEST(Bkn, BoundaryByBisectionWithRiemannClauses) {
  const auto f0 = IntensityModel::constant(1.0, kUnit);
  const BknParams p{0.1, 4.0, 2, 200};
  double lo = 0.0;
  double hi = 1.0;
  ASSERT_TRUE(bkn_membership(f0, tilted(lo), p).member);
  ASSERT_FALSE(bkn_membership(f0, tilted(hi), p).member);
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    (bkn_membership(f0, tilted(mid), p).member ? lo : hi) = mid;
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LT(hi - lo, 1e-9);
  for (double eps : {lo, hi}) {
    const auto f = tilted(eps);
    const auto r = bkn_membership(f0, f, p);
    const double h2 = riemann([&](double x) { return std::pow(1.0 - std::sqrt(f(x)), 2); }, 200000);
    const double e2 = riemann([&](double x) { return std::pow(std::log(f(x)), 2); }, 200000);
    EXPECT_NEAR(r.hellinger_sq, h2, 1e-10);
    EXPECT_NEAR(r.ej[0], e2, 1e-10);
    EXPECT_NEAR(r.sup_ratio, std::cyl_bessel_i(0.0, eps) * std::exp(eps), 1e-9);
  }
}

TEST(KlAalen, IdenticalIsZero) {
  const auto env = poisson_environment(100, 1.0, kUnit);
  EXPECT_NEAR(kl_aalen(tilted(0.4), tilted(0.4), env), 0.0, 1e-12);
}

TEST(KlAalen, ConstantPair) {
  const int n = 250;
  const auto env = poisson_environment(n, 1.0, kUnit);
  const auto one = IntensityModel::constant(1.0, kUnit);
  const auto two = IntensityModel::constant(2.0, kUnit);
  EXPECT_NEAR(kl_aalen(one, two, env), n * (1.0 - std::numbers::ln2), 1e-10);
  EXPECT_NEAR(kl_aalen(two, one, env), n * (2.0 * std::numbers::ln2 - 1.0), 1e-10);
}

TEST(KlAalen, DecompositionMatchesDirect) {
  Stream rng(7);
  const CensoringModel cens{IntensityModel::constant(1.0, kUnit), {CensoringKind::exponential, 0.5}, 100, 1.0};
  const auto env = environment(ModelSpec(cens));
  for (int rep = 0; rep < 25; ++rep) {
    const auto a = testgen::random_intensity(rng, kUnit, rep);
    const auto b = testgen::random_intensity(rng, kUnit, rep + 3);
    const double dec = kl_aalen(a, b, env);
    const double dir = kl_aalen_direct(a, b, env);
    EXPECT_NEAR(dec, dir, 1e-8 * std::abs(dir)) << a.variant_name() << " vs " << b.variant_name();
  }
}

TEST(KlAalen, DivergesWhenIntensityVanishes) {
  const Domain d{0.0, 2.0};
  const auto env = poisson_environment(10, 2.0, d);
  EXPECT_EQ(kl_aalen(uniform_on(2.0, d), uniform_on(1.0, d), env), std::numeric_limits<double>::infinity());
}

TEST(MassNorm, EqualityCases) {
  const auto l0 = tilted(0.6);
  EXPECT_TRUE(mass_norm_inequality_check(l0, l0).holds);
  const auto r = mass_norm_inequality_check(l0.scaled(2.0), l0);
  EXPECT_TRUE(r.holds);
  EXPECT_NEAR(r.lhs, r.rhs, 1e-10);
  EXPECT_NEAR(r.lhs, l0.mass(), 1e-10);
}

TEST(MassNorm, RandomPairs) {
  Stream rng(8);
  for (int rep = 0; rep < 500; ++rep) {
    const auto a = testgen::random_intensity(rng, kUnit, rep);
    const auto b = testgen::random_intensity(rng, kUnit, rep / 5);
    EXPECT_TRUE(mass_norm_inequality_check(a, b).holds) << rep;
  }
}

TEST(V2, IdenticalIntensitiesGiveZero) {
  const auto one = IntensityModel::constant(1.0, kUnit);
  const ModelSpec spec = PoissonModel{one, 50, 1.0, std::nullopt, std::nullopt};
  EXPECT_EQ(v2_monte_carlo(one, one, spec, 100, 1).value, 0.0);
  EXPECT_THROW(v2_monte_carlo(one, one, spec, 99, 1), std::invalid_argument);
}

TEST(V2, PoissonConstantsAndLinearity) {
  const auto one = IntensityModel::constant(1.0, kUnit);
  const auto alt = IntensityModel::constant(1.2, kUnit);
  const double per_unit = std::pow(std::log(1.2), 2);
  for (int n : {100, 200, 400}) {
    const ModelSpec spec = PoissonModel{one, n, 1.0, std::nullopt, std::nullopt};
    const auto v = v2_monte_carlo(one, alt, spec, 4000, static_cast<std::uint64_t>(n));
    EXPECT_NEAR(v.value, n * per_unit, 4.0 * v.se) << "n=" << n;
  }
}
