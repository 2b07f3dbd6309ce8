#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "aalen/intensity.hpp"
#include "aalen/quadrature.hpp"
#include "aalen/random.hpp"
#include "aalen/spline.hpp"
#include "generators.hpp"

using namespace aalen;

TEST(SplineBasis, PartitionOfUnity) {
  for (int q : {1, 2, 3, 4}) {
    const SplineBasis b(q, 5);
    EXPECT_EQ(b.dimension(), 5 + q - 1);
    for (int i = 0; i <= 1024; ++i) {
      const auto v = b.evaluate(i / 1024.0);
      double s = 0.0;
      for (double x : v) {
        EXPECT_GE(x, 0.0);
        s += x;
      }
      EXPECT_NEAR(s, 1.0, 1e-12) << "q=" << q << " x=" << i / 1024.0;
    }
  }
}

TEST(SplineBasis, KnotsNonDecreasing) {
  const SplineBasis b(3, std::vector<double>{0.0, 0.1, 0.5, 1.0});
  const auto k = b.knots();
  for (std::size_t i = 1; i < k.size(); ++i) EXPECT_LE(k[i - 1], k[i]);
}

TEST(SplineBasis, LinearHatFunctions) {
  const SplineBasis b(2, 2);  // hats at 0, ½, 1
  const auto v = b.evaluate(0.25);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_NEAR(v[0], 0.5, 1e-15);
  EXPECT_NEAR(v[1], 0.5, 1e-15);
  EXPECT_NEAR(v[2], 0.0, 1e-15);
}

TEST(Decompose, Constant) {
  const auto d = decompose(IntensityModel::constant(2.0, {}));
  EXPECT_DOUBLE_EQ(d.mass, 2.0);
  EXPECT_NEAR(d.normalized(0.3), 1.0, 1e-15);
}

TEST(Decompose, ZeroIntensityHasNoNormalizedPart) {
  EXPECT_THROW(decompose(IntensityModel::constant(0.0, {})), std::domain_error);
}

TEST(Decompose, LogSplineMassIsScaleTimesExpNormalizer) {
  const SplineBasis b(3, 4);
  const std::vector<double> th{0.4, -0.3, 1.1, 0.2, -0.8, 0.5};
  const IntensityModel l(LogSpline{b, th, 1.7}, {});
  EXPECT_NEAR(decompose(l).mass, 1.7 * std::exp(log_normalizer(b, th)), 1e-12);
}

TEST(Decompose, ReconstructsEveryFamily) {
  Stream rng(3);
  const Domain d{0.5, 2.0};
  for (int fam = 0; fam < 5; ++fam) {
    const auto l = testgen::random_intensity(rng, d, fam);
    const auto dec = decompose(l);
    EXPECT_NEAR(dec.normalized.mass(), 1.0, 1e-9) << l.variant_name();
    for (int i = 0; i < 1024; ++i) {
      const double t = d.lo + d.length() * (i + 0.5) / 1024.0;
      EXPECT_NEAR(dec.mass * dec.normalized(t), l(t), 1e-9 * std::max(1.0, l(t)));
    }
  }
}

TEST(Intensity, NonNegativeOnDomainAndZeroOutside) {
  Stream rng(4);
  const Domain d{0.0, 1.0};
  for (int fam = 0; fam < 5; ++fam) {
    const auto l = testgen::random_intensity(rng, d, fam);
    for (int i = 0; i <= 256; ++i) EXPECT_GE(l(i / 256.0), 0.0);
    EXPECT_EQ(l(-0.1), 0.0);
    EXPECT_EQ(l(1.1), 0.0);
  }
}

TEST(Intensity, ClosedFormIntegrals) {
  const Domain d{0.0, 1.0};
  const IntensityModel lin(ClosedForm{ClosedFormKind::linear_decreasing, {2.0, 2.0, 0.0}, 1.0}, d);
  EXPECT_NEAR(lin.mass(), 1.0, 1e-12);
  const IntensityModel w(ClosedForm{ClosedFormKind::weibull_hazard, {2.0, 1.0, 0.0}, 1.0}, d);
  EXPECT_NEAR(w.integral(0.0, 0.5), 0.25, 1e-12);
  const IntensityModel es(ClosedForm{ClosedFormKind::exp_sine, {1.0, 1.0, 1.0}, 1.0}, d);
  EXPECT_NEAR(es.mass(), std::cyl_bessel_i(0.0, 1.0), 1e-10);
}

TEST(Intensity, RejectsInvalidParameters) {
  EXPECT_THROW(IntensityModel(PiecewiseConstant{{0.0, 1.0}, {-1.0}}, {}), std::invalid_argument);
  EXPECT_THROW(IntensityModel(LogLinear{"legendre", {0.0}, 1.0}, {}), std::invalid_argument);
  EXPECT_THROW(IntensityModel(LogSpline{SplineBasis(2, 2), {0.0}, 1.0}, {}), std::invalid_argument);
  EXPECT_THROW(closed_form_info("nope"), std::invalid_argument);
}

TEST(UniformMixture, SingleAtom) {
  const std::vector<MixtureAtom> a{{2.0, 1.0}};
  EXPECT_DOUBLE_EQ(eval_uniform_mixture(a, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(eval_uniform_mixture(a, 1.99), 0.5);
  EXPECT_DOUBLE_EQ(eval_uniform_mixture(a, 2.5), 0.0);
}

TEST(UniformMixture, TwoAtoms) {
  const std::vector<MixtureAtom> a{{1.0, 0.5}, {2.0, 0.5}};
  EXPECT_DOUBLE_EQ(eval_uniform_mixture(a, 0.5), 0.75);
  EXPECT_DOUBLE_EQ(eval_uniform_mixture(a, 1.5), 0.25);
}

TEST(UniformMixture, RejectsNonPositiveLocation) {
  const std::vector<MixtureAtom> a{{0.0, 1.0}};
  EXPECT_THROW(eval_uniform_mixture(a, 0.5), std::invalid_argument);
}

TEST(UniformMixture, NonIncreasingAndIntegratesExactly) {
  Stream rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const auto m = testgen::random_mixture(rng, {0.0, 3.0}, 6);
    const auto& mix = std::get<UniformMixture>(m.family());
    double prev = mix.density(1e-9);
    for (int i = 1; i <= 600; ++i) {
      const double v = mix.density(3.0 * i / 600.0);
      EXPECT_LE(v, prev);
      prev = v;
    }
    EXPECT_NEAR(mix.cumulative(mix.max_theta()), 1.0, 1e-14);
    EXPECT_NEAR(m.mass(), mix.mass(), 1e-14);
  }
}

TEST(LogSpline, FlatCoefficients) {
  const SplineBasis b(3, 5);
  const std::vector<double> th(static_cast<std::size_t>(b.dimension()), 0.0);
  EXPECT_NEAR(log_normalizer(b, th), 0.0, 1e-14);
  EXPECT_NEAR(eval_log_spline(b, th, 0.37), 1.0, 1e-14);
}

TEST(LogSpline, PiecewiseConstantNormalizer) {
  const SplineBasis b(1, std::vector<double>{0.0, 0.5, 1.0});
  const double a = 0.7;
  const double c = -1.3;
  const std::vector<double> th{a, c};
  EXPECT_NEAR(log_normalizer(b, th), std::log(0.5 * std::exp(a) + 0.5 * std::exp(c)), 1e-10);
}

TEST(LogSpline, DimensionMismatchThrows) {
  const SplineBasis b(2, 3);
  const std::vector<double> th{0.0, 1.0};
  EXPECT_THROW(log_normalizer(b, th), std::invalid_argument);
}

TEST(LogSpline, NormalizerIsConvex) {
  Stream rng(6);
  const SplineBasis b(3, 6);
  const auto J = static_cast<std::size_t>(b.dimension());
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> t1(J);
    std::vector<double> t2(J);
    std::vector<double> mid(J);
    for (std::size_t j = 0; j < J; ++j) {
      t1[j] = 8.0 * rng.uniform() - 4.0;
      t2[j] = 8.0 * rng.uniform() - 4.0;
    }
    const double t = rng.uniform();
    for (std::size_t j = 0; j < J; ++j) mid[j] = t * t1[j] + (1.0 - t) * t2[j];
    EXPECT_LE(log_normalizer(b, mid), t * log_normalizer(b, t1) + (1.0 - t) * log_normalizer(b, t2) + 1e-9);
  }
}

TEST(LogSpline, NormalizedDensityIntegratesToOne) {
  const SplineBasis b(4, 3);
  const std::vector<double> th{2.0, -1.0, 0.5, 3.0, -2.0, 1.0};
  EXPECT_NEAR(normalized_log_spline(b, th, {0.0, 2.0}).mass(), 1.0, 1e-12);
}

TEST(LogLinear, ZeroCoefficientsAreConstant) {
  const std::vector<double> th{0.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(eval_log_linear("fourier", th, 1.0, 0.3), 1.0);
  EXPECT_THROW(eval_log_linear("wavelet", th, 1.0, 0.3), std::invalid_argument);
}

TEST(LogLinear, FourierBasisIsOrthonormal) {
  // 2048 Gauss-Legendre nodes: 64 panels of 32.
  std::vector<double> cuts(65);
  for (int i = 0; i <= 64; ++i) cuts[i] = i / 64.0;
  for (int i = 1; i <= 9; ++i) {
    for (int j = 1; j <= 9; ++j) {
      const double ip = quadrature::integrate([&](double x) { return fourier_basis(i, x) * fourier_basis(j, x); }, cuts);
      EXPECT_NEAR(ip, i == j ? 1.0 : 0.0, 1e-8) << i << "," << j;
    }
  }
}

TEST(LogLinear, MassIsLinearInScale) {
  const std::vector<double> th{0.1, 0.5, -0.3, 0.2};
  const IntensityModel a(LogLinear{"fourier", th, 1.3}, {});
  const IntensityModel b(LogLinear{"fourier", th, 2.6}, {});
  EXPECT_NEAR(b.mass(), 2.0 * a.mass(), 1e-12);
}

TEST(Quadrature, ExactForHighDegreePolynomials) {
  const double v = quadrature::integrate([](double x) { return std::pow(x, 40); }, 0.0, 1.0);
  EXPECT_NEAR(v, 1.0 / 41.0, 1e-15);
}
