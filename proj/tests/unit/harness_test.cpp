#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "aalen/harness.hpp"
#include "aalen/io.hpp"
#include "aalen/metrics.hpp"
#include "aalen/stats.hpp"

using namespace aalen;

namespace {

const Domain kUnit{0.0, 1.0};

IntensityModel linear_decreasing() {
  return IntensityModel(ClosedForm{ClosedFormKind::linear_decreasing, {2.0, 2.0, 0.0}, 1.0}, kUnit);
}

StudyConfig small_study(std::vector<int> grid) {
  StudyConfig c(PoissonModel{linear_decreasing(), 100, 1.0, std::nullopt, std::nullopt}, DpmPriorSpec{});
  c.n_grid = std::move(grid);
  c.replicates = 5;
  c.mcmc.iterations = 600;
  c.mcmc.burn_in = 300;
  c.mcmc.stride = 3;
  c.seed = 77;
  c.threads = 2;
  return c;
}

CountingRecord poisson_record(const IntensityModel& l, int n, std::uint64_t seed) {
  return simulate(PoissonModel{l, n, 1.0, std::nullopt, std::nullopt}, seed);
}

}  // namespace

TEST(RateFormula, Values) {
  const int n = 1000;
  const double ln = std::log(1000.0);
  EXPECT_NEAR(rate_vn(RateFormula::monotone, n), std::pow(n / ln, -1.0 / 3.0), 1e-15);
  EXPECT_NEAR(rate_vn(RateFormula::spline, n, 2.0), std::pow(1000.0, -0.4), 1e-15);
  EXPECT_NEAR(rate_vn(RateFormula::loglinear, n, 1.0, 0.0), std::pow(n / ln, -1.0 / 3.0) * std::sqrt(ln), 1e-14);
  EXPECT_NEAR(rate_vn(RateFormula::loglinear, n, 1.0, 1.0), std::pow(n / ln, -1.0 / 3.0), 1e-15);
  EXPECT_NEAR(rate_abscissa(RateFormula::spline, n), ln, 1e-15);
  EXPECT_NEAR(rate_abscissa(RateFormula::monotone, n), std::log(n / ln), 1e-15);
  EXPECT_THROW(rate_formula_from("cubic"), std::invalid_argument);
}

TEST(StudyConfig, ParsesShippedConfigs) {
  for (const char* f : {"monotone_dpm.cfg", "smooth_logspline.cfg"}) {
    const auto c = study_config_from_json(load_config(std::filesystem::path(AALEN_CONFIG_DIR) / f));
    EXPECT_EQ(c.n_grid, (std::vector<int>{100, 400, 1600, 6400}));
    EXPECT_GE(c.replicates, 10);
    EXPECT_TRUE(c.slope_bracket.has_value());
  }
}

TEST(StudyConfig, Validation) {
  auto c = small_study({100, 100, 400});
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_study({100, 200, 400});
  c.replicates = 4;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_study({100, 200, 400});
  c.bootstrap = 100;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(RateStudy, SingleGridPointHasNoSlope) {
  const auto r = run_rate_study(small_study({200}));
  EXPECT_FALSE(r.slope.has_value());
  EXPECT_EQ(to_json(r)["slope"], "n/a");
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].completed, 5);
}

TEST(RateStudy, ReproducibleArtifacts) {
  const auto base = std::filesystem::temp_directory_path() / "aalen_rate_repro";
  std::filesystem::remove_all(base);
  auto c = small_study({100, 200, 400});
  const auto a = run_rate_study(c, base / "a");
  const auto b = run_rate_study(c, base / "b");
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_EQ(read_text_file(base / "a" / "report.json"), read_text_file(base / "b" / "report.json"));
  EXPECT_EQ(read_text_file(base / "a" / "chains" / "n400_r4.jsonl"),
            read_text_file(base / "b" / "chains" / "n400_r4.jsonl"));
  ASSERT_TRUE(a.slope.has_value());
  EXPECT_LE(*a.slope_lo, *a.slope_hi);
  EXPECT_EQ(a.bootstrap, 200);
  const auto csv = read_text_file(base / "a" / "summary.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "n,replicate,mean_l1,median_l1,mass_outside_J1_1,mass_outside_J1_2,mass_outside_J1_4,"
            "mass_outside_J1_8,baseline_l1,wall_s");
  std::filesystem::remove_all(base);
}

TEST(RateStudy, AbortedReplicatesFailTheStudy) {
  StudyConfig c(PoissonModel{linear_decreasing(), 100, 1.0, std::nullopt, std::nullopt}, SplinePriorSpec{});
  auto& prior = std::get<SplinePriorSpec>(c.prior);
  prior.scale_prior.kind = ScalePrior::Kind::lognormal;
  c.n_grid = {400, 800};
  c.replicates = 5;
  c.mcmc.iterations = 200;
  c.mcmc.burn_in = 100;
  c.mcmc.stride = 1;
  c.mcmc.initial_step = 60.0;
  c.mcmc.adapt = false;
  const auto r = run_rate_study(c);
  EXPECT_TRUE(r.failed);
  EXPECT_FALSE(to_json(r)["aborted_replicates"].empty());
}

TEST(Baseline, ConstantIntensityWithinSe) {
  const double c = 2.0;
  const auto rec = poisson_record(IntensityModel::constant(c, kUnit), 20000, 3);
  const auto b = baseline_estimator(rec, 16);
  const auto& pc = std::get<PiecewiseConstant>(b.estimate.family());
  for (double v : pc.values) EXPECT_NEAR(v, c, 3.0 * std::sqrt(c / (20000.0 / 16.0)));
}

TEST(Baseline, NoEventsGivesZero) {
  CountingRecord::Fields f;
  f.n = 10;
  f.exposure = StepFunction::constant(0.0, 1.0, 10.0);
  const auto b = baseline_estimator(CountingRecord(f), 8);
  EXPECT_TRUE(b.estimate.is_zero());
}

TEST(Baseline, EmptyExposureBinsFlagged) {
  const CensoringModel m{IntensityModel::constant(1.0, kUnit), {CensoringKind::fixed, 0.5}, 50, 1.0};
  const auto b = baseline_estimator(simulate(m, 4), 4);
  EXPECT_EQ(b.empty_bins, (std::vector<bool>{false, false, true, true}));
}

TEST(Baseline, FinerBinsAreNoisier) {
  std::vector<double> coarse;
  std::vector<double> fine;
  for (int r = 0; r < 100; ++r) {
    const auto rec = poisson_record(IntensityModel::constant(1.0, kUnit), 400, derive_seed(5, r));
    coarse.push_back(std::get<PiecewiseConstant>(baseline_estimator(rec, 4).estimate.family()).values[0]);
    fine.push_back(std::get<PiecewiseConstant>(baseline_estimator(rec, 32).estimate.family()).values[0]);
  }
  EXPECT_GT(stats::variance(fine), stats::variance(coarse));
}

TEST(Baseline, PosteriorBeatsHistogramOnMonotoneBenchmark) {
  auto c = small_study({1600, 3200});
  c.mcmc.iterations = 2000;
  c.mcmc.burn_in = 1000;
  c.mcmc.stride = 5;
  const auto r = run_rate_study(c);
  EXPECT_LE(r.rows[0].median_l1, r.rows[0].baseline_median_l1);
}
