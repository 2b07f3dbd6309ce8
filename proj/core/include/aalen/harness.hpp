#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "aalen/intensity.hpp"
#include "aalen/io.hpp"
#include "aalen/posterior.hpp"
#include "aalen/processes.hpp"
#include "aalen/record.hpp"

namespace aalen {

enum class RateFormula { monotone, spline, loglinear };

RateFormula rate_formula_from(std::string_view id);
std::string_view rate_formula_name(RateFormula f);

/// Nominal rate v_n for a formula; `alpha` is the smoothness, `s` the
/// dimension-prior exponent.
double rate_vn(RateFormula f, int n, double alpha = 1.0, double s = 1.0);

/// log(n / log n) for formulas with the log factor, log n otherwise.
double rate_abscissa(RateFormula f, int n);

struct StudyConfig {
  StudyConfig(ModelSpec m, PriorSpec p) : model(std::move(m)), prior(std::move(p)) {}

  ModelSpec model;  // its intensity is the truth λ0
  PriorSpec prior;
  std::vector<int> n_grid;
  int replicates = 10;
  McmcSettings mcmc;
  RateFormula formula = RateFormula::monotone;
  double smoothness_alpha = 1.0;
  double s = 1.0;
  double rate_target = -1.0 / 3.0;
  std::vector<double> j1 = {1.0, 2.0, 4.0, 8.0};
  std::optional<std::pair<double, double>> slope_bracket;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency
  int bootstrap = 200;
  int baseline_bins = 64;
  bool write_chains = true;

  /// Throws unless the n grid is strictly increasing and replicates >= 5.
  /// A single-n grid is allowed and yields no slope.
  void validate() const;
};

StudyConfig study_config_from_json(const Json& j);
Json to_json(const StudyConfig& c);

struct ReplicateResult {
  int n = 0;
  int replicate = 0;
  double mean_l1 = 0.0;
  double median_l1 = 0.0;
  std::vector<double> mass_outside;  // one per J1
  double baseline_l1 = 0.0;
  double wall_s = 0.0;
  bool aborted = false;
  std::string error;
};

struct RateRow {
  int n = 0;
  double vn = 0.0;
  double median_l1 = 0.0;  // median over replicates of the posterior mean L1 error
  double iqr = 0.0;
  std::vector<double> mean_mass_outside;  // one per J1
  double baseline_median_l1 = 0.0;
  int completed = 0;
  int aborted = 0;
};

struct RateReport {
  std::vector<RateRow> rows;
  std::vector<ReplicateResult> replicates;
  std::vector<double> j1;
  std::string abscissa;
  std::optional<double> slope;
  std::optional<double> slope_lo;
  std::optional<double> slope_hi;
  int bootstrap = 0;
  double rate_target = 0.0;
  std::optional<bool> slope_in_bracket;
  std::vector<bool> mass_outside_nonincreasing;  // one per J1
  bool failed = false;  // more than 20% of replicates aborted
  std::string config_digest;
};

/// Tasks and chain sweeps the study will run.
std::string budget_estimate(const StudyConfig& c);

/**
 * Runs every (n, replicate) task on a thread pool and reduces in task order,
 * so the report does not depend on scheduling. When `out_dir` is set,
 * writes summary.csv, report.json and (optionally) per-replicate chains.
 */
RateReport run_rate_study(const StudyConfig& config,
                          const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                          std::ostream* log = nullptr);

Json to_json(const RateReport& r);
std::string summary_csv(const RateReport& r);

struct BaselineEstimate {
  IntensityModel estimate;
  std::vector<bool> empty_bins;
};

/// Histogram ΔN / ∫Y on `bins` equal bins of Ω. Bins without exposure get
/// value 0 and are flagged.
BaselineEstimate baseline_estimator(const CountingRecord& record, int bins,
                                    std::optional<Domain> domain = std::nullopt);

}  // namespace aalen
