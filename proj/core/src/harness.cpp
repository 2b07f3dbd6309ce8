#include "aalen/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "aalen/metrics.hpp"
#include "aalen/random.hpp"
#include "aalen/stats.hpp"

namespace aalen {

RateFormula rate_formula_from(std::string_view id) {
  if (id == "monotone") return RateFormula::monotone;
  if (id == "spline") return RateFormula::spline;
  if (id == "loglinear") return RateFormula::loglinear;
  throw std::invalid_argument("unknown rate formula '" + std::string(id) + "'");
}

std::string_view rate_formula_name(RateFormula f) {
  switch (f) {
    case RateFormula::monotone:
      return "monotone";
    case RateFormula::spline:
      return "spline";
    case RateFormula::loglinear:
      return "loglinear";
  }
  return "monotone";
}

double rate_vn(RateFormula f, int n, double alpha, double s) {
  if (n < 2) throw std::invalid_argument("rate_vn: n must be >= 2");
  const double dn = n;
  const double ln = std::log(dn);
  const double e = alpha / (2.0 * alpha + 1.0);
  switch (f) {
    case RateFormula::monotone:
      return std::pow(dn / ln, -1.0 / 3.0);
    case RateFormula::spline:
      return std::pow(dn, -e);
    case RateFormula::loglinear:
      return std::pow(dn / ln, -e) * std::pow(ln, (1.0 - s) / 2.0);
  }
  return 0.0;
}

double rate_abscissa(RateFormula f, int n) {
  const double dn = n;
  return f == RateFormula::spline ? std::log(dn) : std::log(dn / std::log(dn));
}

void StudyConfig::validate() const {
  if (n_grid.empty()) throw std::invalid_argument("StudyConfig: empty n grid");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) {
      throw std::invalid_argument("StudyConfig: n grid must be strictly increasing");
    }
  }
  if (n_grid.front() < 2) throw std::invalid_argument("StudyConfig: n must be >= 2");
  if (replicates < 5) throw std::invalid_argument("StudyConfig: replicates must be >= 5");
  if (bootstrap < 200) throw std::invalid_argument("StudyConfig: bootstrap must be >= 200");
  if (j1.empty()) throw std::invalid_argument("StudyConfig: need at least one J1");
  if (baseline_bins < 1) throw std::invalid_argument("StudyConfig: baseline_bins must be >= 1");
  mcmc.validate();
}

StudyConfig study_config_from_json(const Json& j) {
  StudyConfig c(model_from_json(j.at("model")), prior_from_json(j.value("prior", Json::object())));
  c.n_grid = j.at("n_grid").get<std::vector<int>>();
  c.replicates = j.value("replicates", c.replicates);
  c.mcmc = mcmc_from_json(j.value("mcmc", Json()));
  const Json rate = j.value("rate", Json::object());
  c.formula = rate_formula_from(rate.value("formula", std::string("monotone")));
  c.smoothness_alpha = rate.value("alpha", c.smoothness_alpha);
  c.s = rate.value("s", c.s);
  c.rate_target = rate.value("target", c.rate_target);
  c.j1 = rate.value("j1", c.j1);
  if (rate.contains("slope_bracket")) {
    const auto b = rate.at("slope_bracket").get<std::vector<double>>();
    if (b.size() != 2) throw std::invalid_argument("rate.slope_bracket must be [lo, hi]");
    c.slope_bracket = std::make_pair(b[0], b[1]);
  }
  c.seed = j.value("seed", c.seed);
  c.threads = j.value("threads", c.threads);
  c.bootstrap = j.value("bootstrap", c.bootstrap);
  c.baseline_bins = j.value("baseline_bins", c.baseline_bins);
  c.write_chains = j.value("write_chains", c.write_chains);
  c.validate();
  return c;
}

Json to_json(const StudyConfig& c) {
  Json rate = {{"formula", rate_formula_name(c.formula)},
               {"alpha", c.smoothness_alpha},
               {"s", c.s},
               {"target", c.rate_target},
               {"j1", c.j1}};
  if (c.slope_bracket) rate["slope_bracket"] = {c.slope_bracket->first, c.slope_bracket->second};
  return {{"model", to_json(c.model)},   {"prior", to_json(c.prior)},
          {"n_grid", c.n_grid},          {"replicates", c.replicates},
          {"mcmc", to_json(c.mcmc)},     {"rate", rate},
          {"seed", c.seed},              {"bootstrap", c.bootstrap},
          {"baseline_bins", c.baseline_bins}};
}

std::string budget_estimate(const StudyConfig& c) {
  const long tasks = static_cast<long>(c.n_grid.size()) * c.replicates;
  double events = 0.0;
  const double mass = true_intensity(c.model).mass();
  for (int n : c.n_grid) events += static_cast<double>(n) * mass * c.replicates;
  std::ostringstream s;
  s << "rate study: " << tasks << " tasks, " << tasks * c.mcmc.iterations << " sweeps, ~"
    << static_cast<long>(events) << " simulated events";
  return s.str();
}

BaselineEstimate baseline_estimator(const CountingRecord& record, int bins,
                                    std::optional<Domain> domain) {
  if (bins < 1) throw std::invalid_argument("baseline_estimator: bins must be >= 1");
  const Domain d = domain.value_or(Domain{0.0, record.horizon()});
  std::vector<double> breaks(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) breaks[static_cast<std::size_t>(i)] = d.lo + d.length() * i / bins;
  breaks.back() = d.hi;
  std::vector<double> values(static_cast<std::size_t>(bins), 0.0);
  std::vector<bool> empty(static_cast<std::size_t>(bins), false);
  const auto ev = record.events();
  const auto& y = record.exposure();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double a = breaks[i];
    const double b = breaks[i + 1];
    const bool last = i + 1 == values.size();
    const auto lo = std::lower_bound(ev.begin(), ev.end(), a);
    const auto hi = last ? std::upper_bound(ev.begin(), ev.end(), b) : std::lower_bound(ev.begin(), ev.end(), b);
    const double count = static_cast<double>(hi - lo);
    const double exposure = y.cumulative(b) - y.cumulative(a);
    if (exposure > 0.0) {
      values[i] = count / exposure;
    } else {
      empty[i] = true;
    }
  }
  return {IntensityModel(PiecewiseConstant{std::move(breaks), std::move(values)}, d), std::move(empty)};
}

namespace {

struct Task {
  std::size_t n_index;
  int n;
  int replicate;
};

PosteriorChain fit(const PriorSpec& prior, const CountingRecord& rec, const McmcSettings& mcmc,
                   std::uint64_t seed, Domain d) {
  return std::visit(
      [&](const auto& p) -> PosteriorChain {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DpmPriorSpec>) {
          return fit_dpm(rec, p, mcmc, seed, d);
        } else if constexpr (std::is_same_v<T, SplinePriorSpec>) {
          return fit_logspline(rec, p, mcmc, seed, d);
        } else {
          return fit_loglinear(rec, p, mcmc, seed, d);
        }
      },
      prior);
}

std::string chain_lines(const PosteriorChain& chain) {
  std::string out;
  for (const auto& d : chain.draws) {
    out += to_json(d).dump();
    out += '\n';
  }
  return out;
}

}  // namespace

RateReport run_rate_study(const StudyConfig& config,
                          const std::optional<std::filesystem::path>& out_dir, std::ostream* log) {
  config.validate();
  const IntensityModel& lambda0 = true_intensity(config.model);
  const Domain dom = lambda0.domain();
  if (log) *log << budget_estimate(config) << std::endl;

  std::vector<Task> tasks;
  for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
    for (int r = 0; r < config.replicates; ++r) tasks.push_back({i, config.n_grid[i], r});
  }
  std::vector<ReplicateResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  const auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= tasks.size()) return;
      const Task& t = tasks[k];
      ReplicateResult& res = results[k];
      res.n = t.n;
      res.replicate = t.replicate;
      const auto start = std::chrono::steady_clock::now();
      const std::uint64_t data_seed =
          derive_seed(derive_seed(config.seed, t.n_index), static_cast<std::uint64_t>(t.replicate));
      try {
        const CountingRecord rec = simulate(with_n(config.model, t.n), data_seed);
        const PosteriorChain chain = fit(config.prior, rec, config.mcmc, derive_seed(data_seed, 1), dom);
        const double vn = rate_vn(config.formula, t.n, config.smoothness_alpha, config.s);
        const PosteriorSummary sum = posterior_summary(chain, lambda0, config.j1.front() * vn);
        res.mean_l1 = sum.mean_l1_error;
        res.median_l1 = sum.median_l1_error;
        for (double j : config.j1) res.mass_outside.push_back(mass_outside(sum.l1_errors, j * vn));
        res.baseline_l1 =
            l1_distance(baseline_estimator(rec, config.baseline_bins, dom).estimate, lambda0);
        if (out_dir && config.write_chains) {
          write_text_file(*out_dir / "chains" /
                              ("n" + std::to_string(t.n) + "_r" + std::to_string(t.replicate) + ".jsonl"),
                          chain_lines(chain));
        }
      } catch (const std::exception& e) {
        res.aborted = true;
        res.error = e.what();
      }
      res.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (log) {
        std::lock_guard<std::mutex> lock(log_mutex);
        *log << "n=" << t.n << " replicate=" << t.replicate
             << (res.aborted ? " aborted: " + res.error : " mean_l1=" + std::to_string(res.mean_l1))
             << std::endl;
      }
    }
  };
  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min<int>(threads, static_cast<int>(tasks.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  RateReport rep;
  rep.replicates = results;
  rep.j1 = config.j1;
  rep.bootstrap = config.bootstrap;
  rep.rate_target = config.rate_target;
  rep.abscissa = config.formula == RateFormula::spline ? "log(n)" : "log(n/log n)";
  rep.config_digest = digest(to_json(config));

  int aborted = 0;
  std::vector<std::vector<double>> errors(config.n_grid.size());
  for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
    RateRow row;
    row.n = config.n_grid[i];
    row.vn = rate_vn(config.formula, row.n, config.smoothness_alpha, config.s);
    row.mean_mass_outside.assign(config.j1.size(), 0.0);
    std::vector<double> base;
    for (const auto& r : results) {
      if (r.n != row.n) continue;
      if (r.aborted) {
        ++row.aborted;
        continue;
      }
      ++row.completed;
      errors[i].push_back(r.mean_l1);
      base.push_back(r.baseline_l1);
      for (std::size_t j = 0; j < config.j1.size(); ++j) row.mean_mass_outside[j] += r.mass_outside[j];
    }
    aborted += row.aborted;
    if (row.completed > 0) {
      for (auto& m : row.mean_mass_outside) m /= row.completed;
      row.median_l1 = stats::median(errors[i]);
      row.iqr = stats::quantile(errors[i], 0.75) - stats::quantile(errors[i], 0.25);
      row.baseline_median_l1 = stats::median(base);
    }
    rep.rows.push_back(row);
  }
  rep.failed = aborted * 5 > static_cast<int>(results.size());

  for (std::size_t j = 0; j < config.j1.size(); ++j) {
    bool mono = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
      if (rep.rows[i].mean_mass_outside[j] > rep.rows[i - 1].mean_mass_outside[j]) mono = false;
    }
    rep.mass_outside_nonincreasing.push_back(mono);
  }

  const bool all_have_data = std::all_of(errors.begin(), errors.end(),
                                         [](const auto& e) { return !e.empty(); });
  if (config.n_grid.size() >= 2 && all_have_data) {
    std::vector<double> x;
    for (int n : config.n_grid) x.push_back(rate_abscissa(config.formula, n));
    const auto slope_of = [&](const std::vector<std::vector<double>>& e) {
      std::vector<double> y;
      for (const auto& v : e) y.push_back(std::log(stats::median(v)));
      return stats::least_squares(x, y).slope;
    };
    rep.slope = slope_of(errors);
    Stream rng(config.seed, 0xb007);
    std::vector<double> boot;
    std::vector<std::vector<double>> sample(errors.size());
    for (int b = 0; b < config.bootstrap; ++b) {
      for (std::size_t i = 0; i < errors.size(); ++i) {
        sample[i].resize(errors[i].size());
        for (auto& v : sample[i]) {
          v = errors[i][static_cast<std::size_t>(rng.uniform() * static_cast<double>(errors[i].size()))];
        }
      }
      boot.push_back(slope_of(sample));
    }
    rep.slope_lo = stats::quantile(boot, 0.025);
    rep.slope_hi = stats::quantile(boot, 0.975);
    if (config.slope_bracket) {
      rep.slope_in_bracket =
          *rep.slope >= config.slope_bracket->first && *rep.slope <= config.slope_bracket->second;
    }
  }

  if (out_dir) {
    write_text_file(*out_dir / "summary.csv", summary_csv(rep));
    write_text_file(*out_dir / "report.json", to_json(rep).dump(2) + "\n");
  }
  return rep;
}

Json to_json(const RateReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"n", row.n},
                    {"vn", row.vn},
                    {"median_l1", row.median_l1},
                    {"iqr", row.iqr},
                    {"mean_mass_outside", row.mean_mass_outside},
                    {"baseline_median_l1", row.baseline_median_l1},
                    {"completed", row.completed},
                    {"aborted", row.aborted}});
  }
  Json j = {{"rows", rows},
            {"j1", r.j1},
            {"abscissa", r.abscissa},
            {"bootstrap", r.bootstrap},
            {"rate_target", r.rate_target},
            {"mass_outside_nonincreasing", r.mass_outside_nonincreasing},
            {"failed", r.failed},
            {"config_digest", r.config_digest}};
  if (r.slope) {
    j["slope"] = *r.slope;
    j["slope_ci"] = {*r.slope_lo, *r.slope_hi};
  } else {
    j["slope"] = "n/a";
  }
  if (r.slope_in_bracket) j["slope_in_bracket"] = *r.slope_in_bracket;
  Json errs = Json::array();
  for (const auto& rr : r.replicates) {
    if (rr.aborted) errs.push_back({{"n", rr.n}, {"replicate", rr.replicate}, {"error", rr.error}});
  }
  j["aborted_replicates"] = errs;
  return j;
}

std::string summary_csv(const RateReport& r) {
  std::ostringstream s;
  s.precision(10);
  s << "n,replicate,mean_l1,median_l1";
  for (double j : r.j1) s << ",mass_outside_J1_" << j;
  s << ",baseline_l1,wall_s\n";
  for (const auto& rr : r.replicates) {
    s << rr.n << ',' << rr.replicate << ',';
    if (rr.aborted) {
      s << "nan,nan";
      for (std::size_t j = 0; j < r.j1.size(); ++j) s << ",nan";
      s << ",nan";
    } else {
      s << rr.mean_l1 << ',' << rr.median_l1;
      for (double m : rr.mass_outside) s << ',' << m;
      s << ',' << rr.baseline_l1;
    }
    s << ',' << rr.wall_s << '\n';
  }
  return s.str();
}

}  // namespace aalen
