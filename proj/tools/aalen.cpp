#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "aalen/harness.hpp"
#include "aalen/io.hpp"
#include "aalen/likelihood.hpp"
#include "aalen/metrics.hpp"
#include "aalen/posterior.hpp"
#include "aalen/processes.hpp"
#include "aalen/testing.hpp"

namespace fs = std::filesystem;
using namespace aalen;

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

IntensityModel load_intensity(const fs::path& p) { return intensity_from_json(load_config(p)); }

void write_or_print(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text_file(out, text);
  }
}

int cmd_simulate(const std::string& model, const fs::path& config, std::uint64_t seed,
                 const std::string& out) {
  Json j = load_config(config);
  if (j.contains("model") && j.at("model").is_object()) j = j.at("model");
  if (!model.empty()) j["model"] = model;
  const CountingRecord rec = simulate(model_from_json(j), seed);
  write_or_print(out, to_json(rec).dump() + "\n");
  return 0;
}

int cmd_loglik(const fs::path& intensity, const fs::path& record) {
  const LogLikValue v = log_likelihood(load_intensity(intensity), record_from_json(load_config(record)));
  std::cout << "value " << fmt(v.value) << "\nevent_term " << fmt(v.event_term) << "\nintegral_term "
            << fmt(v.integral_term) << "\n";
  return 0;
}

int cmd_diagnostics(const fs::path& f0, const fs::path& f1, const std::string& env_path,
                    const BknParams& bkn, const std::string& out) {
  const IntensityModel a = load_intensity(f0);
  const IntensityModel b = load_intensity(f1);
  std::ostringstream csv;
  csv << "metric,value,grid_size,tolerance\n";
  const auto row = [&](const std::string& name, double v, int grid, double tol) {
    csv << name << ',' << fmt(v) << ',' << grid << ',' << tol << '\n';
  };
  row("l1", l1_distance(a, b), 0, 1e-10);
  const Decomposition da = decompose(a);
  const Decomposition db = decompose(b);
  row("mass_0", da.mass, 0, 1e-10);
  row("mass_1", db.mass, 0, 1e-10);
  row("l1_normalized", l1_distance(da.normalized, db.normalized), 0, 1e-10);
  row("hellinger", hellinger(da.normalized, db.normalized), 0, 1e-10);
  for (int j = 2; j <= bkn.k2(); ++j) row("E_" + std::to_string(j), ej_moment(da.normalized, db.normalized, j), 0, 1e-8);
  row("sup_ratio", sup_ratio(da.normalized, db.normalized), kSupGrid, 0.0);
  row("sup_norm_1", sup_norm(db.normalized), kSupGrid, 0.0);
  const BknReport r = bkn_membership(da.normalized, db.normalized, bkn);
  row("bkn_member", r.member ? 1.0 : 0.0, kSupGrid, 0.0);
  const MassNormCheck mn = mass_norm_inequality_check(b, a);
  row("mass_norm_lhs", mn.lhs, 0, 1e-9);
  row("mass_norm_rhs", mn.rhs, 0, 1e-9);
  ModelEnvironment env = poisson_environment(1, a.domain().hi, a.domain());
  if (!env_path.empty()) {
    const Json e = load_config(env_path);
    // Accept a bare model config or a study config with a model block.
    env = environment(model_from_json(e.contains("model") ? e.at("model") : e));
  }
  row("kl_aalen", kl_aalen(a, b, env), 0, 1e-8);
  row("kl_direct", kl_aalen_direct(a, b, env), 0, 1e-8);
  row("weighted_l1", weighted_l1(a, b, env), 0, 1e-9);
  row("kappa0", kappa0(env.m1, env.m2, da.mass), 0, 0.0);
  write_or_print(out, csv.str());
  return 0;
}

template <class Spec>
int cmd_fit(const std::string& family, const fs::path& record_path, const fs::path& config,
            std::uint64_t seed, const fs::path& out) {
  const CountingRecord rec = record_from_json(load_config(record_path));
  const Json cfg = load_config(config);
  Json prior_json = cfg.value("prior", Json::object());
  prior_json["family"] = family;
  const PriorSpec prior = prior_from_json(prior_json);
  const McmcSettings mcmc = mcmc_from_json(cfg.value("mcmc", Json()));
  std::optional<Domain> dom;
  if (cfg.contains("domain")) dom = Domain{cfg["domain"][0].get<double>(), cfg["domain"][1].get<double>()};
  const auto start = std::chrono::steady_clock::now();
  const Spec& spec = std::get<Spec>(prior);
  PosteriorChain chain;
  if constexpr (std::is_same_v<Spec, DpmPriorSpec>) {
    chain = fit_dpm(rec, spec, mcmc, seed, dom);
  } else if constexpr (std::is_same_v<Spec, SplinePriorSpec>) {
    chain = fit_logspline(rec, spec, mcmc, seed, dom);
  } else {
    chain = fit_loglinear(rec, spec, mcmc, seed, dom);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::string lines;
  for (const auto& d : chain.draws) lines += to_json(d).dump() + "\n";
  write_text_file(out / "chain.jsonl", lines);

  std::ostringstream csv;
  std::optional<IntensityModel> truth;
  if (cfg.contains("lambda0")) truth = intensity_from_json(cfg.at("lambda0"));
  const PosteriorSummary s = truth ? posterior_summary(chain, *truth, cfg.value("radius", 0.1))
                                   : posterior_bands(chain);
  csv << "t,mean,lower,upper\n";
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    csv << fmt(s.grid[i]) << ',' << fmt(s.mean[i]) << ',' << fmt(s.lower[i]) << ',' << fmt(s.upper[i]) << '\n';
  }
  write_text_file(out / "summary.csv", csv.str());

  Json acc = Json::object();
  for (const auto& m : chain.moves) acc[m.name] = m.rate();
  Json manifest = {{"seed", seed},
                   {"record_digest", digest(to_json(rec))},
                   {"prior_digest", digest(to_json(prior))},
                   {"iterations", chain.iterations},
                   {"burn_in", chain.burn_in},
                   {"stride", chain.stride},
                   {"draws", chain.draws.size()},
                   {"acceptance", acc},
                   {"wall_s", wall}};
  if (truth) {
    manifest["mean_l1_error"] = s.mean_l1_error;
    manifest["median_l1_error"] = s.median_l1_error;
    manifest["mass_outside_radius"] = s.mass_outside_radius;
  }
  write_text_file(out / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << chain.draws.size() << " draws to " << (out / "chain.jsonl").string() << "\n";
  return 0;
}

int cmd_test_bounds(const fs::path& config, const std::string& out) {
  const Json cfg = load_config(config);
  const ModelSpec model = model_from_json(cfg.at("model"));
  const IntensityModel alt = intensity_from_json(cfg.at("alternative"));
  const auto u = cfg.value("u", std::vector<double>{1.0, 2.0});
  const auto rows = type_one_study(alt, model, u, cfg.value("replicates", 10000),
                                   cfg.value("seed", std::uint64_t{1}), cfg.value("gamma_alpha", 0.5));
  std::ostringstream csv;
  csv << "u,n,empirical_type1,bound,se,pass\n";
  bool ok = true;
  for (const auto& r : rows) {
    csv << r.u << ',' << r.n << ',' << fmt(r.empirical_type1) << ',' << fmt(r.bound) << ',' << fmt(r.se)
        << ',' << (r.pass ? 1 : 0) << '\n';
    ok = ok && r.pass;
  }
  write_or_print(out, csv.str());
  return ok ? 0 : 2;
}

int cmd_rate_study(const fs::path& config, const fs::path& out, int threads) {
  StudyConfig c = study_config_from_json(load_config(config));
  if (threads > 0) c.threads = threads;
  const RateReport r = run_rate_study(c, out, &std::cerr);
  std::cout << "n,median_l1,iqr,baseline_median_l1\n";
  for (const auto& row : r.rows) {
    std::cout << row.n << ',' << row.median_l1 << ',' << row.iqr << ',' << row.baseline_median_l1 << '\n';
  }
  if (r.slope) {
    std::cout << "slope " << *r.slope << " [" << *r.slope_lo << ", " << *r.slope_hi << "]\n";
  } else {
    std::cout << "slope: n/a\n";
  }
  return r.failed ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian intensity estimation for Aalen counting processes"};
  app.require_subcommand(1);

  std::string model;
  std::string config;
  std::string out;
  std::uint64_t seed = 1;
  auto* sim = app.add_subcommand("simulate", "Simulate a counting-process record");
  sim->add_option("--model", model, "poisson | censoring | markov")
      ->check(CLI::IsMember({"poisson", "censoring", "markov"}));
  sim->add_option("--config", config, "Model config")->required()->check(CLI::ExistingFile);
  sim->add_option("--seed", seed, "Seed");
  sim->add_option("--out", out, "Output record (default stdout)");

  std::string f0;
  std::string f1;
  std::string env_path;
  BknParams bkn;
  auto* diag = app.add_subcommand("diagnostics", "Metrics between two intensity specs (CSV)");
  diag->add_option("--lambda0", f0, "Reference intensity")->required()->check(CLI::ExistingFile);
  diag->add_option("--lambda", f1, "Compared intensity")->required()->check(CLI::ExistingFile);
  diag->add_option("--env", env_path, "Model config supplying the exposure environment");
  diag->add_option("--vn", bkn.v_n, "Neighborhood radius");
  diag->add_option("--H", bkn.H, "Sup bound exponent");
  diag->add_option("--k", bkn.k, "Moment order");
  diag->add_option("--n", bkn.n, "Sample size");
  diag->add_option("--out", out, "Output CSV (default stdout)");

  std::string intensity;
  std::string record;
  auto* ll = app.add_subcommand("loglik", "Log-likelihood of an intensity on a record");
  ll->add_option("--intensity", intensity)->required()->check(CLI::ExistingFile);
  ll->add_option("--record", record)->required()->check(CLI::ExistingFile);

  std::string out_dir;
  std::vector<CLI::App*> fits;
  for (const char* name : {"fit-dpm", "fit-logspline", "fit-loglinear"}) {
    auto* f = app.add_subcommand(name, "Run a posterior sampler on a record");
    f->add_option("--record", record)->required()->check(CLI::ExistingFile);
    f->add_option("--config", config, "Prior and MCMC settings")->required()->check(CLI::ExistingFile);
    f->add_option("--seed", seed);
    f->add_option("--out", out_dir, "Output directory")->required();
    fits.push_back(f);
  }

  auto* tb = app.add_subcommand("test-bounds", "Type-I frequencies of the single-alternative test");
  tb->add_option("--config", config)->required()->check(CLI::ExistingFile);
  tb->add_option("--out", out, "Output CSV (default stdout)");

  int threads = 0;
  auto* rs = app.add_subcommand("rate-study", "Contraction-rate study over an n grid");
  rs->add_option("--config", config)->required()->check(CLI::ExistingFile);
  rs->add_option("--out", out_dir, "Output directory")->required();
  rs->add_option("--threads", threads, "Worker threads (default: config or all cores)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(model, config, seed, out);
    if (*diag) return cmd_diagnostics(f0, f1, env_path, bkn, out);
    if (*ll) return cmd_loglik(intensity, record);
    if (*fits[0]) return cmd_fit<DpmPriorSpec>("dpm", record, config, seed, out_dir);
    if (*fits[1]) return cmd_fit<SplinePriorSpec>("logspline", record, config, seed, out_dir);
    if (*fits[2]) return cmd_fit<LogLinearPriorSpec>("loglinear", record, config, seed, out_dir);
    if (*tb) return cmd_test_bounds(config, out);
    if (*rs) return cmd_rate_study(config, out_dir, threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
