#include "aalen/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aalen {

namespace {

Json domain_json(Domain d) { return Json::array({d.lo, d.hi}); }

Domain domain_from(const Json& j, Domain fallback = {}) {
  if (j.is_null()) return fallback;
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("domain must be [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

const Json& require(const Json& j, const char* key) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
  return j.at(key);
}

ScalePrior::Kind scale_kind(const std::string& s) {
  if (s == "gamma") return ScalePrior::Kind::gamma;
  if (s == "lognormal") return ScalePrior::Kind::lognormal;
  throw std::invalid_argument("unknown scale prior '" + s + "'");
}

CensoringKind censoring_kind(const std::string& s) {
  if (s == "none") return CensoringKind::none;
  if (s == "fixed") return CensoringKind::fixed;
  if (s == "exponential") return CensoringKind::exponential;
  throw std::invalid_argument("unknown censoring kind '" + s + "'");
}

std::string censoring_name(CensoringKind k) {
  switch (k) {
    case CensoringKind::none:
      return "none";
    case CensoringKind::fixed:
      return "fixed";
    case CensoringKind::exponential:
      return "exponential";
  }
  return "none";
}

}  // namespace

Json to_json(const IntensityModel& lambda) {
  Json params;
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ClosedForm>) {
          const auto& info = closed_form_info(f.kind);
          params["id"] = info.id;
          for (int i = 0; i < info.param_count; ++i) {
            params[std::string(info.params[static_cast<std::size_t>(i)])] =
                f.params[static_cast<std::size_t>(i)];
          }
          params["multiplier"] = f.multiplier;
        } else if constexpr (std::is_same_v<T, PiecewiseConstant>) {
          params["breaks"] = f.breaks;
          params["values"] = f.values;
        } else if constexpr (std::is_same_v<T, UniformMixture>) {
          Json atoms = Json::array();
          for (const auto& a : f.atoms()) atoms.push_back({a.theta, a.weight});
          params["atoms"] = atoms;
          params["mass"] = f.mass();
        } else if constexpr (std::is_same_v<T, LogSpline>) {
          params["order"] = f.basis.order();
          params["breakpoints"] =
              std::vector<double>(f.basis.breakpoints().begin(), f.basis.breakpoints().end());
          params["coef"] = f.coef;
          params["scale"] = f.scale;
        } else {
          params["basis"] = f.basis;
          params["coef"] = f.coef;
          params["scale"] = f.scale;
        }
      },
      lambda.family());
  return {{"variant", lambda.variant_name()}, {"params", params},
          {"domain", domain_json(lambda.domain())}};
}

IntensityModel intensity_from_json(const Json& j) {
  const std::string variant = require(j, "variant").get<std::string>();
  const Json& p = require(j, "params");
  const Domain d = domain_from(j.value("domain", Json()));
  if (variant == "closed_form") {
    const auto& info = closed_form_info(require(p, "id").get<std::string>());
    ClosedForm f;
    f.kind = info.kind;
    for (int i = 0; i < info.param_count; ++i) {
      const std::string name(info.params[static_cast<std::size_t>(i)]);
      f.params[static_cast<std::size_t>(i)] = require(p, name.c_str()).get<double>();
    }
    f.multiplier = p.value("multiplier", 1.0);
    return IntensityModel(f, d);
  }
  if (variant == "piecewise_constant") {
    return IntensityModel(PiecewiseConstant{require(p, "breaks").get<std::vector<double>>(),
                                            require(p, "values").get<std::vector<double>>()},
                          d);
  }
  if (variant == "uniform_mixture") {
    std::vector<MixtureAtom> atoms;
    for (const auto& a : require(p, "atoms")) atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
    return IntensityModel(UniformMixture(std::move(atoms), p.value("mass", 1.0)), d);
  }
  if (variant == "log_spline") {
    const int order = require(p, "order").get<int>();
    SplineBasis basis = p.contains("breakpoints")
                            ? SplineBasis(order, p.at("breakpoints").get<std::vector<double>>())
                            : SplineBasis(order, require(p, "intervals").get<int>());
    return IntensityModel(
        LogSpline{std::move(basis), require(p, "coef").get<std::vector<double>>(), p.value("scale", 1.0)},
        d);
  }
  if (variant == "log_linear") {
    return IntensityModel(LogLinear{p.value("basis", std::string("fourier")),
                                    require(p, "coef").get<std::vector<double>>(),
                                    p.value("scale", 1.0)},
                          d);
  }
  throw std::invalid_argument("unknown intensity variant '" + variant + "'");
}

Json to_json(const CountingRecord& r) {
  Json j;
  j["model"] = r.model();
  j["n"] = r.n();
  j["T"] = r.horizon();
  j["events"] = std::vector<double>(r.events().begin(), r.events().end());
  const auto b = r.exposure().breaks();
  const auto v = r.exposure().values();
  j["exposure_breakpoints"] = std::vector<double>(b.begin(), b.end());
  j["exposure_values"] = std::vector<double>(v.begin(), v.end());
  j["seed"] = r.seed();
  j["spec_digest"] = r.spec_digest();
  if (!r.marks().empty()) j["marks"] = std::vector<std::string>(r.marks().begin(), r.marks().end());
  if (!r.audit().empty()) {
    Json a = Json::array();
    for (const auto& o : r.audit()) a.push_back({o.z, o.delta ? 1 : 0});
    j["audit"] = a;
  }
  return j;
}

CountingRecord record_from_json(const Json& j) {
  CountingRecord::Fields f;
  f.model = require(j, "model").get<std::string>();
  f.n = require(j, "n").get<int>();
  f.horizon = require(j, "T").get<double>();
  f.events = require(j, "events").get<std::vector<double>>();
  f.exposure = StepFunction(require(j, "exposure_breakpoints").get<std::vector<double>>(),
                            require(j, "exposure_values").get<std::vector<double>>());
  f.seed = j.value("seed", std::uint64_t{0});
  f.spec_digest = j.value("spec_digest", std::string());
  if (j.contains("marks")) f.marks = j.at("marks").get<std::vector<std::string>>();
  if (j.contains("audit")) {
    for (const auto& a : j.at("audit")) f.audit.push_back({a.at(0).get<double>(), a.at(1).get<int>() != 0});
  }
  return CountingRecord(std::move(f));
}

Json to_json(const ModelSpec& spec) {
  return std::visit(
      [](const auto& m) -> Json {
        using T = std::decay_t<decltype(m)>;
        Json j;
        j["n"] = m.n;
        j["T"] = m.horizon;
        if constexpr (std::is_same_v<T, PoissonModel>) {
          j["model"] = "poisson";
          j["intensity"] = to_json(m.intensity);
          if (m.omega) j["omega"] = domain_json(*m.omega);
          if (m.lambda_max) j["lambda_max"] = *m.lambda_max;
        } else if constexpr (std::is_same_v<T, CensoringModel>) {
          j["model"] = "censoring";
          j["hazard"] = to_json(m.hazard);
          j["censoring"] = {{"kind", censoring_name(m.censoring.kind)}, {"value", m.censoring.value}};
        } else {
          j["model"] = "markov";
          j["states"] = m.spec.states;
          j["initial"] = m.spec.initial;
          Json rates = Json::array();
          for (const auto& r : m.spec.rates) {
            rates.push_back({{"from", r.transition.from},
                             {"to", r.transition.to},
                             {"intensity", to_json(r.intensity)}});
          }
          j["rates"] = rates;
          Json target = Json::array();
          for (const auto& t : m.target) target.push_back({t.from, t.to});
          j["target"] = target;
        }
        return j;
      },
      spec);
}

ModelSpec model_from_json(const Json& j) {
  const std::string model = require(j, "model").get<std::string>();
  const int n = require(j, "n").get<int>();
  const double T = j.value("T", 1.0);
  if (model == "poisson") {
    PoissonModel m{intensity_from_json(require(j, "intensity")), n, T, std::nullopt, std::nullopt};
    if (j.contains("omega")) m.omega = domain_from(j.at("omega"));
    if (j.contains("lambda_max")) m.lambda_max = j.at("lambda_max").get<double>();
    return m;
  }
  if (model == "censoring") {
    CensoringModel m{intensity_from_json(require(j, "hazard")), {}, n, T};
    const Json c = j.value("censoring", Json::object());
    m.censoring.kind = censoring_kind(c.value("kind", std::string("fixed")));
    m.censoring.value = c.value("value", T);
    return m;
  }
  if (model == "markov") {
    MarkovModel m;
    m.n = n;
    m.horizon = T;
    m.spec.states = require(j, "states").get<std::vector<std::string>>();
    m.spec.initial = require(j, "initial").get<std::vector<double>>();
    for (const auto& r : require(j, "rates")) {
      m.spec.rates.push_back({{require(r, "from").get<std::string>(), require(r, "to").get<std::string>()},
                              intensity_from_json(require(r, "intensity"))});
    }
    for (const auto& t : require(j, "target")) {
      m.target.push_back({t.at(0).get<std::string>(), t.at(1).get<std::string>()});
    }
    m.spec.validate();
    return m;
  }
  throw std::invalid_argument("unknown model '" + model + "'");
}

Json to_json(const ScalePrior& p) {
  if (p.kind == ScalePrior::Kind::gamma) {
    return {{"kind", "gamma"}, {"shape", p.shape}, {"rate", p.rate}};
  }
  return {{"kind", "lognormal"}, {"log_mean", p.log_mean}, {"log_sd", p.log_sd}};
}

ScalePrior scale_prior_from_json(const Json& j) {
  ScalePrior p;
  if (j.is_null()) return p;
  p.kind = scale_kind(j.value("kind", std::string("gamma")));
  p.shape = j.value("shape", p.shape);
  p.rate = j.value("rate", p.rate);
  p.log_mean = j.value("log_mean", p.log_mean);
  p.log_sd = j.value("log_sd", p.log_sd);
  p.validate();
  return p;
}

Json to_json(const PriorSpec& prior) {
  return std::visit(
      [](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DpmPriorSpec>) {
          return {{"family", "dpm"},
                  {"concentration", p.concentration},
                  {"base_exponent", p.base_exponent},
                  {"base_max", p.base_max},
                  {"truncation", p.truncation},
                  {"mass_prior", to_json(p.mass_prior)}};
        } else if constexpr (std::is_same_v<T, SplinePriorSpec>) {
          return {{"family", "logspline"},
                  {"order", p.order},
                  {"smoothness_alpha", p.smoothness_alpha},
                  {"dimension", p.dimension},
                  {"box", p.box},
                  {"scale_prior", to_json(p.scale_prior)}};
        } else {
          return {{"family", "loglinear"}, {"basis", p.basis}, {"tau0", p.tau0},
                  {"beta", p.beta},        {"p", p.p},         {"s", p.s},
                  {"j_max", p.j_max},      {"scale_prior", to_json(p.scale_prior)}};
        }
      },
      prior);
}

PriorSpec prior_from_json(const Json& j) {
  const std::string family = j.value("family", std::string("dpm"));
  if (family == "dpm") {
    DpmPriorSpec p;
    p.concentration = j.value("concentration", p.concentration);
    p.base_exponent = j.value("base_exponent", p.base_exponent);
    p.base_max = j.value("base_max", p.base_max);
    p.truncation = j.value("truncation", p.truncation);
    p.mass_prior = scale_prior_from_json(j.value("mass_prior", Json()));
    p.validate();
    return p;
  }
  if (family == "logspline") {
    SplinePriorSpec p;
    p.order = j.value("order", p.order);
    p.smoothness_alpha = j.value("smoothness_alpha", p.smoothness_alpha);
    p.dimension = j.value("dimension", p.dimension);
    p.box = j.value("box", p.box);
    p.scale_prior = scale_prior_from_json(j.value("scale_prior", Json()));
    p.validate();
    return p;
  }
  if (family == "loglinear") {
    LogLinearPriorSpec p;
    p.basis = j.value("basis", p.basis);
    p.tau0 = j.value("tau0", p.tau0);
    p.beta = j.value("beta", p.beta);
    p.p = j.value("p", p.p);
    p.s = j.value("s", p.s);
    p.j_max = j.value("j_max", p.j_max);
    p.scale_prior = scale_prior_from_json(j.value("scale_prior", Json()));
    p.validate();
    return p;
  }
  throw std::invalid_argument("unknown prior family '" + family + "'");
}

Json to_json(const McmcSettings& m) {
  return {{"iterations", m.iterations},     {"burn_in", m.burn_in},
          {"stride", m.stride},             {"initial_step", m.initial_step},
          {"target_acceptance", m.target_acceptance}, {"adapt", m.adapt}};
}

McmcSettings mcmc_from_json(const Json& j) {
  McmcSettings m;
  if (j.is_null()) return m;
  m.iterations = j.value("iterations", m.iterations);
  m.burn_in = j.value("burn_in", m.burn_in);
  m.stride = j.value("stride", m.stride);
  m.initial_step = j.value("initial_step", m.initial_step);
  m.target_acceptance = j.value("target_acceptance", m.target_acceptance);
  m.adapt = j.value("adapt", m.adapt);
  m.validate();
  return m;
}

std::string digest(const Json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string model_digest(const ModelSpec& spec) { return digest(to_json(spec)); }

Json parse_flat_config(std::string_view text) {
  Json root = Json::object();
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  const auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.erase(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string raw = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    Json value = Json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    Json::json_pointer ptr;
    std::size_t start = 0;
    while (start <= key.size()) {
      const auto dot = key.find('.', start);
      ptr /= key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    root[ptr] = value;
  }
  return root;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

Json load_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  if (path.extension() == ".json") return Json::parse(text);
  return parse_flat_config(text);
}

}  // namespace aalen
