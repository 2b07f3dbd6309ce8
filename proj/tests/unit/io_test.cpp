#include <gtest/gtest.h>

#include <filesystem>

#include "aalen/io.hpp"
#include "aalen/processes.hpp"
#include "aalen/random.hpp"
#include "generators.hpp"

using namespace aalen;

namespace {

const Domain kUnit{0.0, 1.0};

MarkovModel two_state() {
  MarkovModel m;
  m.spec.states = {"a", "b"};
  m.spec.initial = {0.7, 0.3};
  m.spec.rates = {{{"a", "b"}, IntensityModel::constant(1.0, kUnit)},
                  {{"b", "a"}, IntensityModel::constant(0.5, kUnit)}};
  m.target = {{"a", "b"}};
  m.n = 12;
  return m;
}

}  // namespace

TEST(IntensityJson, RoundTripsEveryFamily) {
  Stream rng(1);
  const Domain d{0.5, 2.5};
  for (int fam = 0; fam < 5; ++fam) {
    const auto l = testgen::random_intensity(rng, d, fam);
    const Json j = to_json(l);
    EXPECT_EQ(j.at("variant"), l.variant_name());
    EXPECT_TRUE(j.contains("params"));
    EXPECT_TRUE(j.contains("domain"));
    const auto back = intensity_from_json(j);
    EXPECT_EQ(back, l) << j.dump();
    EXPECT_EQ(to_json(back).dump(), j.dump());
  }
}

TEST(IntensityJson, ClosedFormByRegistryId) {
  const Json j = Json::parse(R"({"variant":"closed_form","params":{"id":"linear_decreasing","level":2,"slope":2},"domain":[0,1]})");
  const auto l = intensity_from_json(j);
  EXPECT_DOUBLE_EQ(l(0.25), 1.5);
  EXPECT_THROW(intensity_from_json(Json::parse(R"({"variant":"closed_form","params":{"id":"gompertz"}})")),
               std::invalid_argument);
}

TEST(RecordJson, FieldsAndRoundTrip) {
  const ModelSpec spec = two_state();
  const auto rec = simulate(spec, 5);
  const Json j = to_json(rec);
  for (const char* k : {"model", "n", "T", "events", "exposure_breakpoints", "exposure_values", "seed", "spec_digest"}) {
    EXPECT_TRUE(j.contains(k)) << k;
  }
  EXPECT_EQ(j.at("spec_digest"), model_digest(spec));
  EXPECT_EQ(record_from_json(j), rec);
  EXPECT_EQ(to_json(simulate(spec, 5)).dump(), j.dump());
}

TEST(ModelJson, RoundTripsEveryModel) {
  const std::vector<ModelSpec> specs{
      PoissonModel{IntensityModel::constant(2.0, kUnit), 40, 1.0, Domain{0.0, 0.5}, 3.0},
      CensoringModel{IntensityModel::constant(1.0, kUnit), {CensoringKind::exponential, 0.3}, 20, 1.0},
      two_state()};
  for (const auto& s : specs) {
    const Json j = to_json(s);
    EXPECT_EQ(to_json(model_from_json(j)).dump(), j.dump());
    EXPECT_EQ(model_digest(model_from_json(j)), model_digest(s));
  }
  EXPECT_NE(model_digest(specs[0]), model_digest(with_n(specs[0], 41)));
}

TEST(PriorJson, RoundTrips) {
  DpmPriorSpec d;
  d.truncation = 40;
  SplinePriorSpec s;
  s.box = 2.5;
  s.scale_prior.kind = ScalePrior::Kind::lognormal;
  LogLinearPriorSpec l;
  l.beta = 0.8;
  for (const PriorSpec& p : {PriorSpec(d), PriorSpec(s), PriorSpec(l)}) {
    const Json j = to_json(p);
    EXPECT_EQ(to_json(prior_from_json(j)).dump(), j.dump());
  }
  EXPECT_THROW(prior_from_json(Json::parse(R"({"family":"gp"})")), std::invalid_argument);
}

TEST(FlatConfig, NestedKeysAndLiterals) {
  const Json j = parse_flat_config(R"(
# comment
model.model = poisson
model.n = 100   # trailing comment
model.intensity.domain = [0, 1]
rate.slope_bracket = [-0.45, -0.2]
label = "a # b"
write_chains = false
)");
  EXPECT_EQ(j["model"]["model"], "poisson");
  EXPECT_EQ(j["model"]["n"], 100);
  EXPECT_EQ(j["model"]["intensity"]["domain"], Json::parse("[0, 1]"));
  EXPECT_DOUBLE_EQ(j["rate"]["slope_bracket"][0].get<double>(), -0.45);
  EXPECT_EQ(j["label"], "a # b");
  EXPECT_EQ(j["write_chains"], false);
  EXPECT_THROW(parse_flat_config("no equals sign"), std::invalid_argument);
}

TEST(FlatConfig, LoadsFromFile) {
  const auto p = std::filesystem::temp_directory_path() / "aalen_io_test.cfg";
  write_text_file(p, "seed = 5\nmcmc.stride = 3\n");
  const Json j = load_config(p);
  EXPECT_EQ(j["seed"], 5);
  EXPECT_EQ(mcmc_from_json(j["mcmc"]).stride, 3);
  std::filesystem::remove(p);
}

TEST(Digest, StableAndSensitive) {
  const Json a = Json::parse(R"({"x":1,"y":[1,2]})");
  const Json b = Json::parse(R"({"y":[1,2],"x":1})");
  EXPECT_EQ(digest(a), digest(b));
  EXPECT_NE(digest(a), digest(Json::parse(R"({"x":2,"y":[1,2]})")));
  EXPECT_EQ(digest(a).size(), 16u);
}
