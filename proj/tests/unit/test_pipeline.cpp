#include <doctest.h>

#include "fakespread/error.hpp"
#include "fakespread/pipeline.hpp"
#include "helpers.hpp"

using namespace fakespread;
using namespace fakespread::pipeline;
using nlohmann::json;

namespace {

const fs::path kSample = FAKESPREAD_SAMPLE_CONFIG;

// Sample configuration with smaller models so each run stays quick.
PipelineConfig sample_config(const fs::path& out, json extra = json::object()) {
  json o{{"out_dir", out.string()},
         {"models.classifiers", json::array({{{"name", "forest"}, {"kind", "forest"}, {"n_trees", 20}},
                                             {{"name", "logreg"}, {"kind", "logreg"}}})},
         {"models.regressors", json::array({{{"name", "boost"}, {"kind", "gbdt_reg"}, {"n_estimators", 20}}})},
         {"spread.model", "forest"},
         {"spread.regressor", "boost"}};
  for (auto& [k, v] : extra.items()) o[k] = v;
  return load_config(kSample, o);
}

void expect_usage(const json& overrides, const std::string& fragment) {
  CHECK_THROWS_WITH_AS(load_config(kSample, overrides), doctest::Contains(fragment.c_str()), UsageError);
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("config errors name the offending key") {
    expect_usage({{"topics.num_topicz", 3}}, "topics.num_topicz");
    expect_usage({{"seed", nullptr}}, "seed");
    expect_usage({{"seed", -1}}, "seed");
    expect_usage({{"inputs.claims", "missing.csv"}}, "inputs.claims");
    expect_usage({{"topics.num_topics", "ten"}}, "topics.num_topics");
    expect_usage({{"split.test_fraction", 1.5}}, "split.test_fraction");
    expect_usage({{"models.classifiers", json::array({{{"name", "x"}, {"kind", "tree"}, {"depth", 3}}})}},
                 "models.classifiers");
    expect_usage({{"models.classifiers", json::array({{{"name", "x"}, {"kind", "knn"}}})}}, "kind");
    CHECK_THROWS_AS(parse_config(json::array(), "."), UsageError);
  }

  TEST_CASE("overrides change the hash") {
    const auto a = load_config(kSample);
    const auto b = load_config(kSample, {{"topics.sweeps", 10}});
    CHECK(a.hash != b.hash);
    CHECK(b.tlda.sweeps == 10);
    CHECK(load_config(kSample).hash == a.hash);
    CHECK(a.seed == 42);
    CHECK(a.out_dir.is_absolute());
  }

  TEST_CASE("stages need their upstream artifacts") {
    support::TempDir tmp("pipe");
    Pipeline p(sample_config(tmp.path()));
    CHECK_THROWS_AS(p.run("topics"), DataError);
    p.run("ingest");
    p.run("topics");
    p.run("features");
    p.run("label");
    CHECK_THROWS_WITH_AS(p.run("evaluate"), doctest::Contains("no trained models found"), DataError);
    CHECK_THROWS_AS(p.run("deploy"), UsageError);
  }

  TEST_CASE("all equals the stages run one by one, and reruns are byte-identical") {
    support::TempDir tmp("pipe");
    auto cfg_a = sample_config(tmp.path() / "a");
    Pipeline a(cfg_a);
    a.run("all");
    Pipeline b(sample_config(tmp.path() / "b"));
    for (const auto& s : stage_names()) b.run(s);
    const auto metrics_a = unit::read_file(tmp.path() / "a" / "evaluate" / "metrics.json");
    CHECK_FALSE(metrics_a.empty());
    // the hash covers out_dir, so only the measurements are compared across directories
    auto without_hash = [](json j) {
      j.erase("config_hash");
      return j;
    };
    CHECK(without_hash(json::parse(metrics_a)) ==
          without_hash(json::parse(unit::read_file(tmp.path() / "b" / "evaluate" / "metrics.json"))));
    CHECK(unit::read_file(tmp.path() / "a" / "label" / "labeled.csv") ==
          unit::read_file(tmp.path() / "b" / "label" / "labeled.csv"));
    a.run("all");
    CHECK(unit::read_file(tmp.path() / "a" / "evaluate" / "metrics.json") == metrics_a);

    for (const std::string s : {"ingest", "topics", "features", "label", "models", "evaluate"}) {
      const auto m = json::parse(unit::read_file(tmp.path() / "a" / s / "manifest.json"));
      CHECK(m.at("config_hash") == cfg_a.hash);
      CHECK(m.at("seed") == 42);
      for (const auto& f : m.at("files")) CHECK(fs::exists(tmp.path() / "a" / s / f.get<std::string>()));
    }
    const auto metrics = json::parse(metrics_a);
    CHECK(metrics.at("classifiers").contains("forest"));
    CHECK(metrics.at("regressors").contains("boost"));
    CHECK(metrics.at("positive_class") == "1 = shared");
  }

  TEST_CASE("a different seed changes the models") {
    support::TempDir tmp("pipe");
    Pipeline a(sample_config(tmp.path() / "a"));
    a.run("all");
    Pipeline b(sample_config(tmp.path() / "b", {{"seed", 43}}));
    b.run("all");
    CHECK(unit::read_file(tmp.path() / "a" / "models" / "forest.json") !=
          unit::read_file(tmp.path() / "b" / "models" / "forest.json"));
  }

  TEST_CASE("spread prediction from the trained pipeline") {
    support::TempDir tmp("pipe");
    Pipeline p(sample_config(tmp.path()));
    p.run("all");
    const auto users = unit::read_file(tmp.path() / "ingest" / "users.jsonl");
    const auto sender = json::parse(users.substr(0, users.find('\n'))).at("user_id").get<std::string>();
    const auto cascade = p.predict_spread({{"sender", sender}, {"text", "the vaccine is safe"}});
    CHECK(cascade.at("mode") == "cascade");
    CHECK(cascade.at("expected_shares").get<double>() >= 0.0);
    CHECK(fs::exists(tmp.path() / "spread.json"));
    const auto reg = p.predict_spread({{"sender", sender}, {"text", "the vaccine is safe"}, {"mode", "regressor"}});
    CHECK(reg.at("expected_shares").get<double>() >= 0.0);
    CHECK_THROWS_AS(p.predict_spread({{"sender", "nobody-here"}, {"text", "x"}}), DataError);
    CHECK_THROWS_AS(p.predict_spread({{"text", "x"}}), UsageError);
  }
}
