#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fakespread/fakespread.h"
#include "../support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  fs_string_free(s);
  return out;
}

std::string overrides_for(const fs::path& out) {
  return json{{"out_dir", out.string()},
              {"models.classifiers", json::array({{{"name", "forest"}, {"kind", "forest"}, {"n_trees", 10}}})},
              {"models.regressors", json::array({{{"name", "boost"}, {"kind", "gbdt_reg"}, {"n_estimators", 10}}})},
              {"spread.model", "forest"},
              {"spread.regressor", "boost"}}
      .dump();
}

}  // namespace

TEST_SUITE("c_api") {
  TEST_CASE("scalar helpers") {
    double v = 0;
    REQUIRE(fs_tff(99, 49, &v) == FS_OK);
    CHECK(v == 2.0);
    CHECK(fs_tff(-1, 0, &v) == FS_ERR_USAGE);
    CHECK(std::string(fs_last_error()).find("negative") != std::string::npos);
    CHECK(fs_tff(0, 0, nullptr) == FS_ERR_USAGE);

    const double theta[] = {1, 0}, post[] = {1, 0};
    REQUIRE(fs_acceptance_score(theta, post, 2, 20.0, 10.0, &v) == FS_OK);
    CHECK(v == 1.0);
    CHECK(fs_acceptance_score(theta, post, 2, 1.0, 0.0, &v) == FS_ERR_USAGE);

    const double y[] = {0, 0, 1, 1}, s[] = {0.1, 0.4, 0.35, 0.8};
    REQUIRE(fs_auroc(y, s, 4, &v) == FS_OK);
    CHECK(v == 0.75);
    const double one[] = {1, 1};
    CHECK(fs_auroc(one, s, 2, &v) == FS_ERR_USAGE);
    CHECK(std::string(fs_version()) == "0.1.0");
  }

  TEST_CASE("text features as json") {
    char* out = nullptr;
    REQUIRE(fs_text_features("I think this is a terrible idea.", nullptr, &out) == FS_OK);
    const auto j = json::parse(take(out));
    CHECK(j.at("polarity").get<double>() < 0.0);
    CHECK(j.at("personal_pronouns") == 1);
    CHECK(fs_text_features("x", "/no/such/lexicon.tsv", &out) == FS_ERR_DATA);
  }

  TEST_CASE("pipeline lifecycle and trained artifacts") {
    support::TempDir tmp("capi");
    fs_pipeline* p = nullptr;
    CHECK(fs_pipeline_open("/no/such/config.json", nullptr, &p) == FS_ERR_USAGE);
    CHECK(p == nullptr);
    CHECK(fs_pipeline_open(FAKESPREAD_SAMPLE_CONFIG, R"({"bogus": 1})", &p) == FS_ERR_USAGE);
    CHECK(std::string(fs_last_error()).find("bogus") != std::string::npos);

    REQUIRE(fs_pipeline_open(FAKESPREAD_SAMPLE_CONFIG, overrides_for(tmp.path()).c_str(), &p) == FS_OK);
    char* s = nullptr;
    REQUIRE(fs_pipeline_out_dir(p, &s) == FS_OK);
    CHECK(fs::path(take(s)) == tmp.path());
    REQUIRE(fs_pipeline_config_json(p, &s) == FS_OK);
    CHECK(json::parse(take(s)).at("seed") == 42);
    CHECK(fs_pipeline_run(p, "evaluate") == FS_ERR_DATA);
    CHECK(fs_pipeline_run(p, "deploy") == FS_ERR_USAGE);
    REQUIRE(fs_pipeline_run(p, "all") == FS_OK);

    fs_topic_model* tm = nullptr;
    REQUIRE(fs_topic_model_load((tmp.path() / "topics" / "tlda.json").c_str(), &tm) == FS_OK);
    int T = 0;
    REQUIRE(fs_topic_model_num_topics(tm, &T) == FS_OK);
    CHECK(T == 2);
    std::vector<double> post(static_cast<std::size_t>(T));
    REQUIRE(fs_topic_model_infer(tm, "vaccine safety", post.data(), post.size()) == FS_OK);
    CHECK(post[0] + post[1] == doctest::Approx(1.0));
    CHECK(fs_topic_model_infer(tm, "x", post.data(), 1) == FS_ERR_USAGE);
    CHECK(fs_topic_model_user_theta(tm, "nobody-here", post.data(), post.size()) == FS_ERR_USAGE);
    fs_topic_model_free(tm);

    fs_model* m = nullptr;
    REQUIRE(fs_model_load((tmp.path() / "models" / "forest.json").c_str(), &m) == FS_OK);
    std::size_t d = 0;
    REQUIRE(fs_model_num_features(m, &d) == FS_OK);
    CHECK(d == 21);
    int cls = 0;
    REQUIRE(fs_model_is_classifier(m, &cls) == FS_OK);
    CHECK(cls == 1);
    std::vector<double> x(d, 0.0);
    double score = -1, label = -1;
    REQUIRE(fs_model_score(m, x.data(), x.size(), &score) == FS_OK);
    REQUIRE(fs_model_predict(m, x.data(), x.size(), &label) == FS_OK);
    CHECK(score >= 0.0);
    CHECK(score <= 1.0);
    CHECK(label == (score >= 0.5 ? 1.0 : 0.0));
    CHECK(fs_model_score(m, x.data(), 3, &score) == FS_ERR_USAGE);
    fs_model_free(m);
    CHECK(fs_model_load((tmp.path() / "missing.json").c_str(), &m) == FS_ERR_DATA);

    CHECK(fs_pipeline_predict_spread(p, R"({"text": "x"})", &s) == FS_ERR_USAGE);
    fs_pipeline_close(p);
    fs_pipeline_close(nullptr);
  }
}
