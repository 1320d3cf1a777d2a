#include <doctest.h>

#include <numeric>

#include "fakespread/error.hpp"
#include "fakespread/topics.hpp"
#include "helpers.hpp"

using namespace fakespread;
using namespace fakespread::topics;

namespace {

void check_simplex(const TldaModel& m) {
  for (const auto& row : m.theta()) {
    CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : row) CHECK(v > 0.0);
  }
  for (const auto& row : m.phi()) CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  const auto& bg = m.phi_background();
  CHECK(std::accumulate(bg.begin(), bg.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.pi() > 0.0);
  CHECK(m.pi() < 1.0);
}

}  // namespace

TEST_SUITE("topics") {
  TEST_CASE("vocabulary filtering") {
    const std::vector<std::string> texts{"a b", "b c"};
    CHECK(build_vocabulary(texts, 2).words() == std::vector<std::string>{"b"});
    CHECK(build_vocabulary(texts, 1).words() == std::vector<std::string>{"a", "b", "c"});
    CHECK(build_vocabulary(texts, 1, {"b"}).words() == std::vector<std::string>{"a", "c"});
    const Vocabulary v({"b", "c"});
    CHECK(v.encode("c a b C") == std::vector<int>{1, 0, 1});
    CHECK_FALSE(v.index("a"));
  }

  TEST_CASE("single topic gives theta of one") {
    const auto corpus = support::planted_corpus(1, 10, 4);
    const auto vocab = build_vocabulary(corpus.texts, 1);
    TldaConfig cfg;
    cfg.num_topics = 1;
    cfg.sweeps = 20;
    const auto fit = fit_tlda(corpus.users, vocab, cfg);
    for (const auto& row : fit.model.theta()) CHECK(row == std::vector<double>{1.0});
    check_simplex(fit.model);
  }

  TEST_CASE("zero sweeps keeps simplex invariants") {
    const auto corpus = support::planted_corpus(2, 10, 4);
    const auto vocab = build_vocabulary(corpus.texts, 1);
    TldaConfig cfg;
    cfg.num_topics = 3;
    cfg.sweeps = 0;
    check_simplex(fit_tlda(corpus.users, vocab, cfg).model);
  }

  TEST_CASE("planted topics are recovered and counts stay consistent") {
    const auto corpus = support::planted_corpus(5, 60, 8);
    const auto vocab = build_vocabulary(corpus.texts, 1);
    TldaConfig cfg;
    cfg.num_topics = 2;
    cfg.sweeps = 100;
    cfg.check_consistency = true;
    const auto fit = fit_tlda(corpus.users, vocab, cfg);
    check_simplex(fit.model);
    CHECK(support::purity(fit.state.z, corpus.planted, 2, 2) >= 0.9);
    // each user's dominant topic matches its planted favourite
    const int topic_of_user0 = support::argmax(fit.model.user_topic_distribution("user0"));
    const int topic_of_user1 = support::argmax(fit.model.user_topic_distribution("user1"));
    CHECK(topic_of_user0 != topic_of_user1);
    // background words are mostly routed to the background distribution
    const auto bg = *vocab.index("bg0");
    CHECK(fit.model.phi_background()[static_cast<std::size_t>(bg)] > fit.model.phi()[0][static_cast<std::size_t>(bg)]);
  }

  TEST_CASE("refit with the same seed is bit-identical, other seeds differ") {
    const auto corpus = support::planted_corpus(9, 30, 6);
    const auto vocab = build_vocabulary(corpus.texts, 1);
    TldaConfig cfg;
    cfg.num_topics = 3;
    cfg.sweeps = 30;
    const auto a = fit_tlda(corpus.users, vocab, cfg);
    const auto b = fit_tlda(corpus.users, vocab, cfg);
    CHECK(a.model.theta() == b.model.theta());
    CHECK(a.model.phi() == b.model.phi());
    CHECK(a.state.z == b.state.z);
    cfg.seed = 43;
    CHECK(fit_tlda(corpus.users, vocab, cfg).state.z != a.state.z);
  }

  TEST_CASE("inference") {
    Vocabulary vocab({"ballot", "vaccine"});
    const auto m = TldaModel::from_parts(vocab, {"u"}, {{0.5, 0.5}}, {{0.5, 0.5}, {0.95, 0.05}}, {0.5, 0.5}, 0.5,
                                         1.0, 0.01, 20.0, 1, 0);
    const auto p = m.infer_tweet_topic("vaccine");
    CHECK(p[0] / p[1] == doctest::Approx(10.0));
    const auto oov = m.infer_tweet_topic("nothing known here");
    CHECK(oov == std::vector<double>{0.5, 0.5});
    CHECK_THROWS_AS(m.user_topic_distribution("stranger"), UsageError);
  }

  TEST_CASE("model JSON round trip") {
    const auto corpus = support::planted_corpus(3, 10, 4);
    const auto vocab = build_vocabulary(corpus.texts, 1);
    TldaConfig cfg;
    cfg.num_topics = 2;
    cfg.sweeps = 5;
    const auto m = fit_tlda(corpus.users, vocab, cfg).model;
    const auto back = TldaModel::from_json(m.to_json());
    CHECK(back.to_json() == m.to_json());
    CHECK(back.infer_tweet_topic(corpus.texts[0]) == m.infer_tweet_topic(corpus.texts[0]));
  }

  TEST_CASE("argument validation") {
    const auto corpus = support::planted_corpus(4, 4, 2);
    const auto vocab = build_vocabulary(corpus.texts, 1);
    TldaConfig cfg;
    cfg.num_topics = 0;
    CHECK_THROWS_AS(fit_tlda(corpus.users, vocab, cfg), UsageError);
    cfg.num_topics = 2;
    cfg.beta = 0.0;
    CHECK_THROWS_AS(fit_tlda(corpus.users, vocab, cfg), UsageError);
    cfg.beta = 0.01;
    CHECK_THROWS_AS(fit_tlda({}, vocab, cfg), UsageError);
    CHECK_THROWS_AS(fit_tlda(corpus.users, Vocabulary{}, cfg), UsageError);
    auto twice = corpus.users;
    twice.push_back(corpus.users.front());
    CHECK_THROWS_AS(fit_tlda(twice, vocab, cfg), UsageError);
  }
}
