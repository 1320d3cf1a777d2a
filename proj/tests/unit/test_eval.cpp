#include <doctest.h>

#include <sstream>

#include "fakespread/error.hpp"
#include "fakespread/eval.hpp"
#include "helpers.hpp"

using namespace fakespread;
using namespace fakespread::eval;

TEST_SUITE("eval") {
  TEST_CASE("confusion matrix counts") {
    const std::vector<double> y{1, 1, 0, 0, 1}, p{1, 0, 1, 0, 1};
    const auto cm = confusion(y, p);
    CHECK(cm.tp == 2);
    CHECK(cm.fn == 1);
    CHECK(cm.fp == 1);
    CHECK(cm.tn == 1);
    CHECK(cm.total() == 5);
    CHECK_THROWS_AS(confusion(y, std::vector<double>{1}), UsageError);
  }

  TEST_CASE("metrics agree with hand-reduced fractions") {
    for (const auto& c : support::kConfusionCases) {
      const ConfusionMatrix cm{c.tp, c.fp, c.tn, c.fn};
      const auto m = classification_metrics(cm);
      CHECK(m.accuracy == c.accuracy.value());
      CHECK(m.precision == c.precision.value());
      CHECK(m.recall == c.recall.value());
      CHECK(m.f1 == c.f1.value());
    }
  }

  TEST_CASE("roc curve and auroc") {
    const std::vector<double> y{0, 0, 1, 1}, s{0.1, 0.4, 0.35, 0.8};
    const auto roc = roc_auroc(y, s);
    CHECK(roc.auroc == 0.75);
    REQUIRE(roc.points.size() == 5);
    CHECK(std::isinf(roc.points.front().threshold));
    CHECK(roc.points.back().fpr == 1.0);
    CHECK(roc.points.back().tpr == 1.0);
    CHECK(roc_auroc(std::vector<double>{0, 1}, std::vector<double>{0.5, 0.5}).auroc == 0.5);
    CHECK(roc_auroc(std::vector<double>{1, 0}, std::vector<double>{0.9, 0.1}).auroc == 1.0);
    CHECK_THROWS_AS(roc_auroc(std::vector<double>{1, 1}, std::vector<double>{0.1, 0.2}), UsageError);
    std::ostringstream csv;
    roc.write_csv(csv);
    CHECK(csv.str().rfind("fpr,tpr,threshold\n0,0,inf\n", 0) == 0);
  }

  TEST_CASE("auroc matches the rank statistic") {
    fakespread::Rng rng(5);
    for (int inst = 0; inst < 50; ++inst) {
      std::vector<double> y{0, 1}, s{0, 0};
      const std::size_t n = 2 + rng.below(60);
      y.resize(n);
      s.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (i >= 2) y[i] = static_cast<double>(rng.below(2));
        s[i] = static_cast<double>(rng.below(8)) / 8.0;
      }
      CHECK(roc_auroc(y, s).auroc == doctest::Approx(support::mann_whitney_auroc(y, s)).epsilon(1e-12));
    }
  }

  TEST_CASE("regression metrics") {
    const std::vector<double> y{1, 2, 3};
    const auto perfect = regression_metrics(y, y);
    CHECK(perfect.rmse == 0.0);
    CHECK(perfect.r2 == 1.0);
    const auto mean = regression_metrics(y, std::vector<double>{2, 2, 2});
    CHECK(mean.r2 == 0.0);
    CHECK(mean.rmse == doctest::Approx(std::sqrt(2.0 / 3.0)));
    CHECK(regression_metrics(std::vector<double>{4, 4}, std::vector<double>{3, 5}).r2 == 0.0);
    CHECK_THROWS_AS(regression_metrics(y, std::vector<double>{1}), UsageError);
  }
}
