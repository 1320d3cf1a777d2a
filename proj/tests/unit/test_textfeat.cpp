#include <doctest.h>

#include "fakespread/error.hpp"
#include "fakespread/textfeat.hpp"
#include "helpers.hpp"

using namespace fakespread;
using namespace fakespread::textfeat;

namespace {

Lexicon good_lexicon() {
  Lexicon lex;
  lex.add("good", {0.7, 0.6});
  return lex;
}

}  // namespace

TEST_SUITE("textfeat") {
  TEST_CASE("tokenize splits sentences and words") {
    const auto t = tokenize("Go now! It works.");
    CHECK(t.sentences.size() == 2);
    CHECK(t.words == std::vector<std::string>{"go", "now", "it", "works"});
  }

  TEST_CASE("tokenize strips urls, mentions and hashtag markers") {
    CHECK(tokenize("see https://x.co #Covid19 @bob").words == std::vector<std::string>{"see", "covid19"});
    CHECK(tokenize("Don't panic").words == std::vector<std::string>{"don't", "panic"});
    const auto empty = tokenize("");
    CHECK(empty.words.empty());
    CHECK(empty.sentences.empty());
    CHECK(tokenize("Wait... what?!").sentences.size() == 2);
    CHECK(tokenize("version 2.5 is out").sentences.size() == 1);
  }

  TEST_CASE("syllable counts") {
    CHECK(count_syllables("cat") == 1);
    CHECK(count_syllables("people") == 2);
    CHECK(count_syllables("syllable") == 3);
    CHECK(count_syllables("make") == 1);
    CHECK(count_syllables("the") == 1);
    CHECK(count_syllables("beautiful") == 3);
    CHECK(count_syllables("rhythm") == 1);
    CHECK_THROWS_AS(count_syllables(""), UsageError);
  }

  TEST_CASE("smog index") {
    CHECK(smog_index("The cat sat. The dog ran.") == doctest::Approx(3.1291).epsilon(1e-12));
    CHECK(smog_index("") == 0.0);
    std::string text;
    for (int i = 0; i < 30; ++i) text += i < 25 ? "A beautiful day. " : "Go now. ";
    const auto t = tokenize(text);
    REQUIRE(t.sentences.size() == 30);
    CHECK(smog_index(t) == doctest::Approx(1.0430 * std::sqrt(25.0) + 3.1291).epsilon(1e-12));
    CHECK(smog_index(t) == doctest::Approx(8.3441).epsilon(1e-9));
  }

  TEST_CASE("lexical diversity and word length") {
    CHECK(lexical_diversity({"the", "cat", "sat", "on", "the", "mat"}) == doctest::Approx(5.0 / 6.0));
    CHECK(lexical_diversity({"a", "b", "c"}) == 1.0);
    CHECK(lexical_diversity({}) == 0.0);
    CHECK(avg_word_length({"ab", "abcd"}) == 3.0);
    CHECK(avg_word_length({}) == 0.0);
    CHECK(avg_word_length({"caf\xc3\xa9"}) == 4.0);  // code points, not bytes
  }

  TEST_CASE("complexity categories with default and custom cutpoints") {
    CHECK(complexity_category(3.13) == ComplexityCategory::Simple);
    CHECK(complexity_category(9.0) == ComplexityCategory::Medium);
    CHECK(complexity_category(10.0) == ComplexityCategory::Medium);
    CHECK(complexity_category(12.0) == ComplexityCategory::Medium);
    CHECK(complexity_category(14.0) == ComplexityCategory::Complex);
    CHECK(complexity_category(10.0, {5.0, 8.0}) == ComplexityCategory::Complex);
    const auto f = complexity("The cat sat.");
    CHECK(f.category == ComplexityCategory::Simple);
    CHECK(f.lexical_diversity == 1.0);
  }

  TEST_CASE("sentiment with a one-word lexicon") {
    const auto lex = good_lexicon();
    const auto pos = sentiment("good", lex);
    CHECK(pos.polarity == doctest::Approx(0.7));
    CHECK(pos.subjectivity == doctest::Approx(0.6));
    CHECK(pos.category == SentimentCategory::Positive);
    const auto neg = sentiment("not good", lex);
    CHECK(neg.polarity == doctest::Approx(-0.7));
    CHECK(neg.category == SentimentCategory::Negative);
    const auto none = sentiment("nothing here", lex);
    CHECK(none.polarity == 0.0);
    CHECK(none.subjectivity == 0.0);
    CHECK(none.category == SentimentCategory::Neutral);
  }

  TEST_CASE("lexicon validation") {
    Lexicon lex;
    CHECK_THROWS_AS(lex.add("x", {1.5, 0.0}), UsageError);
    CHECK_THROWS_AS(lex.add("x", {0.0, -0.1}), UsageError);
    support::TempDir tmp("lex");
    CHECK_THROWS_AS(Lexicon::load(unit::write_file(tmp.path(), "bad.tsv", "good\t0.7\n")), DataError);
    const auto ok = Lexicon::load(unit::write_file(tmp.path(), "ok.tsv", "# c\ngood\t0.7\t0.6\n"));
    REQUIRE(ok.find("good"));
    CHECK(ok.find("good")->polarity == 0.7);
  }

  TEST_CASE("bundled lexicon") {
    const auto lex = Lexicon::load(std::filesystem::path(FAKESPREAD_DATA_DIR) / "lexicon" / "en_sentiment.tsv");
    CHECK(lex.size() > 1000);
    REQUIRE(lex.find("good"));
    CHECK(lex.find("good")->polarity == doctest::Approx(0.7));
    CHECK(lex.find("good")->subjectivity == doctest::Approx(0.6));
    CHECK(sentiment("This is a terrible idea", lex).category == SentimentCategory::Negative);
  }

  TEST_CASE("style counts pronouns") {
    const auto a = style("I think it works");
    CHECK(a.personal_pronouns == 1);
    CHECK(a.impersonal_pronouns == 1);
    CHECK(a.category == StyleCategory::Stylic);
    const auto b = style("The report says so");
    CHECK(b.personal_pronouns == 0);
    CHECK(b.impersonal_pronouns == 0);
    CHECK(b.category == StyleCategory::NonStylic);
    CHECK(style("").category == StyleCategory::NonStylic);
  }

  TEST_CASE("features are deterministic") {
    const std::string text = "We must act now! It is a dangerous, unprecedented situation.";
    CHECK(complexity(text).smog == complexity(text).smog);
    CHECK(tokenize(text).words == tokenize(text).words);
  }
}
