#include <doctest.h>

#include "fakespread/corpus.hpp"
#include "fakespread/csv.hpp"
#include "helpers.hpp"

using namespace fakespread;
using namespace fakespread::corpus;
using unit::write_file;

namespace {

const char* kClaimsHeader = "news_id,claim,label,topic\n";
const char* kTweetsHeader = "tweet_id,news_id,user_id,text,retweet_count,like_count,hashtags,created_at\n";

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("csv reader handles quotes, embedded newlines and CRLF") {
    std::istringstream in("a,\"b,c\",\"d\"\"e\"\r\n\"multi\nline\",x,\r\n");
    csv::Reader r(in);
    const auto row1 = r.next();
    REQUIRE(row1);
    CHECK(*row1 == std::vector<std::string>{"a", "b,c", "d\"e"});
    const auto row2 = r.next();
    REQUIRE(row2);
    CHECK(*row2 == std::vector<std::string>{"multi\nline", "x", ""});
    CHECK_FALSE(r.next());
    CHECK(csv::escape("plain") == "plain");
    CHECK(csv::escape("a,b") == "\"a,b\"");
    CHECK(csv::escape("q\"") == "\"q\"\"\"");
  }

  TEST_CASE("timestamps in the supported forms") {
    CHECK(parse_timestamp("1970-01-01T00:00:00Z")->seconds == 0);
    CHECK(parse_timestamp("2020-03-01T12:30:00Z")->seconds == 1583065800);
    CHECK(parse_timestamp("2020-03-01 12:30:00")->seconds == 1583065800);
    CHECK(parse_timestamp("2020-03-01T14:30:00+02:00")->seconds == 1583065800);
    CHECK(parse_timestamp("2020-03-01T12:30:00.250Z")->seconds == 1583065800);
    CHECK(parse_timestamp("2020-03-01")->seconds == 1583020800);
    CHECK(parse_timestamp("Sun Mar 01 12:30:00 +0000 2020")->seconds == 1583065800);
    CHECK(parse_timestamp("1583065800")->seconds == 1583065800);
    CHECK_FALSE(parse_timestamp("yesterday"));
    CHECK_FALSE(parse_timestamp("2020-13-01"));
    CHECK(format_timestamp({1583065800}) == "2020-03-01T12:30:00Z");
  }

  TEST_CASE("two claims with mapped labels") {
    support::TempDir tmp("corpus");
    const auto p = write_file(tmp.path(), "claims.csv", std::string(kClaimsHeader) + "c0,Masks work,0,covid\nc1,Votes were flipped,1,non_covid\n");
    const auto res = load_claims(p, ColumnMapping::fibvid_default().claims);
    REQUIRE(res.records.size() == 2);
    CHECK(res.records[0].truth_label == TruthLabel::True);
    CHECK(res.records[1].truth_label == TruthLabel::Fake);
    CHECK(res.records[1].category == Category::NonCovid);
    CHECK(res.report.accepted == 2);
    CHECK(res.report.rows == 2);
  }

  TEST_CASE("empty claim text is quarantined as malformed") {
    support::TempDir tmp("corpus");
    const auto p = write_file(tmp.path(), "claims.csv", std::string(kClaimsHeader) + "c0,,0,covid\nc1,ok,1,covid\n");
    const auto res = load_claims(p, ColumnMapping::fibvid_default().claims);
    CHECK(res.records.size() == 1);
    CHECK(res.report.malformed == 1);
    CHECK(res.report.quarantined == 1);
    CHECK(res.report.accepted + res.report.quarantined + res.report.errored == res.report.rows);
  }

  TEST_CASE("duplicate claim id names the id") {
    support::TempDir tmp("corpus");
    const auto p = write_file(tmp.path(), "claims.csv", std::string(kClaimsHeader) + "c1,a,0,covid\nc1,b,1,covid\n");
    CHECK_THROWS_WITH_AS(load_claims(p, ColumnMapping::fibvid_default().claims), doctest::Contains("c1"), DuplicateId);
  }

  TEST_CASE("missing file and missing column") {
    support::TempDir tmp("corpus");
    CHECK_THROWS_AS(load_claims(tmp.path() / "nope.csv", ColumnMapping::fibvid_default().claims), FileNotFound);
    const auto p = write_file(tmp.path(), "claims.csv", "news_id,claim\nc0,x\n");
    CHECK_THROWS_AS(load_claims(p, ColumnMapping::fibvid_default().claims), UnparsableHeader);
  }

  TEST_CASE("propagation rows: negative counts, unknown claims, timestamps") {
    support::TempDir tmp("corpus");
    const auto p = write_file(tmp.path(), "tweets.csv",
                              std::string(kTweetsHeader) +
                                  "t1,c0,u1,hello,-1,0,,2020-03-01T00:00:00Z\n"
                                  "t2,c9,u1,hello,1,0,,2020-03-01T00:00:00Z\n"
                                  "t3,c0,u2,\"hi, there\",4,2,a;b,2020-03-01T12:30:00Z\n"
                                  "t4,c0,u2,short row\n");
    const auto res = load_propagation(p, ColumnMapping::fibvid_default().propagation, {"c0"});
    REQUIRE(res.records.size() == 1);
    const auto& t = res.records[0];
    CHECK(t.tweet_id == "t3");
    CHECK(t.text == "hi, there");
    CHECK(t.created_at.seconds == 1583065800);
    CHECK(t.hashtags == std::vector<std::string>{"a", "b"});
    CHECK(res.report.quarantined == 2);
    CHECK(res.report.errored == 1);
    CHECK(res.report.rows == 4);
    std::size_t unknown = 0;
    for (const auto& q : res.report.quarantine) unknown += q.reason.find("unknown claim") != std::string::npos;
    CHECK(unknown == 1);
  }

  TEST_CASE("users load and reject duplicates") {
    support::TempDir tmp("corpus");
    const auto p = write_file(tmp.path(), "users.csv",
                              "user_id,description,followers_count,friends_count,created_at\n"
                              "u1,hi,10,5,2019-01-01\nu2,,0,0,2019-01-02\n");
    const auto res = load_users(p, ColumnMapping::fibvid_default().users);
    REQUIRE(res.records.size() == 2);
    CHECK(res.records[0].follower_count == 10);
    CHECK(res.records[0].following_count == 5);
    const auto dup = write_file(tmp.path(), "dup.csv",
                                "user_id,description,followers_count,friends_count,created_at\n"
                                "u1,a,1,1,2019-01-01\nu1,b,1,1,2019-01-01\n");
    CHECK_THROWS_AS(load_users(dup, ColumnMapping::fibvid_default().users), DuplicateId);
  }

  TEST_CASE("summary: one claim with three tweets") {
    const std::vector<NewsClaim> claims{{"c0", "x", TruthLabel::Fake, Category::Covid}};
    std::vector<TweetRecord> tweets(3);
    for (int i = 0; i < 3; ++i) {
      tweets[static_cast<std::size_t>(i)].tweet_id = "t" + std::to_string(i);
      tweets[static_cast<std::size_t>(i)].claim_id = "c0";
      tweets[static_cast<std::size_t>(i)].user_id = "u" + std::to_string(i % 2);
    }
    const auto s = dataset_summary(claims, tweets, {});
    const auto cov = static_cast<std::size_t>(Category::Covid), fake = static_cast<std::size_t>(TruthLabel::Fake);
    for (std::size_t c = 0; c < 2; ++c) {
      for (std::size_t t = 0; t < 2; ++t) {
        CHECK(s.avg_tweets_per_claim_by[c][t] == (c == cov && t == fake ? 3.0 : 0.0));
      }
    }
    CHECK(s.n_tweets == 3);
    CHECK(s.n_tweet_authors == 2);
    const auto empty = dataset_summary({}, {}, {});
    CHECK(empty.n_claims == 0);
    CHECK(empty.avg_tweets_per_claim_by[0][0] == 0.0);
  }

  TEST_CASE("canonical round trip yields identical records") {
    support::TempDir tmp("corpus");
    const std::vector<NewsClaim> claims{{"c0", "Claim \"quoted\", with comma", TruthLabel::Fake, Category::NonCovid},
                                        {"c1", "Unicode caf\xc3\xa9", TruthLabel::True, Category::Covid}};
    TweetRecord t;
    t.tweet_id = "t1";
    t.claim_id = "c0";
    t.user_id = "u1";
    t.text = "line one\nline two";
    t.retweet_count = 12;
    t.like_count = 3;
    t.hashtags = {"covid", "vaccine"};
    t.created_at = {1583065800};
    const std::vector<TweetRecord> tweets{t};
    const std::vector<UserProfile> users{{"u1", "bio", 100, 20, {1500000000}}};
    write_jsonl(tmp.path() / "c.jsonl", claims);
    write_jsonl(tmp.path() / "t.jsonl", tweets);
    write_jsonl(tmp.path() / "u.jsonl", users);
    const auto canon = ColumnMapping::canonical();
    CHECK(load_claims(tmp.path() / "c.jsonl", canon.claims).records == claims);
    CHECK(load_propagation(tmp.path() / "t.jsonl", canon.propagation, {"c0", "c1"}).records == tweets);
    CHECK(load_users(tmp.path() / "u.jsonl", canon.users).records == users);
  }

  TEST_CASE("mapping overlay from JSON") {
    const auto m = ColumnMapping::from_json(nlohmann::json::parse(
        R"({"claims": {"columns": {"claim_id": "id"}, "values": {"truth_label": {"real": "True", "fake": "Fake"}}}})"));
    CHECK(m.claims.column_for("claim_id") == "id");
    CHECK(m.claims.column_for("text") == "claim");
    CHECK(m.claims.values.at("truth_label").at("fake") == "Fake");
    CHECK_THROWS_AS(ColumnMapping::from_json(nlohmann::json::array()), UsageError);
  }
}
