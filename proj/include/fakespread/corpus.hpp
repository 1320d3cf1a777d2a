#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fakespread/error.hpp"

namespace fakespread::corpus {

enum class TruthLabel { True, Fake };
enum class Category { Covid, NonCovid };

class FileNotFound : public DataError {
 public:
  using DataError::DataError;
};

/// A mapped column is absent from the file header.
class UnparsableHeader : public DataError {
 public:
  using DataError::DataError;
};

class DuplicateId : public DataError {
 public:
  using DataError::DataError;
};

std::string_view to_string(TruthLabel label);
std::string_view to_string(Category category);

/// Seconds since the Unix epoch, UTC.
struct Timestamp {
  std::int64_t seconds = 0;
  auto operator<=>(const Timestamp&) const = default;
};

/// Accepts ISO-8601 ("2020-03-01T12:30:00Z", "2020-03-01 12:30:00",
/// "+hh:mm" offsets, fractional seconds, date-only), the Twitter API form
/// ("Wed Oct 10 20:19:24 +0000 2018") and bare epoch seconds. Missing zone
/// means UTC.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);  // "YYYY-MM-DDTHH:MM:SSZ"

struct NewsClaim {
  std::string claim_id;
  std::string text;
  TruthLabel truth_label = TruthLabel::True;
  Category category = Category::Covid;
  bool operator==(const NewsClaim&) const = default;
};

struct TweetRecord {
  std::string tweet_id;
  std::string claim_id;
  std::string user_id;
  std::string text;
  std::int64_t retweet_count = 0;
  std::int64_t like_count = 0;
  std::vector<std::string> hashtags;
  Timestamp created_at;
  bool operator==(const TweetRecord&) const = default;
};

struct UserProfile {
  std::string user_id;
  std::string description;
  std::int64_t follower_count = 0;
  std::int64_t following_count = 0;
  Timestamp created_at;
  bool operator==(const UserProfile&) const = default;
};

/// Binds source columns to record fields, plus value translation tables for
/// the enum fields (e.g. {"0": "True", "1": "Fake"}).
struct SegmentMapping {
  std::map<std::string, std::string> columns;  // field name -> column name
  std::map<std::string, std::map<std::string, std::string>> values;  // field -> raw -> canonical
  std::string hashtag_separator = ";";

  /// Column for a field; the field name itself when unmapped.
  std::string column_for(const std::string& field) const;
};

struct ColumnMapping {
  SegmentMapping claims;
  SegmentMapping propagation;
  SegmentMapping users;

  /// Identity mapping for the canonical JSON-lines dump.
  static ColumnMapping canonical();
  /// Mapping for the FibVID distribution layout.
  static ColumnMapping fibvid_default();
  /// Overlay a JSON document {"claims": {"columns": {...}, "values": {...}}, ...}
  /// on top of `base`.
  static ColumnMapping from_json(const nlohmann::json& doc, ColumnMapping base = fibvid_default());
};

struct QuarantinedRow {
  std::size_t row = 0;  // 1-based data row (header excluded)
  std::string reason;
};

/// accepted + quarantined + errored == rows.
struct IngestReport {
  std::string file;
  std::size_t rows = 0;
  std::size_t accepted = 0;
  std::size_t quarantined = 0;
  std::size_t errored = 0;
  std::size_t malformed = 0;  // rows violating a record invariant (subset of quarantined)
  std::vector<QuarantinedRow> quarantine;

  nlohmann::json to_json() const;
};

template <typename Record>
struct LoadResult {
  std::vector<Record> records;
  IngestReport report;
};

LoadResult<NewsClaim> load_claims(const std::filesystem::path& path, const SegmentMapping& mapping);

/// Rows whose claim_id is not in `known_claims` are quarantined.
LoadResult<TweetRecord> load_propagation(const std::filesystem::path& path, const SegmentMapping& mapping,
                                         const std::set<std::string>& known_claims);

LoadResult<UserProfile> load_users(const std::filesystem::path& path, const SegmentMapping& mapping);

/// Grid indexed by [category][truth_label].
template <typename T>
using CellTable = std::array<std::array<T, 2>, 2>;

struct CorpusSummary {
  CellTable<std::size_t> n_claims_by{};
  CellTable<std::size_t> n_tweets_by{};
  CellTable<double> avg_tweets_per_claim_by{};
  std::size_t n_claims = 0;
  std::size_t n_tweets = 0;
  std::size_t n_users = 0;         // loaded user profiles
  std::size_t n_tweet_authors = 0; // distinct user_id values among tweets

  nlohmann::json to_json() const;
};

CorpusSummary dataset_summary(const std::vector<NewsClaim>& claims, const std::vector<TweetRecord>& tweets,
                              const std::vector<UserProfile>& users);

// Canonical JSON-lines dump. Field names match the struct members.
nlohmann::json to_json(const NewsClaim& claim);
nlohmann::json to_json(const TweetRecord& tweet);
nlohmann::json to_json(const UserProfile& user);

template <typename Record>
void write_jsonl(const std::filesystem::path& path, const std::vector<Record>& records);

extern template void write_jsonl(const std::filesystem::path&, const std::vector<NewsClaim>&);
extern template void write_jsonl(const std::filesystem::path&, const std::vector<TweetRecord>&);
extern template void write_jsonl(const std::filesystem::path&, const std::vector<UserProfile>&);

}  // namespace fakespread::corpus
