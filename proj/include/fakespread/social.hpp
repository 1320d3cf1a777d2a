#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fakespread/corpus.hpp"
#include "fakespread/ml.hpp"
#include "fakespread/textfeat.hpp"
#include "fakespread/topics.hpp"

namespace fakespread::social {

/// Follower-following ratio (followers + 1) / (following + 1).
/// Throws UsageError on negative counts.
double tff(std::int64_t follower_count, std::int64_t following_count);

struct SocialFeatures {
  double tff = 1.0;
  std::int64_t follower_count = 0;
  std::int64_t following_count = 0;
  std::int64_t like_count = 0;
  std::int64_t retweet_count = 0;
};

SocialFeatures social_features(const corpus::UserProfile& author, const corpus::TweetRecord& tweet);

// ---------------------------------------------------------------------------
// Labels

enum class ShareLabel { NotShared = 0, Shared = 1 };
enum class LabelMode { RetweetThreshold, FollowerEvidence };

LabelMode label_mode_from_string(const std::string& s);
std::string_view to_string(LabelMode m);

struct FollowEdge {
  std::string follower_id;
  std::string followee_id;
};

/// CSV with header "follower_id,followee_id".
std::vector<FollowEdge> load_follow_edges(const std::filesystem::path& path);

struct LabelConfig {
  LabelMode mode = LabelMode::RetweetThreshold;
  std::int64_t tau = 1;
  bool auto_calibrate = true;
  double min_positive_rate = 0.40;
  double max_positive_rate = 0.50;
};

struct LabelResult {
  std::vector<ShareLabel> labels;
  std::int64_t tau = 0;      // threshold used (retweet mode)
  bool calibrated = false;   // tau came from auto-calibration and hit the band
  double positive_rate = 0.0;
};

/// Smallest tau >= 1 whose positive rate lies in [lo, hi]; nullopt when no
/// tau does.
std::optional<std::int64_t> calibrate_tau(std::span<const std::int64_t> retweet_counts, double lo, double hi);

/// Throws UsageError on tau < 1 or follower-evidence mode without edges.
LabelResult label_shared(const std::vector<corpus::TweetRecord>& tweets, const LabelConfig& config,
                         const std::vector<FollowEdge>* edges = nullptr);

// ---------------------------------------------------------------------------
// Feature merging

struct TextFeatureConfig {
  textfeat::ComplexityThresholds complexity;
  textfeat::SentimentConfig sentiment;
  textfeat::PronounLists pronouns;
  textfeat::Lexicon lexicon;
};

struct TextFeatures {
  textfeat::ComplexityFeatures complexity;
  textfeat::PsychFeatures psych;
  textfeat::StyleFeatures style;
};

TextFeatures extract_text_features(std::string_view text, const TextFeatureConfig& config);

enum class Target { ShareLabel, RetweetCount };

/// Layout: complexity (3 + one-hot 3), psychological (2 + one-hot 3), style
/// (2 counts + flag), tff, follower_count, like_count, author theta (T),
/// tweet topic posterior (T). retweet_count never appears.
std::vector<std::string> feature_names(int num_topics);

/// Throws UsageError when theta or posterior length differs from
/// `num_topics`.
std::vector<double> merge_features(const corpus::UserProfile& author, std::int64_t like_count, const TextFeatures& text,
                                   std::span<const double> theta_author, std::span<const double> tweet_posterior,
                                   int num_topics, Target target);

struct FeatureRow {
  std::string tweet_id;
  std::vector<double> features;
  std::int64_t retweet_count = 0;
};

struct FeatureTable {
  std::vector<std::string> names;
  std::vector<FeatureRow> rows;
  std::size_t dropped = 0;  // tweets without an author profile
};

/// One row per tweet whose author has a profile; others are dropped and
/// counted. Authors unknown to the topic model get a uniform theta.
FeatureTable build_feature_table(const std::vector<corpus::TweetRecord>& tweets,
                                 const std::vector<corpus::UserProfile>& users, const topics::TldaModel& model,
                                 const TextFeatureConfig& config);

/// Writes header = names + extra column names.
void write_feature_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
                       const std::vector<std::vector<double>>& rows);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Acceptance and spread

/// Topical affinity sum_k p(k|tweet) * theta[k], scaled by min(tff, norm)/norm.
/// Throws UsageError on length mismatch or non-positive norm.
double acceptance_score(std::span<const double> theta_recipient, std::span<const double> tweet_posterior,
                        double tff_sender, double tff_norm);

enum class SpreadMode { Cascade, Affinity, Regressor };
SpreadMode spread_mode_from_string(const std::string& s);

struct Recipient {
  corpus::UserProfile profile;
  std::vector<double> theta;
};

struct SpreadRequest {
  corpus::UserProfile sender;
  std::vector<double> sender_theta;
  std::string tweet_text;
  std::int64_t like_count = 0;
  std::vector<Recipient> recipients;
};

struct RecipientScore {
  std::string user_id;
  double acceptance = 0.0;
};

struct SpreadEstimate {
  SpreadMode mode = SpreadMode::Cascade;
  double expected_shares = 0.0;
  std::vector<RecipientScore> per_recipient_scores;

  nlohmann::json to_json() const;
};

/// Cascade: each recipient is scored as the prospective sharer by the
/// classifier's share probability; expected_shares is the sum.
/// Affinity: acceptance_score per recipient, summed; no model needed.
/// Regressor: predicted retweet count of the sender's post, clamped at 0.
SpreadEstimate predict_spread(const ml::Model* model, SpreadMode mode, const SpreadRequest& request,
                              const topics::TldaModel& topics, const TextFeatureConfig& text_config,
                              double tff_norm = 10.0);

}  // namespace fakespread::social
