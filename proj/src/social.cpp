#include "fakespread/social.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "fakespread/csv.hpp"
#include "fakespread/error.hpp"

namespace fakespread::social {

double tff(std::int64_t follower_count, std::int64_t following_count) {
  if (follower_count < 0 || following_count < 0) throw UsageError("tff: counts must be non-negative");
  return (static_cast<double>(follower_count) + 1.0) / (static_cast<double>(following_count) + 1.0);
}

SocialFeatures social_features(const corpus::UserProfile& author, const corpus::TweetRecord& tweet) {
  return {tff(author.follower_count, author.following_count), author.follower_count, author.following_count,
          tweet.like_count, tweet.retweet_count};
}

// ---------------------------------------------------------------------------

LabelMode label_mode_from_string(const std::string& s) {
  if (s == "retweet_threshold") return LabelMode::RetweetThreshold;
  if (s == "follower_evidence") return LabelMode::FollowerEvidence;
  throw UsageError("unknown labeling mode '" + s + "'");
}

std::string_view to_string(LabelMode m) {
  return m == LabelMode::RetweetThreshold ? "retweet_threshold" : "follower_evidence";
}

std::vector<FollowEdge> load_follow_edges(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw corpus::FileNotFound("file not found: " + path.string());
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header) throw corpus::UnparsableHeader("empty follow-edge file " + path.string());
  const auto col = [&](const char* name) {
    const auto it = std::find(header->begin(), header->end(), name);
    if (it == header->end()) throw corpus::UnparsableHeader(std::string("column '") + name + "' missing in " + path.string());
    return static_cast<std::size_t>(it - header->begin());
  };
  const std::size_t fi = col("follower_id"), ei = col("followee_id");
  std::vector<FollowEdge> edges;
  while (auto row = reader.next()) {
    if (row->size() != header->size()) continue;
    if ((*row)[fi].empty() || (*row)[ei].empty()) continue;
    edges.push_back({(*row)[fi], (*row)[ei]});
  }
  return edges;
}

std::optional<std::int64_t> calibrate_tau(std::span<const std::int64_t> counts, double lo, double hi) {
  if (counts.empty()) return std::nullopt;
  std::vector<std::int64_t> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  // the positive rate is constant on (d_prev, d] for consecutive distinct
  // counts, so the smallest tau of each plateau is 1 or d_prev + 1
  std::set<std::int64_t> candidates{1};
  for (auto c : sorted) {
    if (c >= 1) candidates.insert(c + 1);
  }
  for (auto tau : candidates) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), tau);
    const double rate = static_cast<double>(sorted.end() - it) / n;
    if (rate >= lo && rate <= hi) return tau;
  }
  return std::nullopt;
}

LabelResult label_shared(const std::vector<corpus::TweetRecord>& tweets, const LabelConfig& config,
                         const std::vector<FollowEdge>* edges) {
  LabelResult result;
  result.labels.resize(tweets.size(), ShareLabel::NotShared);
  if (config.mode == LabelMode::RetweetThreshold) {
    std::int64_t tau = config.tau;
    if (config.auto_calibrate) {
      std::vector<std::int64_t> counts;
      counts.reserve(tweets.size());
      for (const auto& t : tweets) counts.push_back(t.retweet_count);
      if (auto found = calibrate_tau(counts, config.min_positive_rate, config.max_positive_rate)) {
        tau = *found;
        result.calibrated = true;
      }
    }
    if (tau < 1) throw UsageError("label: tau must be >= 1");
    result.tau = tau;
    for (std::size_t i = 0; i < tweets.size(); ++i) {
      if (tweets[i].retweet_count >= tau) result.labels[i] = ShareLabel::Shared;
    }
  } else {
    if (!edges) throw UsageError("label: follower_evidence mode needs follow edges");
    std::set<std::pair<std::string, std::string>> follows;  // (follower, followee)
    for (const auto& e : *edges) follows.emplace(e.follower_id, e.followee_id);
    std::map<std::string, std::vector<const corpus::TweetRecord*>> by_claim;
    for (const auto& t : tweets) by_claim[t.claim_id].push_back(&t);
    for (std::size_t i = 0; i < tweets.size(); ++i) {
      const auto& t = tweets[i];
      for (const auto* other : by_claim[t.claim_id]) {
        if (other->created_at > t.created_at && follows.count({other->user_id, t.user_id})) {
          result.labels[i] = ShareLabel::Shared;
          break;
        }
      }
    }
  }
  std::size_t pos = 0;
  for (auto l : result.labels) pos += l == ShareLabel::Shared;
  result.positive_rate = tweets.empty() ? 0.0 : static_cast<double>(pos) / static_cast<double>(tweets.size());
  return result;
}

// ---------------------------------------------------------------------------

TextFeatures extract_text_features(std::string_view text, const TextFeatureConfig& config) {
  return {textfeat::complexity(text, config.complexity), textfeat::sentiment(text, config.lexicon, config.sentiment),
          textfeat::style(text, config.pronouns)};
}

std::vector<std::string> feature_names(int num_topics) {
  std::vector<std::string> names{"smog",
                                 "lexical_diversity",
                                 "avg_word_length",
                                 "complexity_simple",
                                 "complexity_medium",
                                 "complexity_complex",
                                 "polarity",
                                 "subjectivity",
                                 "sentiment_positive",
                                 "sentiment_negative",
                                 "sentiment_neutral",
                                 "personal_pronouns",
                                 "impersonal_pronouns",
                                 "stylic",
                                 "tff",
                                 "follower_count",
                                 "like_count"};
  for (int k = 0; k < num_topics; ++k) names.push_back("theta_" + std::to_string(k));
  for (int k = 0; k < num_topics; ++k) names.push_back("topic_" + std::to_string(k));
  return names;
}

std::vector<double> merge_features(const corpus::UserProfile& author, std::int64_t like_count, const TextFeatures& text,
                                   std::span<const double> theta_author, std::span<const double> tweet_posterior,
                                   int num_topics, Target target) {
  const auto T = static_cast<std::size_t>(num_topics);
  if (theta_author.size() != T || tweet_posterior.size() != T) {
    throw UsageError("merge_features: topic vector length does not match T=" + std::to_string(num_topics));
  }
  // retweet_count defines both targets and is never a feature
  (void)target;
  using textfeat::ComplexityCategory;
  using textfeat::SentimentCategory;
  const auto flag = [](bool b) { return b ? 1.0 : 0.0; };
  std::vector<double> v{text.complexity.smog,
                        text.complexity.lexical_diversity,
                        text.complexity.avg_word_length,
                        flag(text.complexity.category == ComplexityCategory::Simple),
                        flag(text.complexity.category == ComplexityCategory::Medium),
                        flag(text.complexity.category == ComplexityCategory::Complex),
                        text.psych.polarity,
                        text.psych.subjectivity,
                        flag(text.psych.category == SentimentCategory::Positive),
                        flag(text.psych.category == SentimentCategory::Negative),
                        flag(text.psych.category == SentimentCategory::Neutral),
                        static_cast<double>(text.style.personal_pronouns),
                        static_cast<double>(text.style.impersonal_pronouns),
                        flag(text.style.category == textfeat::StyleCategory::Stylic),
                        tff(author.follower_count, author.following_count),
                        static_cast<double>(author.follower_count),
                        static_cast<double>(like_count)};
  v.insert(v.end(), theta_author.begin(), theta_author.end());
  v.insert(v.end(), tweet_posterior.begin(), tweet_posterior.end());
  return v;
}

FeatureTable build_feature_table(const std::vector<corpus::TweetRecord>& tweets,
                                 const std::vector<corpus::UserProfile>& users, const topics::TldaModel& model,
                                 const TextFeatureConfig& config) {
  const int T = model.num_topics();
  FeatureTable table;
  table.names = feature_names(T);
  std::unordered_map<std::string, const corpus::UserProfile*> profiles;
  for (const auto& u : users) profiles[u.user_id] = &u;
  const std::vector<double> uniform(static_cast<std::size_t>(T), 1.0 / T);
  for (const auto& t : tweets) {
    const auto it = profiles.find(t.user_id);
    if (it == profiles.end()) {
      ++table.dropped;
      continue;
    }
    const auto& theta = model.has_user(t.user_id) ? model.user_topic_distribution(t.user_id) : uniform;
    const auto posterior = model.infer_tweet_topic(t.text);
    FeatureRow row;
    row.tweet_id = t.tweet_id;
    row.features = merge_features(*it->second, t.like_count, extract_text_features(t.text, config), theta, posterior, T,
                                  Target::ShareLabel);
    if (row.features.size() != table.names.size()) throw InvariantError("feature width drifted from layout");
    row.retweet_count = t.retweet_count;
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw InvariantError("format_double failed");
  return std::string(buf, p);
}

void write_feature_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
                       const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  csv::write_row(out, names);
  std::vector<std::string> fields;
  for (const auto& r : rows) {
    if (r.size() != names.size()) throw UsageError("feature row width does not match header");
    fields.clear();
    for (double v : r) fields.push_back(format_double(v));
    csv::write_row(out, fields);
  }
}

// ---------------------------------------------------------------------------

double acceptance_score(std::span<const double> theta_recipient, std::span<const double> tweet_posterior,
                        double tff_sender, double tff_norm) {
  if (theta_recipient.size() != tweet_posterior.size()) throw UsageError("acceptance_score: simplex length mismatch");
  if (!(tff_norm > 0)) throw UsageError("acceptance_score: tff_norm must be positive");
  if (tff_sender < 0) throw UsageError("acceptance_score: tff must be non-negative");
  double affinity = 0.0;
  for (std::size_t k = 0; k < theta_recipient.size(); ++k) affinity += tweet_posterior[k] * theta_recipient[k];
  const double influence = std::min(tff_sender, tff_norm) / tff_norm;
  return std::clamp(affinity * influence, 0.0, 1.0);
}

SpreadMode spread_mode_from_string(const std::string& s) {
  if (s == "cascade") return SpreadMode::Cascade;
  if (s == "affinity") return SpreadMode::Affinity;
  if (s == "regressor") return SpreadMode::Regressor;
  throw UsageError("unknown spread mode '" + s + "'");
}

nlohmann::json SpreadEstimate::to_json() const {
  nlohmann::json scores = nlohmann::json::array();
  for (const auto& s : per_recipient_scores) scores.push_back({{"user_id", s.user_id}, {"acceptance", s.acceptance}});
  const char* m = mode == SpreadMode::Cascade ? "cascade" : mode == SpreadMode::Affinity ? "affinity" : "regressor";
  return {{"mode", m}, {"expected_shares", expected_shares}, {"per_recipient_scores", scores}};
}

SpreadEstimate predict_spread(const ml::Model* model, SpreadMode mode, const SpreadRequest& request,
                              const topics::TldaModel& topics, const TextFeatureConfig& text_config, double tff_norm) {
  SpreadEstimate est;
  est.mode = mode;
  const int T = topics.num_topics();
  const auto posterior = topics.infer_tweet_topic(request.tweet_text);

  if (mode == SpreadMode::Affinity) {
    const double sender_tff = tff(request.sender.follower_count, request.sender.following_count);
    for (const auto& r : request.recipients) {
      const double a = acceptance_score(r.theta, posterior, sender_tff, tff_norm);
      est.per_recipient_scores.push_back({r.profile.user_id, a});
      est.expected_shares += a;
    }
    return est;
  }

  if (!model) throw UsageError("predict_spread: untrained model");
  if (model->num_features() != feature_names(T).size()) {
    throw UsageError("predict_spread: model expects " + std::to_string(model->num_features()) + " features, topic model gives " +
                     std::to_string(feature_names(T).size()));
  }
  const TextFeatures text = extract_text_features(request.tweet_text, text_config);
  if (mode == SpreadMode::Cascade) {
    if (model->task() != ml::Task::Classification) throw UsageError("cascade spread needs a classifier");
    for (const auto& r : request.recipients) {
      const auto x = merge_features(r.profile, request.like_count, text, r.theta, posterior, T, Target::ShareLabel);
      const double p = model->score(x);
      est.per_recipient_scores.push_back({r.profile.user_id, p});
      est.expected_shares += p;
    }
    return est;
  }
  if (model->task() != ml::Task::Regression) throw UsageError("regressor spread needs a regressor");
  const auto x = merge_features(request.sender, request.like_count, text, request.sender_theta, posterior, T,
                                Target::RetweetCount);
  est.expected_shares = std::max(0.0, model->score(x));
  return est;
}

}  // namespace fakespread::social
