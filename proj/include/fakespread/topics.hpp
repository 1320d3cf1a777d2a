#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace fakespread::topics {

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> words);

  std::optional<int> index(const std::string& word) const;
  const std::string& word(int index) const { return words_.at(static_cast<std::size_t>(index)); }
  int size() const { return static_cast<int>(words_.size()); }
  const std::vector<std::string>& words() const { return words_; }

  /// In-vocabulary word indices of a text, in order (tokenized by textfeat).
  std::vector<int> encode(std::string_view text) const;

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

/// Words with corpus frequency >= min_count that are not stopwords, sorted
/// lexicographically so indices are stable.
Vocabulary build_vocabulary(const std::vector<std::string>& texts, int min_count,
                            const std::set<std::string>& stopwords = {});

/// Tweets grouped by author. Users keep the order given.
struct UserTweets {
  std::string user_id;
  std::vector<std::string> texts;
};

struct TldaConfig {
  int num_topics = 10;
  double alpha = -1.0;  // <= 0 here means 50 / num_topics
  double beta = 0.01;
  double gamma = 20.0;
  int sweeps = 500;
  std::uint64_t seed = 42;
  /// Recount every table from the assignments after each sweep and throw
  /// InvariantError on mismatch. Slow; meant for tests.
  bool check_consistency = false;

  double resolved_alpha() const { return alpha > 0 ? alpha : 50.0 / num_topics; }
};

class TldaModel {
 public:
  int num_topics() const { return num_topics_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double gamma() const { return gamma_; }
  double pi() const { return pi_; }
  std::uint64_t seed() const { return seed_; }
  int sweeps() const { return sweeps_; }

  const std::vector<std::string>& users() const { return users_; }
  const std::vector<std::vector<double>>& theta() const { return theta_; }
  const std::vector<std::vector<double>>& phi() const { return phi_; }
  const std::vector<double>& phi_background() const { return phi_background_; }

  /// Throws UsageError for an unknown user.
  const std::vector<double>& user_topic_distribution(const std::string& user_id) const;
  bool has_user(const std::string& user_id) const { return user_index_.count(user_id) > 0; }

  /// Posterior over topics for a new tweet from phi alone; uniform when no
  /// word is in the vocabulary.
  std::vector<double> infer_tweet_topic(std::string_view text) const;
  std::vector<double> infer_tweet_topic(const std::vector<int>& word_ids) const;

  nlohmann::json to_json() const;
  static TldaModel from_json(const nlohmann::json& doc);

  /// Assembles a model from point estimates. Used by the sampler and by
  /// tests that need a hand-built phi.
  static TldaModel from_parts(Vocabulary vocab, std::vector<std::string> users, std::vector<std::vector<double>> theta,
                              std::vector<std::vector<double>> phi, std::vector<double> phi_background, double pi,
                              double alpha, double beta, double gamma, std::uint64_t seed, int sweeps);

 private:
  int num_topics_ = 0;
  Vocabulary vocab_;
  double alpha_ = 0, beta_ = 0, gamma_ = 0, pi_ = 0;
  std::uint64_t seed_ = 0;
  int sweeps_ = 0;
  std::vector<std::string> users_;
  std::unordered_map<std::string, std::size_t> user_index_;
  std::vector<std::vector<double>> theta_;
  std::vector<std::vector<double>> phi_;
  std::vector<double> phi_background_;
};

/// Final sampler state, exposed for diagnostics and tests.
struct GibbsState {
  std::vector<int> tweet_user;               // user index of each tweet
  std::vector<std::vector<int>> tweet_words; // word ids per tweet
  std::vector<int> z;                        // topic per tweet
  std::vector<std::vector<std::uint8_t>> y;  // 1 = topic word, 0 = background word
};

struct TldaFit {
  TldaModel model;
  GibbsState state;
};

/// Collapsed Gibbs sampler for Twitter-LDA: one topic per tweet, a per-word
/// switch between the background distribution and the tweet's topic.
/// Throws UsageError for T < 1, non-positive hyperparameters or an empty corpus.
TldaFit fit_tlda(const std::vector<UserTweets>& corpus, const Vocabulary& vocab, const TldaConfig& config);

}  // namespace fakespread::topics
