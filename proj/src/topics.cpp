#include "fakespread/topics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fakespread/error.hpp"
#include "fakespread/rng.hpp"
#include "fakespread/textfeat.hpp"

namespace fakespread::topics {

using nlohmann::json;

Vocabulary::Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], static_cast<int>(i)).second) {
      throw UsageError("duplicate vocabulary word '" + words_[i] + "'");
    }
  }
}

std::optional<int> Vocabulary::index(const std::string& word) const {
  const auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> Vocabulary::encode(std::string_view text) const {
  std::vector<int> ids;
  for (const auto& w : textfeat::tokenize(text).words) {
    if (auto i = index(w)) ids.push_back(*i);
  }
  return ids;
}

Vocabulary build_vocabulary(const std::vector<std::string>& texts, int min_count, const std::set<std::string>& stopwords) {
  std::map<std::string, int> freq;
  for (const auto& text : texts) {
    for (auto& w : textfeat::tokenize(text).words) ++freq[std::move(w)];
  }
  std::vector<std::string> words;
  for (const auto& [w, n] : freq) {
    if (n >= min_count && !stopwords.count(w)) words.push_back(w);
  }
  return Vocabulary(std::move(words));
}

// ---------------------------------------------------------------------------

const std::vector<double>& TldaModel::user_topic_distribution(const std::string& user_id) const {
  const auto it = user_index_.find(user_id);
  if (it == user_index_.end()) throw UsageError("unknown user '" + user_id + "'");
  return theta_[it->second];
}

std::vector<double> TldaModel::infer_tweet_topic(std::string_view text) const {
  return infer_tweet_topic(vocab_.encode(text));
}

std::vector<double> TldaModel::infer_tweet_topic(const std::vector<int>& word_ids) const {
  const auto T = static_cast<std::size_t>(num_topics_);
  std::vector<double> post(T, 1.0 / static_cast<double>(T));
  if (word_ids.empty()) return post;
  std::vector<double> logp(T, 0.0);
  for (std::size_t k = 0; k < T; ++k) {
    for (int w : word_ids) logp[k] += std::log(phi_[k][static_cast<std::size_t>(w)]);
  }
  const double m = *std::max_element(logp.begin(), logp.end());
  double total = 0.0;
  for (std::size_t k = 0; k < T; ++k) total += post[k] = std::exp(logp[k] - m);
  for (auto& p : post) p /= total;
  return post;
}

TldaModel TldaModel::from_parts(Vocabulary vocab, std::vector<std::string> users, std::vector<std::vector<double>> theta,
                                std::vector<std::vector<double>> phi, std::vector<double> phi_background, double pi,
                                double alpha, double beta, double gamma, std::uint64_t seed, int sweeps) {
  if (phi.empty()) throw UsageError("topic model needs at least one topic");
  if (users.size() != theta.size()) throw UsageError("users/theta length mismatch");
  TldaModel m;
  m.num_topics_ = static_cast<int>(phi.size());
  for (const auto& row : phi) {
    if (static_cast<int>(row.size()) != vocab.size()) throw UsageError("phi row length must equal vocabulary size");
  }
  for (const auto& row : theta) {
    if (static_cast<int>(row.size()) != m.num_topics_) throw UsageError("theta row length must equal T");
  }
  if (!phi_background.empty() && static_cast<int>(phi_background.size()) != vocab.size()) {
    throw UsageError("phi_background length must equal vocabulary size");
  }
  m.vocab_ = std::move(vocab);
  m.users_ = std::move(users);
  for (std::size_t i = 0; i < m.users_.size(); ++i) m.user_index_[m.users_[i]] = i;
  m.theta_ = std::move(theta);
  m.phi_ = std::move(phi);
  m.phi_background_ = std::move(phi_background);
  m.pi_ = pi;
  m.alpha_ = alpha;
  m.beta_ = beta;
  m.gamma_ = gamma;
  m.seed_ = seed;
  m.sweeps_ = sweeps;
  return m;
}

json TldaModel::to_json() const {
  return {{"T", num_topics_},     {"alpha", alpha_}, {"beta", beta_},   {"gamma", gamma_},
          {"vocab", vocab_.words()}, {"users", users_}, {"theta", theta_}, {"phi", phi_},
          {"phi_background", phi_background_}, {"pi", pi_}, {"seed", seed_}, {"sweeps", sweeps_}};
}

TldaModel TldaModel::from_json(const json& doc) {
  try {
    auto m = from_parts(Vocabulary(doc.at("vocab").get<std::vector<std::string>>()),
                        doc.at("users").get<std::vector<std::string>>(),
                        doc.at("theta").get<std::vector<std::vector<double>>>(),
                        doc.at("phi").get<std::vector<std::vector<double>>>(),
                        doc.at("phi_background").get<std::vector<double>>(), doc.at("pi").get<double>(),
                        doc.at("alpha").get<double>(), doc.at("beta").get<double>(), doc.at("gamma").get<double>(),
                        doc.at("seed").get<std::uint64_t>(), doc.at("sweeps").get<int>());
    if (m.num_topics_ != doc.at("T").get<int>()) throw DataError("T does not match phi");
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed topic model: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Sampler

namespace {

class Sampler {
 public:
  Sampler(GibbsState& state, int T, int V, int U, const TldaConfig& cfg)
      : s_(state),
        T_(T),
        V_(V),
        alpha_(cfg.resolved_alpha()),
        beta_(cfg.beta),
        gamma_(cfg.gamma),
        rng_(cfg.seed),
        n_uk_(static_cast<std::size_t>(U) * T, 0),
        n_u_(static_cast<std::size_t>(U), 0),
        n_kw_(static_cast<std::size_t>(T) * V, 0),
        n_k_(static_cast<std::size_t>(T), 0),
        n_bw_(static_cast<std::size_t>(V), 0),
        logp_(static_cast<std::size_t>(T)) {}

  void initialize() {
    const std::size_t n = s_.tweet_words.size();
    s_.z.assign(n, 0);
    s_.y.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      s_.z[t] = static_cast<int>(rng_.below(static_cast<std::uint64_t>(T_)));
      s_.y[t].resize(s_.tweet_words[t].size());
      for (auto& y : s_.y[t]) y = static_cast<std::uint8_t>(rng_.below(2));
      add_tweet(t, +1);
    }
  }

  void sweep() {
    for (std::size_t t = 0; t < s_.tweet_words.size(); ++t) {
      resample_topic(t);
      resample_switches(t);
    }
  }

  void check_consistency() const {
    Sampler fresh(s_, T_, V_, static_cast<int>(n_u_.size()), TldaConfig{});
    for (std::size_t t = 0; t < s_.tweet_words.size(); ++t) fresh.add_tweet(t, +1);
    if (fresh.n_uk_ != n_uk_ || fresh.n_u_ != n_u_ || fresh.n_kw_ != n_kw_ || fresh.n_k_ != n_k_ ||
        fresh.n_bw_ != n_bw_ || fresh.n_b_ != n_b_ || fresh.n_y_[0] != n_y_[0] || fresh.n_y_[1] != n_y_[1]) {
      throw InvariantError("T-LDA count tables diverged from assignments");
    }
  }

  TldaModel estimate(const Vocabulary& vocab, std::vector<std::string> users, const TldaConfig& cfg) const {
    const std::size_t U = n_u_.size();
    std::vector<std::vector<double>> theta(U, std::vector<double>(static_cast<std::size_t>(T_)));
    for (std::size_t u = 0; u < U; ++u) {
      const double denom = n_u_[u] + T_ * alpha_;
      for (int k = 0; k < T_; ++k) theta[u][static_cast<std::size_t>(k)] = (nuk(u, k) + alpha_) / denom;
    }
    std::vector<std::vector<double>> phi(static_cast<std::size_t>(T_), std::vector<double>(static_cast<std::size_t>(V_)));
    for (int k = 0; k < T_; ++k) {
      const double denom = n_k_[static_cast<std::size_t>(k)] + V_ * beta_;
      for (int w = 0; w < V_; ++w) phi[static_cast<std::size_t>(k)][static_cast<std::size_t>(w)] = (nkw(k, w) + beta_) / denom;
    }
    std::vector<double> background(static_cast<std::size_t>(V_));
    const double bdenom = n_b_ + V_ * beta_;
    for (int w = 0; w < V_; ++w) background[static_cast<std::size_t>(w)] = (n_bw_[static_cast<std::size_t>(w)] + beta_) / bdenom;
    const double pi = (n_y_[1] + gamma_) / (n_y_[0] + n_y_[1] + 2.0 * gamma_);
    return TldaModel::from_parts(vocab, std::move(users), std::move(theta), std::move(phi), std::move(background), pi,
                                 alpha_, beta_, gamma_, cfg.seed, cfg.sweeps);
  }

 private:
  int& nuk(std::size_t u, int k) { return n_uk_[u * static_cast<std::size_t>(T_) + static_cast<std::size_t>(k)]; }
  int nuk(std::size_t u, int k) const { return n_uk_[u * static_cast<std::size_t>(T_) + static_cast<std::size_t>(k)]; }
  int& nkw(int k, int w) { return n_kw_[static_cast<std::size_t>(k) * static_cast<std::size_t>(V_) + static_cast<std::size_t>(w)]; }
  int nkw(int k, int w) const {
    return n_kw_[static_cast<std::size_t>(k) * static_cast<std::size_t>(V_) + static_cast<std::size_t>(w)];
  }

  void add_word(int z, int w, std::uint8_t y, int sign) {
    if (y) {
      nkw(z, w) += sign;
      n_k_[static_cast<std::size_t>(z)] += sign;
    } else {
      n_bw_[static_cast<std::size_t>(w)] += sign;
      n_b_ += sign;
    }
    n_y_[y] += sign;
  }

  void add_tweet(std::size_t t, int sign) {
    const auto u = static_cast<std::size_t>(s_.tweet_user[t]);
    const int z = s_.z[t];
    nuk(u, z) += sign;
    n_u_[u] += sign;
    const auto& words = s_.tweet_words[t];
    for (std::size_t i = 0; i < words.size(); ++i) add_word(z, words[i], s_.y[t][i], sign);
  }

  // Only topic words (y = 1) depend on z; background words are untouched.
  void move_topic_words(std::size_t t, int z, int sign) {
    const auto& words = s_.tweet_words[t];
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (s_.y[t][i]) {
        nkw(z, words[i]) += sign;
        n_k_[static_cast<std::size_t>(z)] += sign;
      }
    }
  }

  void resample_topic(std::size_t t) {
    const auto u = static_cast<std::size_t>(s_.tweet_user[t]);
    const auto& words = s_.tweet_words[t];
    const int old = s_.z[t];
    nuk(u, old) -= 1;
    move_topic_words(t, old, -1);

    // repeats within the tweet contribute rising factorials
    topic_words_.clear();
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (s_.y[t][i]) topic_words_.push_back(words[i]);
    }
    const double vbeta = V_ * beta_;
    for (int k = 0; k < T_; ++k) {
      double lp = std::log(nuk(u, k) + alpha_);
      for (std::size_t i = 0; i < topic_words_.size(); ++i) {
        const int w = topic_words_[i];
        const auto j = std::count(topic_words_.begin(), topic_words_.begin() + static_cast<std::ptrdiff_t>(i), w);
        lp += std::log(nkw(k, w) + beta_ + static_cast<double>(j)) -
              std::log(n_k_[static_cast<std::size_t>(k)] + vbeta + static_cast<double>(i));
      }
      logp_[static_cast<std::size_t>(k)] = lp;
    }
    const int z = sample_log(logp_);
    s_.z[t] = z;
    nuk(u, z) += 1;
    move_topic_words(t, z, +1);
  }

  void resample_switches(std::size_t t) {
    const int z = s_.z[t];
    const auto& words = s_.tweet_words[t];
    const double vbeta = V_ * beta_;
    for (std::size_t i = 0; i < words.size(); ++i) {
      const int w = words[i];
      add_word(z, w, s_.y[t][i], -1);
      const double p0 = (n_y_[0] + gamma_) * (n_bw_[static_cast<std::size_t>(w)] + beta_) / (n_b_ + vbeta);
      const double p1 = (n_y_[1] + gamma_) * (nkw(z, w) + beta_) / (n_k_[static_cast<std::size_t>(z)] + vbeta);
      const std::uint8_t y = rng_.uniform() * (p0 + p1) < p0 ? 0 : 1;
      s_.y[t][i] = y;
      add_word(z, w, y, +1);
    }
  }

  // Cumulative-sum inversion over exp-normalised log weights.
  int sample_log(std::vector<double>& logp) {
    const double m = *std::max_element(logp.begin(), logp.end());
    double total = 0.0;
    for (auto& lp : logp) total += lp = std::exp(lp - m);
    const double target = rng_.uniform() * total;
    double acc = 0.0;
    for (int k = 0; k < T_; ++k) {
      acc += logp[static_cast<std::size_t>(k)];
      if (target < acc) return k;
    }
    return T_ - 1;
  }

  GibbsState& s_;
  int T_, V_;
  double alpha_, beta_, gamma_;
  Rng rng_;
  std::vector<int> n_uk_, n_u_, n_kw_, n_k_, n_bw_;
  int n_b_ = 0;
  int n_y_[2] = {0, 0};
  std::vector<double> logp_;
  std::vector<int> topic_words_;
};

}  // namespace

TldaFit fit_tlda(const std::vector<UserTweets>& corpus, const Vocabulary& vocab, const TldaConfig& config) {
  if (config.num_topics < 1) throw UsageError("T-LDA: number of topics must be >= 1");
  if (!(config.resolved_alpha() > 0) || !(config.beta > 0) || !(config.gamma > 0)) {
    throw UsageError("T-LDA: hyperparameters must be positive");
  }
  if (config.sweeps < 0) throw UsageError("T-LDA: sweeps must be >= 0");
  if (vocab.size() == 0) throw UsageError("T-LDA: empty vocabulary");

  TldaFit fit;
  GibbsState& state = fit.state;
  std::vector<std::string> users;
  std::set<std::string> seen;
  for (std::size_t u = 0; u < corpus.size(); ++u) {
    if (!seen.insert(corpus[u].user_id).second) throw UsageError("T-LDA: duplicate user '" + corpus[u].user_id + "'");
    users.push_back(corpus[u].user_id);
    for (const auto& text : corpus[u].texts) {
      state.tweet_user.push_back(static_cast<int>(u));
      state.tweet_words.push_back(vocab.encode(text));
    }
  }
  if (state.tweet_words.empty()) throw UsageError("T-LDA: empty corpus");

  Sampler sampler(state, config.num_topics, vocab.size(), static_cast<int>(corpus.size()), config);
  sampler.initialize();
  if (config.check_consistency) sampler.check_consistency();
  for (int s = 0; s < config.sweeps; ++s) {
    sampler.sweep();
    if (config.check_consistency) sampler.check_consistency();
  }
  fit.model = sampler.estimate(vocab, std::move(users), config);
  return fit;
}

}  // namespace fakespread::topics
