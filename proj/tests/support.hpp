#pragma once
// Independent oracles and synthetic fixtures shared by the unit tests and the
// acceptance runner. Nothing here calls into the code under test except for
// the data types it fills.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fakespread/ml.hpp"
#include "fakespread/rng.hpp"
#include "fakespread/topics.hpp"

namespace support {

// ---------------------------------------------------------------------------
// Confusion matrices with hand-reduced metric fractions.

struct Fraction {
  std::int64_t num, den;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct ConfusionCase {
  std::size_t tp, fp, tn, fn;
  Fraction accuracy, precision, recall, f1;
};

inline constexpr std::array<ConfusionCase, 20> kConfusionCases{{
    {0, 0, 0, 0, {0, 1}, {0, 1}, {0, 1}, {0, 1}},
    {5, 0, 0, 0, {1, 1}, {1, 1}, {1, 1}, {1, 1}},
    {0, 0, 7, 0, {1, 1}, {0, 1}, {0, 1}, {0, 1}},
    {0, 3, 0, 4, {0, 1}, {0, 1}, {0, 1}, {0, 1}},
    {1, 1, 1, 1, {1, 2}, {1, 2}, {1, 2}, {1, 2}},
    {10, 2, 8, 5, {18, 25}, {5, 6}, {2, 3}, {20, 27}},
    {50, 50, 50, 50, {1, 2}, {1, 2}, {1, 2}, {1, 2}},
    {3, 0, 9, 1, {12, 13}, {1, 1}, {3, 4}, {6, 7}},
    {0, 6, 4, 0, {2, 5}, {0, 1}, {0, 1}, {0, 1}},
    {12, 5, 0, 3, {3, 5}, {12, 17}, {4, 5}, {3, 4}},
    {15, 37, 34, 8, {49, 94}, {15, 52}, {15, 23}, {2, 5}},
    {23, 58, 38, 30, {61, 149}, {23, 81}, {23, 53}, {23, 67}},
    {40, 37, 4, 38, {44, 119}, {40, 77}, {20, 39}, {16, 31}},
    {0, 58, 53, 30, {53, 141}, {0, 1}, {0, 1}, {0, 1}},
    {16, 35, 14, 12, {30, 77}, {16, 51}, {4, 7}, {32, 79}},
    {45, 30, 34, 53, {79, 162}, {3, 5}, {45, 98}, {90, 173}},
    {35, 30, 25, 40, {6, 13}, {7, 13}, {7, 15}, {1, 2}},
    {55, 9, 14, 40, {69, 118}, {55, 64}, {11, 19}, {110, 159}},
    {9, 55, 59, 33, {17, 39}, {9, 64}, {3, 14}, {9, 53}},
    {24, 47, 0, 42, {24, 113}, {24, 71}, {4, 11}, {48, 137}},
}};

// Label/prediction vectors realising a confusion matrix.
inline void expand(const ConfusionCase& c, std::vector<double>& y_true, std::vector<double>& y_pred) {
  y_true.clear();
  y_pred.clear();
  const auto push = [&](std::size_t count, double t, double p) {
    for (std::size_t i = 0; i < count; ++i) {
      y_true.push_back(t);
      y_pred.push_back(p);
    }
  };
  push(c.tp, 1, 1);
  push(c.fp, 0, 1);
  push(c.tn, 0, 0);
  push(c.fn, 1, 0);
}

// ---------------------------------------------------------------------------
// AUROC as the Mann-Whitney statistic over all positive/negative pairs.

inline double mann_whitney_auroc(std::span<const double> y, std::span<const double> s) {
  double wins = 0.0;
  std::size_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] == 1.0 ? pos : neg)++;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 1.0) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] == 1.0) continue;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / (static_cast<double>(pos) * static_cast<double>(neg));
}

// ---------------------------------------------------------------------------
// Exhaustive Gini split search with exact rational comparison. Every
// threshold halfway between two distinct observed values is tried; ties keep
// the first feature and then the smallest threshold.

struct BruteSplit {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // n_l * gini_l + n_r * gini_r
};

inline std::optional<BruteSplit> brute_force_gini_split(const fakespread::ml::Matrix& X, std::span<const double> y) {
  std::optional<BruteSplit> best;
  // score = sum_l c^2 / n_l + sum_r c^2 / n_r  (larger is better), kept as num/den
  std::int64_t best_num = 0, best_den = 1;
  const std::size_t n = X.rows();
  for (std::size_t f = 0; f < X.cols(); ++f) {
    std::vector<double> values;
    for (std::size_t r = 0; r < n; ++r) values.push_back(X(r, f));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      const double thr = (values[k] + values[k + 1]) / 2.0;
      std::int64_t nl = 0, l1 = 0, nr = 0, r1 = 0;
      for (std::size_t r = 0; r < n; ++r) {
        if (X(r, f) < thr) {
          ++nl;
          l1 += y[r] == 1.0;
        } else {
          ++nr;
          r1 += y[r] == 1.0;
        }
      }
      const std::int64_t a = l1 * l1 + (nl - l1) * (nl - l1);
      const std::int64_t b = r1 * r1 + (nr - r1) * (nr - r1);
      const std::int64_t num = a * nr + b * nl, den = nl * nr;
      if (!best || num * best_den > best_num * den) {
        const double imp = (static_cast<double>(nl) - static_cast<double>(a) / static_cast<double>(nl)) +
                           (static_cast<double>(nr) - static_cast<double>(b) / static_cast<double>(nr));
        best = BruteSplit{static_cast<int>(f), thr, imp};
        best_num = num;
        best_den = den;
      }
    }
  }
  return best;
}

// Random classification set with small integer features so ties are common.
inline fakespread::ml::Dataset random_split_problem(fakespread::Rng& rng) {
  const std::size_t n = 2 + rng.below(49);
  const std::size_t d = 1 + rng.below(4);
  const int levels = 2 + static_cast<int>(rng.below(8));
  fakespread::ml::Dataset data;
  data.X = fakespread::ml::Matrix(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) data.X(r, c) = static_cast<double>(rng.below(static_cast<std::uint64_t>(levels)));
    data.y.push_back(static_cast<double>(rng.below(2)));
  }
  return data;
}

// ---------------------------------------------------------------------------
// Logistic loss and a central-difference gradient.

inline double logistic_loss(const fakespread::ml::Matrix& X, std::span<const double> y, std::span<const double> w,
                            double b, double lambda) {
  double loss = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    double z = b;
    for (std::size_t c = 0; c < X.cols(); ++c) z += w[c] * X(i, c);
    // -log p = log(1 + e^-z), -log(1 - p) = log(1 + e^z); evaluated as
    // max(t, 0) + log(1 + e^-|t|) so saturated logits keep full precision
    const auto log1pexp = [](double t) { return std::max(t, 0.0) + std::log(1.0 + std::exp(-std::abs(t))); };
    loss += y[i] * log1pexp(-z) + (1.0 - y[i]) * log1pexp(z);
  }
  loss /= static_cast<double>(X.rows());
  double sq = 0.0;
  for (double v : w) sq += v * v;
  return loss + 0.5 * lambda * sq;
}

// Gradient over (w..., b) by central differences with step h.
inline std::vector<double> numeric_gradient(const fakespread::ml::Matrix& X, std::span<const double> y,
                                            std::vector<double> w, double b, double lambda, double h = 1e-5) {
  std::vector<double> g;
  for (std::size_t c = 0; c < w.size(); ++c) {
    const double keep = w[c];
    w[c] = keep + h;
    const double up = logistic_loss(X, y, w, b, lambda);
    w[c] = keep - h;
    const double down = logistic_loss(X, y, w, b, lambda);
    w[c] = keep;
    g.push_back((up - down) / (2 * h));
  }
  g.push_back((logistic_loss(X, y, w, b + h, lambda) - logistic_loss(X, y, w, b - h, lambda)) / (2 * h));
  return g;
}

// ---------------------------------------------------------------------------
// Synthetic learner fixtures.

// Two isotropic Gaussians in `d` dimensions with means at -sep/2 and +sep/2
// on every axis; labels alternate.
inline fakespread::ml::Dataset two_gaussians(std::size_t n, std::uint64_t seed, std::size_t d = 2, double sep = 4.0) {
  fakespread::Rng rng(seed);
  fakespread::ml::Dataset data;
  data.X = fakespread::ml::Matrix(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    const double label = static_cast<double>(r % 2);
    const double mean = label == 1.0 ? sep / 2 : -sep / 2;
    for (std::size_t c = 0; c < d; ++c) data.X(r, c) = mean + rng.normal();
    data.y.push_back(label);
  }
  return data;
}

// y = 3 x + N(0, noise^2), x ~ U(-1, 1).
inline fakespread::ml::Dataset linear_plus_noise(std::size_t n, std::uint64_t seed, double noise = 0.1) {
  fakespread::Rng rng(seed);
  fakespread::ml::Dataset data;
  data.X = fakespread::ml::Matrix(n, 1);
  for (std::size_t r = 0; r < n; ++r) {
    data.X(r, 0) = 2.0 * rng.uniform() - 1.0;
    data.y.push_back(3.0 * data.X(r, 0) + noise * rng.normal());
  }
  return data;
}

// ---------------------------------------------------------------------------
// Planted two-topic tweet corpus: disjoint vocabularies alpha*/beta*, a
// shared background vocabulary bg*, users favouring one topic 80/20.

struct PlantedCorpus {
  std::vector<fakespread::topics::UserTweets> users;
  std::vector<std::string> texts;  // every tweet, user-major
  std::vector<int> planted;        // planted topic per text
};

inline PlantedCorpus planted_corpus(std::uint64_t seed, int n_users = 200, int tweets_per_user = 10,
                                    int words_per_tweet = 8, int topic_words = 50) {
  fakespread::Rng rng(seed);
  PlantedCorpus c;
  const auto word = [](const char* prefix, std::uint64_t i) { return std::string(prefix) + std::to_string(i); };
  for (int u = 0; u < n_users; ++u) {
    fakespread::topics::UserTweets ut;
    ut.user_id = "user" + std::to_string(u);
    const int main_topic = u % 2;
    for (int t = 0; t < tweets_per_user; ++t) {
      const int topic = rng.uniform() < 0.8 ? main_topic : 1 - main_topic;
      std::string text;
      for (int w = 0; w < words_per_tweet; ++w) {
        const bool background = rng.uniform() < 0.2;
        const std::string token = background ? word("bg", rng.below(10)) : word(topic == 0 ? "alpha" : "beta", rng.below(static_cast<std::uint64_t>(topic_words)));
        text += (w ? " " : "") + token;
      }
      ut.texts.push_back(text);
      c.texts.push_back(text);
      c.planted.push_back(topic);
    }
    c.users.push_back(std::move(ut));
  }
  return c;
}

// Fraction of tweets whose learned topic maps to their planted topic when each
// learned topic is assigned its majority planted topic.
inline double purity(const std::vector<int>& learned, const std::vector<int>& planted, int num_topics,
                     int num_planted) {
  std::vector<std::vector<int>> table(static_cast<std::size_t>(num_topics),
                                      std::vector<int>(static_cast<std::size_t>(num_planted), 0));
  for (std::size_t i = 0; i < learned.size(); ++i) {
    ++table[static_cast<std::size_t>(learned[i])][static_cast<std::size_t>(planted[i])];
  }
  int hits = 0;
  for (const auto& row : table) hits += *std::max_element(row.begin(), row.end());
  return static_cast<double>(hits) / static_cast<double>(learned.size());
}

inline int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

// ---------------------------------------------------------------------------

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    fakespread::Rng rng(reinterpret_cast<std::uintptr_t>(this) ^ static_cast<std::uint64_t>(std::time(nullptr)));
    path_ = std::filesystem::temp_directory_path() / ("fakespread_" + tag + "_" + std::to_string(rng.next() % 1000000007));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace support
