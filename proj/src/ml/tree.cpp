#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <numeric>
#include <thread>

#include "fakespread/error.hpp"
#include "fakespread/ml.hpp"
#include "fakespread/rng.hpp"
#include "ml_json.hpp"

namespace fakespread::ml {

using nlohmann::json;

std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::Gini: return "gini";
    case Criterion::Entropy: return "entropy";
    case Criterion::SquaredError: return "squared_error";
  }
  return "";
}

Criterion criterion_from_string(std::string_view s) {
  if (s == "gini") return Criterion::Gini;
  if (s == "entropy") return Criterion::Entropy;
  if (s == "squared_error" || s == "mse" || s == "variance") return Criterion::SquaredError;
  throw UsageError("unknown split criterion '" + std::string(s) + "'");
}

double node_impurity(Criterion criterion, double n, double sum, double sum_sq) {
  if (n <= 0) return 0.0;
  switch (criterion) {
    case Criterion::Gini:
      return 2.0 * sum * (n - sum) / n;
    case Criterion::Entropy: {
      double h = 0.0;
      for (double c : {sum, n - sum}) {
        if (c > 0) h -= c * std::log2(c / n);
      }
      return h;
    }
    case Criterion::SquaredError:
      return std::max(0.0, sum_sq - sum * sum / n);
  }
  return 0.0;
}

namespace {

// Midpoint that stays strictly below `hi` even for adjacent doubles.
double midpoint(double lo, double hi) {
  const double m = lo + (hi - lo) / 2.0;
  return m < hi ? m : lo;
}

std::optional<SplitCandidate> best_split_impl(const Matrix& X, std::span<const double> y,
                                              std::span<const std::size_t> rows, std::span<const int> features,
                                              Criterion criterion, int min_leaf) {
  const std::size_t n = rows.size();
  if (n < 2) return std::nullopt;
  double total = 0.0, total_sq = 0.0;
  for (auto r : rows) {
    total += y[r];
    total_sq += y[r] * y[r];
  }
  std::optional<SplitCandidate> best;
  __int128 best_num = 0, best_den = 1;
  std::vector<std::size_t> order(rows.begin(), rows.end());
  for (int f : features) {
    const auto col = static_cast<std::size_t>(f);
    std::copy(rows.begin(), rows.end(), order.begin());
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return X(a, col) < X(b, col); });
    double left = 0.0, left_sq = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double yi = y[order[i]];
      left += yi;
      left_sq += yi * yi;
      const double lo = X(order[i], col);
      const double hi = X(order[i + 1], col);
      if (!(lo < hi)) continue;
      const auto nl = static_cast<double>(i + 1);
      const auto nr = static_cast<double>(n - i - 1);
      if (nl < min_leaf || nr < min_leaf) continue;
      const double imp =
          node_impurity(criterion, nl, left, left_sq) + node_impurity(criterion, nr, total - left, total_sq - left_sq);
      if (criterion == Criterion::Gini) {
        // exact comparison: minimising weighted Gini maximises
        // (A / nl + B / nr) with A, B the sums of squared class counts
        const auto ln = static_cast<std::int64_t>(i + 1), rn = static_cast<std::int64_t>(n - i - 1);
        const auto lc = static_cast<std::int64_t>(left), rc = static_cast<std::int64_t>(total - left);
        const __int128 a = lc * lc + (ln - lc) * (ln - lc), b = rc * rc + (rn - rc) * (rn - rc);
        const __int128 num = a * rn + b * ln, den = static_cast<__int128>(ln) * rn;
        if (!best || num * best_den > best_num * den) {
          best = SplitCandidate{f, midpoint(lo, hi), imp};
          best_num = num;
          best_den = den;
        }
      } else if (!best || imp < best->impurity) {
        best = SplitCandidate{f, midpoint(lo, hi), imp};
      }
    }
  }
  return best;
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, std::span<const double> y, const TreeConfig& cfg, Rng* rng, int max_features)
      : X_(X), y_(y), cfg_(cfg), rng_(rng), max_features_(max_features) {
    all_features_.resize(X.cols());
    std::iota(all_features_.begin(), all_features_.end(), 0);
  }

  std::vector<TreeNode> build(std::vector<std::size_t> rows) {
    nodes_.clear();
    grow(rows, 0);
    return std::move(nodes_);
  }

 private:
  int grow(std::vector<std::size_t>& rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    double sum = 0.0;
    for (auto r : rows) sum += y_[r];
    nodes_[static_cast<std::size_t>(id)].value = sum / static_cast<double>(rows.size());

    const bool pure =
        std::all_of(rows.begin(), rows.end(), [&](std::size_t r) { return y_[r] == y_[rows.front()]; });
    const bool depth_done = cfg_.max_depth >= 0 && depth >= cfg_.max_depth;
    if (pure || depth_done || static_cast<int>(rows.size()) < cfg_.min_samples_split) return id;

    const auto split = choose(rows);
    if (!split) return id;

    std::vector<std::size_t> left, right;
    const auto col = static_cast<std::size_t>(split->feature);
    for (auto r : rows) (X_(r, col) <= split->threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    TreeNode& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  std::optional<SplitCandidate> choose(std::span<const std::size_t> rows) {
    const int d = static_cast<int>(X_.cols());
    if (!rng_ || max_features_ <= 0 || max_features_ >= d) {
      return best_split_impl(X_, y_, rows, all_features_, cfg_.criterion, cfg_.min_samples_leaf);
    }
    // draw features without replacement; keep drawing past max_features
    // only while no drawn feature admits a split
    std::vector<int> perm = all_features_;
    for (int i = 0; i < max_features_; ++i) {
      std::swap(perm[static_cast<std::size_t>(i)],
                perm[static_cast<std::size_t>(i) + rng_->below(static_cast<std::uint64_t>(d - i))]);
    }
    auto best = best_split_impl(X_, y_, rows, std::span<const int>(perm.data(), static_cast<std::size_t>(max_features_)),
                                cfg_.criterion, cfg_.min_samples_leaf);
    for (int i = max_features_; !best && i < d; ++i) {
      std::swap(perm[static_cast<std::size_t>(i)],
                perm[static_cast<std::size_t>(i) + rng_->below(static_cast<std::uint64_t>(d - i))]);
      best = best_split_impl(X_, y_, rows, std::span<const int>(&perm[static_cast<std::size_t>(i)], 1), cfg_.criterion,
                             cfg_.min_samples_leaf);
    }
    return best;
  }

  const Matrix& X_;
  std::span<const double> y_;
  TreeConfig cfg_;
  Rng* rng_;
  int max_features_;
  std::vector<int> all_features_;
  std::vector<TreeNode> nodes_;
};

TreeConfig normalised(TreeConfig cfg, Task task) {
  if (task == Task::Regression && cfg.criterion != Criterion::SquaredError) cfg.criterion = Criterion::SquaredError;
  if (cfg.min_samples_split < 2) cfg.min_samples_split = 2;
  if (cfg.min_samples_leaf < 1) cfg.min_samples_leaf = 1;
  return cfg;
}

json tree_config_json(const TreeConfig& c) {
  return {{"max_depth", c.max_depth},
          {"min_samples_split", c.min_samples_split},
          {"min_samples_leaf", c.min_samples_leaf},
          {"criterion", to_string(c.criterion)}};
}

std::string_view task_name(Task t) { return t == Task::Classification ? "classification" : "regression"; }

}  // namespace

std::optional<SplitCandidate> best_split(const Matrix& X, std::span<const double> y, std::span<const std::size_t> rows,
                                         std::span<const int> features, Criterion criterion) {
  return best_split_impl(X, y, rows, features, criterion, 1);
}

// ---------------------------------------------------------------------------

DecisionTree::DecisionTree(Task task, TreeConfig config, std::size_t num_features, std::vector<TreeNode> nodes)
    : task_(task), config_(config), num_features_(num_features), nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw UsageError("decision tree needs at least one node");
}

double DecisionTree::score(std::span<const double> x) const { return detail::eval_tree(nodes_, x); }

int DecisionTree::depth() const {
  std::vector<int> d(nodes_.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].feature < 0) continue;
    d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
    d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    best = std::max(best, d[i] + 1);
  }
  return best;
}

json DecisionTree::to_json() const {
  return {{"kind", "tree"},
          {"task", task_name(task_)},
          {"n_features", num_features_},
          {"seed", 0},
          {"config", tree_config_json(config_)},
          {"params", {{"nodes", detail::nodes_to_json(nodes_)}}}};
}

std::shared_ptr<const DecisionTree> fit_decision_tree(const Dataset& train, Task task, const TreeConfig& config) {
  // constant labels are allowed here and yield a single leaf
  train.validate(Task::Regression);
  if (task == Task::Classification) {
    for (double v : train.y) {
      if (v != 0.0 && v != 1.0) throw UsageError("classification labels must be 0 or 1");
    }
  }
  const TreeConfig cfg = normalised(config, task);
  std::vector<std::size_t> rows(train.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  TreeBuilder builder(train.X, train.y, cfg, nullptr, 0);
  return std::make_shared<DecisionTree>(task, cfg, train.num_features(), builder.build(std::move(rows)));
}

// ---------------------------------------------------------------------------

RandomForest::RandomForest(Task task, ForestConfig config, std::size_t num_features,
                           std::vector<std::vector<TreeNode>> trees)
    : task_(task), config_(config), num_features_(num_features), trees_(std::move(trees)) {
  if (trees_.empty()) throw UsageError("forest needs at least one tree");
}

double RandomForest::score(std::span<const double> x) const {
  double acc = 0.0;
  for (const auto& t : trees_) {
    const double v = detail::eval_tree(t, x);
    acc += task_ == Task::Classification ? (v >= 0.5 ? 1.0 : 0.0) : v;
  }
  return acc / static_cast<double>(trees_.size());
}

json RandomForest::to_json() const {
  json trees = json::array();
  for (const auto& t : trees_) trees.push_back(detail::nodes_to_json(t));
  return {{"kind", to_string(kind())},
          {"task", task_name(task_)},
          {"n_features", num_features_},
          {"seed", config_.seed},
          {"config",
           {{"n_trees", config_.n_trees},
            {"max_depth", config_.max_depth},
            {"max_features", config_.max_features},
            {"min_samples_split", config_.min_samples_split},
            {"bootstrap", config_.bootstrap}}},
          {"params", {{"trees", trees}}}};
}

std::shared_ptr<const RandomForest> fit_random_forest(const Dataset& train, Task task, const ForestConfig& config) {
  if (config.n_trees < 1) throw UsageError("random forest: n_trees must be >= 1");
  train.validate(Task::Regression);
  if (task == Task::Classification) {
    for (double v : train.y) {
      if (v != 0.0 && v != 1.0) throw UsageError("classification labels must be 0 or 1");
    }
  }
  const auto d = static_cast<int>(train.num_features());
  const int max_features =
      config.max_features > 0 ? std::min(config.max_features, d) : static_cast<int>(std::ceil(std::sqrt(d)));
  TreeConfig tcfg;
  tcfg.max_depth = config.max_depth;
  tcfg.min_samples_split = config.min_samples_split;
  tcfg.criterion = task == Task::Classification ? Criterion::Gini : Criterion::SquaredError;
  tcfg = normalised(tcfg, task);

  const auto n = train.size();
  const auto n_trees = static_cast<std::size_t>(config.n_trees);
  std::vector<std::vector<TreeNode>> trees(n_trees);
  const auto grow_tree = [&](std::size_t t) {
    Rng rng(derive_seed(config.seed, t));
    std::vector<std::size_t> rows(n);
    if (config.bootstrap) {
      for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    TreeBuilder builder(train.X, train.y, tcfg, &rng, max_features);
    trees[t] = builder.build(std::move(rows));
  };

  unsigned threads = config.threads > 0 ? static_cast<unsigned>(config.threads) : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_trees)));
  if (threads == 1) {
    for (std::size_t t = 0; t < n_trees; ++t) grow_tree(t);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < threads; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t t = w; t < n_trees; t += threads) grow_tree(t);
      }));
    }
    for (auto& j : jobs) j.get();
  }
  ForestConfig stored = config;
  stored.max_features = max_features;
  return std::make_shared<RandomForest>(task, stored, train.num_features(), std::move(trees));
}

}  // namespace fakespread::ml
