#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "fakespread/error.hpp"
#include "fakespread/ml.hpp"
#include "ml_json.hpp"

namespace fakespread::ml {

using nlohmann::json;

std::vector<double> quantile_bin_edges(std::vector<double> values, int n_bins) {
  if (n_bins < 2) throw UsageError("n_bins must be >= 2");
  std::sort(values.begin(), values.end());
  std::vector<double> distinct;
  std::unique_copy(values.begin(), values.end(), std::back_inserter(distinct));
  std::vector<double> edges;
  if (distinct.size() <= static_cast<std::size_t>(n_bins)) {
    // one bin per distinct value, edges at the values themselves
    edges.assign(distinct.begin(), distinct.empty() ? distinct.end() : distinct.end() - 1);
    return edges;
  }
  const std::size_t n = values.size();
  for (int b = 1; b < n_bins; ++b) {
    const std::size_t pos = static_cast<std::size_t>(b) * n / static_cast<std::size_t>(n_bins);
    const double e = values[std::min(pos, n - 1)];
    if (edges.empty() || e > edges.back()) edges.push_back(e);
  }
  if (!edges.empty() && edges.back() >= distinct.back()) edges.pop_back();
  return edges;
}

namespace {

struct BinnedData {
  std::size_t rows = 0, cols = 0;
  std::vector<std::vector<double>> edges;  // per feature
  std::vector<std::uint16_t> bins;         // row-major
  int bin(std::size_t r, std::size_t c) const { return bins[r * cols + c]; }
  int n_bins(std::size_t c) const { return static_cast<int>(edges[c].size()) + 1; }
};

BinnedData bin_features(const Matrix& X, int n_bins) {
  BinnedData b;
  b.rows = X.rows();
  b.cols = X.cols();
  b.edges.resize(b.cols);
  b.bins.resize(b.rows * b.cols);
  std::vector<double> col(b.rows);
  for (std::size_t c = 0; c < b.cols; ++c) {
    for (std::size_t r = 0; r < b.rows; ++r) col[r] = X(r, c);
    b.edges[c] = quantile_bin_edges(col, n_bins);
    const auto& e = b.edges[c];
    for (std::size_t r = 0; r < b.rows; ++r) {
      b.bins[r * b.cols + c] = static_cast<std::uint16_t>(std::lower_bound(e.begin(), e.end(), X(r, c)) - e.begin());
    }
  }
  return b;
}

// Grows one regression tree on the negative gradients. Splits maximise the
// squared-error reduction on histogram sums; leaf values come from
// `leaf_value(sum_residual, sum_hessian, count)`.
class HistTreeBuilder {
 public:
  template <typename LeafFn>
  HistTreeBuilder(const BinnedData& data, std::span<const double> residual, std::span<const double> hessian,
                  int max_depth, int min_leaf, LeafFn leaf_value)
      : data_(data), res_(residual), hess_(hessian), max_depth_(max_depth), min_leaf_(min_leaf), leaf_(leaf_value) {}

  std::vector<TreeNode> build() {
    std::vector<std::size_t> rows(data_.rows);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    grow(rows, 0);
    return std::move(nodes_);
  }

 private:
  struct Bucket {
    double sum = 0.0;
    double hess = 0.0;
    double count = 0.0;
  };

  int grow(std::vector<std::size_t>& rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    Bucket total;
    for (auto r : rows) {
      total.sum += res_[r];
      total.hess += hess_[r];
      total.count += 1.0;
    }
    nodes_[static_cast<std::size_t>(id)].value = leaf_(total.sum, total.hess, total.count);
    if (depth >= max_depth_ || static_cast<int>(rows.size()) < 2 * min_leaf_) return id;

    int best_f = -1, best_b = -1;
    double best_gain = 1e-12;
    const double parent = total.sum * total.sum / total.count;
    std::vector<Bucket> hist;
    for (std::size_t f = 0; f < data_.cols; ++f) {
      const int nb = data_.n_bins(f);
      if (nb < 2) continue;
      hist.assign(static_cast<std::size_t>(nb), Bucket{});
      for (auto r : rows) {
        Bucket& h = hist[static_cast<std::size_t>(data_.bin(r, f))];
        h.sum += res_[r];
        h.count += 1.0;
      }
      Bucket left;
      for (int b = 0; b + 1 < nb; ++b) {
        left.sum += hist[static_cast<std::size_t>(b)].sum;
        left.count += hist[static_cast<std::size_t>(b)].count;
        const double rc = total.count - left.count;
        if (left.count < min_leaf_ || rc < min_leaf_) continue;
        const double rs = total.sum - left.sum;
        const double gain = left.sum * left.sum / left.count + rs * rs / rc - parent;
        if (gain > best_gain) {
          best_gain = gain;
          best_f = static_cast<int>(f);
          best_b = b;
        }
      }
    }
    if (best_f < 0) return id;

    std::vector<std::size_t> left_rows, right_rows;
    for (auto r : rows) (data_.bin(r, static_cast<std::size_t>(best_f)) <= best_b ? left_rows : right_rows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(left_rows, depth + 1);
    const int r = grow(right_rows, depth + 1);
    TreeNode& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = best_f;
    node.threshold = data_.edges[static_cast<std::size_t>(best_f)][static_cast<std::size_t>(best_b)];
    node.left = l;
    node.right = r;
    return id;
  }

  const BinnedData& data_;
  std::span<const double> res_, hess_;
  int max_depth_, min_leaf_;
  std::function<double(double, double, double)> leaf_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

Gbdt::Gbdt(Loss loss, GbdtConfig config, std::size_t num_features, double init_score,
           std::vector<std::vector<TreeNode>> stages)
    : loss_(loss), config_(config), num_features_(num_features), init_score_(init_score), stages_(std::move(stages)) {}

double Gbdt::raw_score(std::span<const double> x, std::size_t n_stages) const {
  double s = init_score_;
  const std::size_t n = std::min(n_stages, stages_.size());
  for (std::size_t i = 0; i < n; ++i) s += config_.learning_rate * detail::eval_tree(stages_[i], x);
  return s;
}

double Gbdt::raw_score(std::span<const double> x) const { return raw_score(x, stages_.size()); }

double Gbdt::score(std::span<const double> x) const {
  const double raw = raw_score(x);
  return loss_ == Loss::Logistic ? sigmoid(raw) : raw;
}

json Gbdt::to_json() const {
  json stages = json::array();
  for (const auto& t : stages_) stages.push_back(detail::nodes_to_json(t));
  return {{"kind", to_string(kind())},
          {"task", loss_ == Loss::Logistic ? "classification" : "regression"},
          {"n_features", num_features_},
          {"seed", config_.seed},
          {"config",
           {{"n_estimators", config_.n_estimators},
            {"learning_rate", config_.learning_rate},
            {"max_depth", config_.max_depth},
            {"n_bins", config_.n_bins},
            {"min_samples_leaf", config_.min_samples_leaf}}},
          {"params", {{"init_score", init_score_}, {"stages", stages}}}};
}

std::shared_ptr<const Gbdt> fit_gbdt(const Dataset& train, Loss loss, const GbdtConfig& config) {
  if (config.n_estimators < 0) throw UsageError("gbdt: n_estimators must be >= 0");
  if (config.n_bins < 2) throw UsageError("gbdt: n_bins must be >= 2");
  if (config.n_bins > 65536) throw UsageError("gbdt: n_bins must be <= 65536");
  if (!(config.learning_rate > 0)) throw UsageError("gbdt: learning_rate must be positive");
  train.validate(loss == Loss::Logistic ? Task::Classification : Task::Regression);

  const std::size_t n = train.size();
  const double mean = std::accumulate(train.y.begin(), train.y.end(), 0.0) / static_cast<double>(n);
  const double init = loss == Loss::Logistic ? std::log(mean / (1.0 - mean)) : mean;

  const BinnedData binned = bin_features(train.X, config.n_bins);
  std::vector<double> raw(n, init), residual(n), hessian(n, 1.0);
  std::vector<std::vector<TreeNode>> stages;
  const int min_leaf = std::max(1, config.min_samples_leaf);

  for (int m = 0; m < config.n_estimators; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      if (loss == Loss::Logistic) {
        const double p = sigmoid(raw[i]);
        residual[i] = train.y[i] - p;
        hessian[i] = p * (1.0 - p);
      } else {
        residual[i] = train.y[i] - raw[i];
      }
    }
    HistTreeBuilder builder(binned, residual, hessian, config.max_depth, min_leaf,
                            [loss](double sum, double hess, double count) {
                              if (loss == Loss::Squared) return sum / count;
                              // one Newton step on the logistic loss
                              return sum / std::max(hess, 1e-12);
                            });
    auto tree = builder.build();
    for (std::size_t i = 0; i < n; ++i) raw[i] += config.learning_rate * detail::eval_tree(tree, train.X.row(i));
    stages.push_back(std::move(tree));
  }
  return std::make_shared<Gbdt>(loss, config, train.num_features(), init, std::move(stages));
}

}  // namespace fakespread::ml
