#include <algorithm>
#include <cmath>

#include "fakespread/error.hpp"
#include "fakespread/ml.hpp"
#include "fakespread/rng.hpp"
#include "ml_json.hpp"

namespace fakespread::ml {

using nlohmann::json;

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) throw UsageError("matrix data size does not match shape");
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols_) throw UsageError("ragged rows");
    std::copy(rows[r].begin(), rows[r].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(r * m.cols_));
  }
  return m;
}

Matrix Matrix::select_rows(std::span<const std::size_t> idx) const {
  Matrix out(idx.size(), cols_);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto src = row(idx[i]);
    std::copy(src.begin(), src.end(), out.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
  }
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> idx) const {
  Dataset d;
  d.X = X.select_rows(idx);
  if (!y.empty()) {
    d.y.reserve(idx.size());
    for (auto i : idx) d.y.push_back(y.at(i));
  }
  d.feature_names = feature_names;
  return d;
}

void Dataset::validate(Task task) const {
  if (X.rows() == 0) throw UsageError("empty training set");
  if (y.size() != X.rows()) throw UsageError("target length does not match row count");
  if (!feature_names.empty() && feature_names.size() != X.cols()) throw UsageError("feature name count mismatch");
  for (double v : X.data()) {
    if (!std::isfinite(v)) throw UsageError("non-finite feature value");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw UsageError("non-finite target value");
  }
  if (task == Task::Classification) {
    bool has0 = false, has1 = false;
    for (double v : y) {
      if (v == 0.0) {
        has0 = true;
      } else if (v == 1.0) {
        has1 = true;
      } else {
        throw UsageError("classification labels must be 0 or 1");
      }
    }
    if (!has0 || !has1) throw UsageError("classification training data needs both classes");
  }
}

Split train_test_split(const Dataset& data, double test_fraction, bool stratified, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw UsageError("test_fraction must be in (0,1)");
  Rng rng(seed);
  Split split;
  const auto take = [&](std::vector<std::size_t> idx) {
    rng.shuffle(idx);
    const auto n_test = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(idx.size())));
    split.test.insert(split.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.insert(split.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  };
  const bool binary =
      std::all_of(data.y.begin(), data.y.end(), [](double v) { return v == 0.0 || v == 1.0; });
  if (stratified && binary) {
    std::vector<std::size_t> neg, pos;
    for (std::size_t i = 0; i < data.size(); ++i) (data.y[i] == 1.0 ? pos : neg).push_back(i);
    take(std::move(neg));
    take(std::move(pos));
  } else {
    std::vector<std::size_t> all(data.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    take(std::move(all));
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Tree: return "tree";
    case ModelKind::Forest: return "forest";
    case ModelKind::Gbdt: return "gbdt";
    case ModelKind::LogReg: return "logreg";
    case ModelKind::LinearSvm: return "linear_svm";
    case ModelKind::ForestReg: return "forest_reg";
    case ModelKind::GbdtReg: return "gbdt_reg";
  }
  return "";
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void Model::check_width(const Matrix& X) const {
  if (X.rows() > 0 && X.cols() != num_features()) {
    throw UsageError("expected " + std::to_string(num_features()) + " features, got " + std::to_string(X.cols()));
  }
}

std::vector<double> Model::predict_proba(const Matrix& X) const {
  if (task() != Task::Classification) throw UsageError("predict_proba needs a classifier");
  check_width(X);
  std::vector<double> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = score(X.row(i));
  return out;
}

double Model::predict_one(std::span<const double> x) const {
  if (x.size() != num_features()) throw UsageError("feature width mismatch");
  const double s = score(x);
  if (task() == Task::Classification) return s >= 0.5 ? 1.0 : 0.0;
  return s;
}

std::vector<double> Model::predict(const Matrix& X) const {
  check_width(X);
  std::vector<double> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = predict_one(X.row(i));
  return out;
}

// ---------------------------------------------------------------------------
// persistence helpers shared by the model files

namespace detail {

json nodes_to_json(const std::vector<TreeNode>& nodes) {
  json arr = json::array();
  for (const auto& n : nodes) arr.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.value}));
  return arr;
}

std::vector<TreeNode> nodes_from_json(const json& arr) {
  std::vector<TreeNode> nodes;
  for (const auto& a : arr) {
    TreeNode n;
    n.feature = a.at(0).get<int>();
    n.threshold = a.at(1).get<double>();
    n.left = a.at(2).get<int>();
    n.right = a.at(3).get<int>();
    n.value = a.at(4).get<double>();
    nodes.push_back(n);
  }
  const auto count = static_cast<int>(nodes.size());
  if (count == 0) throw DataError("tree with no nodes");
  for (const auto& n : nodes) {
    if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count)) {
      throw DataError("tree node child index out of range");
    }
  }
  return nodes;
}

double eval_tree(const std::vector<TreeNode>& nodes, std::span<const double> x) {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

json standardizer_to_json(const Standardizer& s) { return {{"mean", s.mean}, {"scale", s.scale}}; }

Standardizer standardizer_from_json(const json& j) {
  Standardizer s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.scale = j.at("scale").get<std::vector<double>>();
  if (s.mean.size() != s.scale.size()) throw DataError("standardizer arrays differ in length");
  return s;
}

}  // namespace detail

ModelPtr load_model(const json& doc) {
  try {
    const std::string kind = doc.at("kind").get<std::string>();
    const auto n_features = doc.at("n_features").get<std::size_t>();
    const auto check_cols = [&](std::size_t n) {
      if (n != n_features) throw DataError("model parameter width does not match n_features");
    };
    const json& cfg = doc.at("config");
    const json& p = doc.at("params");
    if (kind == "tree") {
      TreeConfig c;
      c.max_depth = cfg.at("max_depth").get<int>();
      c.min_samples_split = cfg.at("min_samples_split").get<int>();
      c.min_samples_leaf = cfg.at("min_samples_leaf").get<int>();
      c.criterion = criterion_from_string(cfg.at("criterion").get<std::string>());
      const Task task = doc.at("task").get<std::string>() == "regression" ? Task::Regression : Task::Classification;
      return std::make_shared<DecisionTree>(task, c, n_features, detail::nodes_from_json(p.at("nodes")));
    }
    if (kind == "forest" || kind == "forest_reg") {
      ForestConfig c;
      c.n_trees = cfg.at("n_trees").get<int>();
      c.max_depth = cfg.at("max_depth").get<int>();
      c.max_features = cfg.at("max_features").get<int>();
      c.min_samples_split = cfg.at("min_samples_split").get<int>();
      c.bootstrap = cfg.at("bootstrap").get<bool>();
      c.seed = doc.at("seed").get<std::uint64_t>();
      std::vector<std::vector<TreeNode>> trees;
      for (const auto& t : p.at("trees")) trees.push_back(detail::nodes_from_json(t));
      return std::make_shared<RandomForest>(kind == "forest" ? Task::Classification : Task::Regression, c, n_features,
                                            std::move(trees));
    }
    if (kind == "gbdt" || kind == "gbdt_reg") {
      GbdtConfig c;
      c.n_estimators = cfg.at("n_estimators").get<int>();
      c.learning_rate = cfg.at("learning_rate").get<double>();
      c.max_depth = cfg.at("max_depth").get<int>();
      c.n_bins = cfg.at("n_bins").get<int>();
      c.min_samples_leaf = cfg.at("min_samples_leaf").get<int>();
      c.seed = doc.at("seed").get<std::uint64_t>();
      std::vector<std::vector<TreeNode>> stages;
      for (const auto& t : p.at("stages")) stages.push_back(detail::nodes_from_json(t));
      return std::make_shared<Gbdt>(kind == "gbdt" ? Loss::Logistic : Loss::Squared, c, n_features,
                                    p.at("init_score").get<double>(), std::move(stages));
    }
    if (kind == "logreg") {
      LogRegConfig c;
      c.l2_lambda = cfg.at("l2_lambda").get<double>();
      c.learning_rate = cfg.at("learning_rate").get<double>();
      c.n_epochs = cfg.at("n_epochs").get<int>();
      c.seed = doc.at("seed").get<std::uint64_t>();
      auto w = p.at("weights").get<std::vector<double>>();
      check_cols(w.size());
      auto s = detail::standardizer_from_json(p.at("standardizer"));
      check_cols(s.mean.size());
      return std::make_shared<LogisticRegression>(c, std::move(s), std::move(w), p.at("bias").get<double>());
    }
    if (kind == "linear_svm") {
      SvmConfig c;
      c.reg_lambda = cfg.at("reg_lambda").get<double>();
      c.n_epochs = cfg.at("n_epochs").get<int>();
      c.seed = doc.at("seed").get<std::uint64_t>();
      auto w = p.at("weights").get<std::vector<double>>();
      check_cols(w.size());
      auto s = detail::standardizer_from_json(p.at("standardizer"));
      check_cols(s.mean.size());
      return std::make_shared<LinearSvm>(c, std::move(s), std::move(w), p.at("bias").get<double>());
    }
    throw DataError("unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  }
}

}  // namespace fakespread::ml
