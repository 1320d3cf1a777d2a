#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fakespread::ml {

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  const std::vector<double>& data() const { return data_; }

  Matrix select_rows(std::span<const std::size_t> idx) const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

enum class Task { Classification, Regression };

struct Dataset {
  Matrix X;
  std::vector<double> y;  // {0,1} for classification
  std::vector<std::string> feature_names;

  std::size_t size() const { return X.rows(); }
  std::size_t num_features() const { return X.cols(); }
  Dataset subset(std::span<const std::size_t> idx) const;

  /// Throws UsageError on empty data, shape mismatch, non-finite entries, or
  /// (classification) labels outside {0,1} or a single class.
  void validate(Task task) const;
};

struct Split {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

/// Stratification applies to binary targets only; the test share of each
/// class is round(fraction * class size).
Split train_test_split(const Dataset& data, double test_fraction, bool stratified, std::uint64_t seed);

enum class ModelKind { Tree, Forest, Gbdt, LogReg, LinearSvm, ForestReg, GbdtReg };
std::string_view to_string(ModelKind kind);

class Model {
 public:
  virtual ~Model() = default;

  virtual ModelKind kind() const = 0;
  virtual Task task() const = 0;
  virtual std::size_t num_features() const = 0;
  /// Probability of class 1 (classifiers) or the predicted value (regressors).
  virtual double score(std::span<const double> x) const = 0;
  virtual nlohmann::json to_json() const = 0;

  /// Throws UsageError for regressors.
  std::vector<double> predict_proba(const Matrix& X) const;
  /// Labels (probability >= 0.5 -> 1) for classifiers, values for regressors.
  std::vector<double> predict(const Matrix& X) const;
  double predict_one(std::span<const double> x) const;

 protected:
  void check_width(const Matrix& X) const;
};

using ModelPtr = std::shared_ptr<const Model>;

/// Restores any model written by Model::to_json.
ModelPtr load_model(const nlohmann::json& doc);

// ---------------------------------------------------------------------------
// CART

enum class Criterion { Gini, Entropy, SquaredError };
std::string_view to_string(Criterion c);
Criterion criterion_from_string(std::string_view s);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;  // class-1 fraction or mean target
};

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted: n_left * I(left) + n_right * I(right)
};

/// Weighted impurity n * I(node) of a set summarised by count, class-1 count or
/// target sums.
double node_impurity(Criterion criterion, double n, double sum, double sum_sq);

/// Exhaustive search over `features` (scanned in order) and midpoint
/// thresholds. Ties keep the earliest feature and smallest threshold.
std::optional<SplitCandidate> best_split(const Matrix& X, std::span<const double> y, std::span<const std::size_t> rows,
                                         std::span<const int> features, Criterion criterion);

struct TreeConfig {
  int max_depth = -1;  // < 0: unlimited
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  Criterion criterion = Criterion::Gini;
};

class DecisionTree final : public Model {
 public:
  DecisionTree(Task task, TreeConfig config, std::size_t num_features, std::vector<TreeNode> nodes);

  ModelKind kind() const override { return ModelKind::Tree; }
  Task task() const override { return task_; }
  std::size_t num_features() const override { return num_features_; }
  double score(std::span<const double> x) const override;
  nlohmann::json to_json() const override;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeConfig& config() const { return config_; }
  int depth() const;

 private:
  Task task_;
  TreeConfig config_;
  std::size_t num_features_;
  std::vector<TreeNode> nodes_;
};

/// Criterion defaults follow the task (Gini / SquaredError) when mismatched.
std::shared_ptr<const DecisionTree> fit_decision_tree(const Dataset& train, Task task, const TreeConfig& config = {});

// ---------------------------------------------------------------------------
// Random forest

struct ForestConfig {
  int n_trees = 100;
  int max_depth = -1;
  int max_features = 0;  // 0: ceil(sqrt(d))
  int min_samples_split = 2;
  bool bootstrap = true;
  std::uint64_t seed = 42;
  int threads = 0;  // 0: hardware concurrency; results do not depend on it
};

class RandomForest final : public Model {
 public:
  RandomForest(Task task, ForestConfig config, std::size_t num_features, std::vector<std::vector<TreeNode>> trees);

  ModelKind kind() const override { return task_ == Task::Classification ? ModelKind::Forest : ModelKind::ForestReg; }
  Task task() const override { return task_; }
  std::size_t num_features() const override { return num_features_; }
  /// Vote fraction for classification, mean tree output for regression.
  double score(std::span<const double> x) const override;
  nlohmann::json to_json() const override;

  std::size_t num_trees() const { return trees_.size(); }

 private:
  Task task_;
  ForestConfig config_;
  std::size_t num_features_;
  std::vector<std::vector<TreeNode>> trees_;
};

std::shared_ptr<const RandomForest> fit_random_forest(const Dataset& train, Task task, const ForestConfig& config = {});

// ---------------------------------------------------------------------------
// Histogram gradient boosting

enum class Loss { Logistic, Squared };

struct GbdtConfig {
  int n_estimators = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  int n_bins = 255;
  int min_samples_leaf = 1;
  std::uint64_t seed = 42;
};

/// Upper bin edges for one feature; bin(x) = number of edges < x.
std::vector<double> quantile_bin_edges(std::vector<double> values, int n_bins);

class Gbdt final : public Model {
 public:
  Gbdt(Loss loss, GbdtConfig config, std::size_t num_features, double init_score,
       std::vector<std::vector<TreeNode>> stages);

  ModelKind kind() const override { return loss_ == Loss::Logistic ? ModelKind::Gbdt : ModelKind::GbdtReg; }
  Task task() const override { return loss_ == Loss::Logistic ? Task::Classification : Task::Regression; }
  std::size_t num_features() const override { return num_features_; }
  double score(std::span<const double> x) const override;
  nlohmann::json to_json() const override;

  /// Additive score before the link function.
  double raw_score(std::span<const double> x) const;
  /// Raw score using only the first `n_stages` stages.
  double raw_score(std::span<const double> x, std::size_t n_stages) const;
  std::size_t num_stages() const { return stages_.size(); }
  double init_score() const { return init_score_; }

 private:
  Loss loss_;
  GbdtConfig config_;
  std::size_t num_features_;
  double init_score_;
  std::vector<std::vector<TreeNode>> stages_;
};

std::shared_ptr<const Gbdt> fit_gbdt(const Dataset& train, Loss loss, const GbdtConfig& config = {});

// ---------------------------------------------------------------------------
// Linear models

/// Per-feature standardisation; constant features map to 0.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;  // 1/std, or 0 for constant features

  static Standardizer fit(const Matrix& X);
  Matrix apply(const Matrix& X) const;
  void apply(std::span<const double> x, std::vector<double>& out) const;
};

struct LogRegConfig {
  double l2_lambda = 1e-4;
  double learning_rate = 0.5;
  int n_epochs = 1000;
  std::uint64_t seed = 42;
};

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> grad_w;
  double grad_b = 0.0;
};

/// Mean negative log-likelihood plus (lambda/2)|w|^2; the bias is not
/// regularised.
LossAndGradient logistic_loss_and_gradient(const Matrix& X, std::span<const double> y, std::span<const double> w,
                                           double b, double l2_lambda);

class LogisticRegression final : public Model {
 public:
  LogisticRegression(LogRegConfig config, Standardizer standardizer, std::vector<double> weights, double bias);

  ModelKind kind() const override { return ModelKind::LogReg; }
  Task task() const override { return Task::Classification; }
  std::size_t num_features() const override { return weights_.size(); }
  double score(std::span<const double> x) const override;
  nlohmann::json to_json() const override;

  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }

 private:
  LogRegConfig config_;
  Standardizer standardizer_;
  std::vector<double> weights_;
  double bias_;
};

/// Full-batch gradient descent. Throws UsageError for a non-positive learning rate.
std::shared_ptr<const LogisticRegression> fit_logistic_regression(const Dataset& train, const LogRegConfig& config = {});

struct SvmConfig {
  double reg_lambda = 1e-3;
  int n_epochs = 20;
  std::uint64_t seed = 42;
};

class LinearSvm final : public Model {
 public:
  LinearSvm(SvmConfig config, Standardizer standardizer, std::vector<double> weights, double bias);

  ModelKind kind() const override { return ModelKind::LinearSvm; }
  Task task() const override { return Task::Classification; }
  std::size_t num_features() const override { return weights_.size(); }
  /// Sigmoid of the clipped margin.
  double score(std::span<const double> x) const override;
  nlohmann::json to_json() const override;

  double margin(std::span<const double> x) const;
  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }

 private:
  SvmConfig config_;
  Standardizer standardizer_;
  std::vector<double> weights_;
  double bias_;
};

/// Pegasos on the hinge loss; the bias rides along as a constant feature.
/// Throws UsageError on single-class data.
std::shared_ptr<const LinearSvm> fit_linear_svm(const Dataset& train, const SvmConfig& config = {});

double sigmoid(double z);

}  // namespace fakespread::ml
