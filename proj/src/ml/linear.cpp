#include <algorithm>
#include <cmath>

#include "fakespread/error.hpp"
#include "fakespread/ml.hpp"
#include "fakespread/rng.hpp"
#include "ml_json.hpp"

namespace fakespread::ml {

using nlohmann::json;

Standardizer Standardizer::fit(const Matrix& X) {
  Standardizer s;
  const std::size_t n = X.rows(), d = X.cols();
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 0.0);
  if (n == 0) return s;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) s.mean[c] += X(r, c);
  }
  for (auto& m : s.mean) m /= static_cast<double>(n);
  std::vector<double> var(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double dv = X(r, c) - s.mean[c];
      var[c] += dv * dv;
    }
  }
  for (std::size_t c = 0; c < d; ++c) {
    const double sd = std::sqrt(var[c] / static_cast<double>(n));
    s.scale[c] = sd > 1e-12 ? 1.0 / sd : 0.0;
  }
  return s;
}

void Standardizer::apply(std::span<const double> x, std::vector<double>& out) const {
  out.resize(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) out[c] = (x[c] - mean[c]) * scale[c];
}

Matrix Standardizer::apply(const Matrix& X) const {
  Matrix out(X.rows(), X.cols());
  std::vector<double> row;
  for (std::size_t r = 0; r < X.rows(); ++r) {
    apply(X.row(r), row);
    for (std::size_t c = 0; c < X.cols(); ++c) out(r, c) = row[c];
  }
  return out;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// log(1 + exp(z)) without overflow
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

LossAndGradient logistic_loss_and_gradient(const Matrix& X, std::span<const double> y, std::span<const double> w,
                                           double b, double l2_lambda) {
  const std::size_t n = X.rows(), d = X.cols();
  LossAndGradient out;
  out.grad_w.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = X.row(i);
    const double z = dot(w, x) + b;
    // -[y log p + (1-y) log(1-p)] = softplus(z) - y z
    out.loss += softplus(z) - y[i] * z;
    const double r = sigmoid(z) - y[i];
    for (std::size_t c = 0; c < d; ++c) out.grad_w[c] += r * x[c];
    out.grad_b += r;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  out.loss *= inv_n;
  out.grad_b *= inv_n;
  double wsq = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    out.grad_w[c] = out.grad_w[c] * inv_n + l2_lambda * w[c];
    wsq += w[c] * w[c];
  }
  out.loss += 0.5 * l2_lambda * wsq;
  return out;
}

LogisticRegression::LogisticRegression(LogRegConfig config, Standardizer standardizer, std::vector<double> weights,
                                       double bias)
    : config_(config), standardizer_(std::move(standardizer)), weights_(std::move(weights)), bias_(bias) {}

double LogisticRegression::score(std::span<const double> x) const {
  thread_local std::vector<double> z;
  standardizer_.apply(x, z);
  return sigmoid(dot(weights_, z) + bias_);
}

json LogisticRegression::to_json() const {
  return {{"kind", "logreg"},
          {"task", "classification"},
          {"n_features", weights_.size()},
          {"seed", config_.seed},
          {"config",
           {{"l2_lambda", config_.l2_lambda}, {"learning_rate", config_.learning_rate}, {"n_epochs", config_.n_epochs}}},
          {"params", {{"weights", weights_}, {"bias", bias_}, {"standardizer", detail::standardizer_to_json(standardizer_)}}}};
}

std::shared_ptr<const LogisticRegression> fit_logistic_regression(const Dataset& train, const LogRegConfig& config) {
  if (!(config.learning_rate > 0)) throw UsageError("logistic regression: learning_rate must be positive");
  if (config.l2_lambda < 0) throw UsageError("logistic regression: l2_lambda must be >= 0");
  if (config.n_epochs < 0) throw UsageError("logistic regression: n_epochs must be >= 0");
  // a single class is allowed: the bias alone then drifts toward it
  train.validate(Task::Regression);
  for (double v : train.y) {
    if (v != 0.0 && v != 1.0) throw UsageError("classification labels must be 0 or 1");
  }
  Standardizer s = Standardizer::fit(train.X);
  const Matrix Z = s.apply(train.X);
  std::vector<double> w(train.num_features(), 0.0);
  double b = 0.0;
  // cap the step at 1/L, L = 0.25 * mean |[z, 1]|^2 + lambda bounds the gradient's Lipschitz constant
  double sq = 0.0;
  for (double v : Z.data()) sq += v * v;
  const double L = 0.25 * (sq / static_cast<double>(Z.rows()) + 1.0) + config.l2_lambda;
  const double step = std::min(config.learning_rate, 1.0 / L);
  for (int e = 0; e < config.n_epochs; ++e) {
    const auto g = logistic_loss_and_gradient(Z, train.y, w, b, config.l2_lambda);
    for (std::size_t c = 0; c < w.size(); ++c) w[c] -= step * g.grad_w[c];
    b -= step * g.grad_b;
  }
  return std::make_shared<LogisticRegression>(config, std::move(s), std::move(w), b);
}

// ---------------------------------------------------------------------------

LinearSvm::LinearSvm(SvmConfig config, Standardizer standardizer, std::vector<double> weights, double bias)
    : config_(config), standardizer_(std::move(standardizer)), weights_(std::move(weights)), bias_(bias) {}

double LinearSvm::margin(std::span<const double> x) const {
  thread_local std::vector<double> z;
  standardizer_.apply(x, z);
  return dot(weights_, z) + bias_;
}

double LinearSvm::score(std::span<const double> x) const { return sigmoid(std::clamp(margin(x), -30.0, 30.0)); }

json LinearSvm::to_json() const {
  return {{"kind", "linear_svm"},
          {"task", "classification"},
          {"n_features", weights_.size()},
          {"seed", config_.seed},
          {"config", {{"reg_lambda", config_.reg_lambda}, {"n_epochs", config_.n_epochs}}},
          {"params", {{"weights", weights_}, {"bias", bias_}, {"standardizer", detail::standardizer_to_json(standardizer_)}}}};
}

std::shared_ptr<const LinearSvm> fit_linear_svm(const Dataset& train, const SvmConfig& config) {
  if (!(config.reg_lambda > 0)) throw UsageError("linear svm: reg_lambda must be positive");
  if (config.n_epochs < 1) throw UsageError("linear svm: n_epochs must be >= 1");
  train.validate(Task::Classification);
  Standardizer s = Standardizer::fit(train.X);
  const Matrix Z = s.apply(train.X);
  const std::size_t n = Z.rows(), d = Z.cols();
  std::vector<double> w(d, 0.0);
  double b = 0.0;
  Rng rng(config.seed);
  const double lambda = config.reg_lambda;
  const auto iterations = static_cast<std::uint64_t>(config.n_epochs) * n;
  for (std::uint64_t t = 1; t <= iterations; ++t) {
    const auto i = static_cast<std::size_t>(rng.below(n));
    const double yi = train.y[i] == 1.0 ? 1.0 : -1.0;
    const auto x = Z.row(i);
    const double eta = 1.0 / (lambda * static_cast<double>(t));
    const double m = yi * (dot(w, x) + b);
    const double shrink = 1.0 - eta * lambda;
    for (auto& wc : w) wc *= shrink;
    b *= shrink;
    if (m < 1.0) {
      for (std::size_t c = 0; c < d; ++c) w[c] += eta * yi * x[c];
      b += eta * yi;
    }
  }
  return std::make_shared<LinearSvm>(config, std::move(s), std::move(w), b);
}

}  // namespace fakespread::ml
