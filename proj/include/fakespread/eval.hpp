#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include <json.hpp>

namespace fakespread::eval {

// Class 1 is the positive class throughout.

struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
  nlohmann::json to_json() const;
};

/// Labels are compared against 1.0; anything else counts as negative.
/// Throws UsageError on length mismatch.
ConfusionMatrix confusion(std::span<const double> y_true, std::span<const double> y_pred);

struct ClassificationMetrics {
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
};

/// Zero denominators yield 0 rather than NaN.
ClassificationMetrics classification_metrics(const ConfusionMatrix& cm);

struct RocPoint {
  double fpr = 0.0, tpr = 0.0;
  double threshold = 0.0;  // +inf for the (0,0) anchor
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auroc = 0.0;

  /// "fpr,tpr,threshold" with "inf" for the anchor threshold.
  void write_csv(std::ostream& out) const;
};

/// One point per distinct score (descending) plus the (0,0) anchor; AUROC by
/// the trapezoidal rule. Throws UsageError when y_true has a single class.
RocCurve roc_auroc(std::span<const double> y_true, std::span<const double> scores);

struct RegressionMetrics {
  double rmse = 0.0, r2 = 0.0;
};

/// r2 is 0 when the targets are constant.
RegressionMetrics regression_metrics(std::span<const double> y_true, std::span<const double> y_pred);

}  // namespace fakespread::eval
