#include "fakespread/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fakespread/error.hpp"

namespace fakespread::eval {

nlohmann::json ConfusionMatrix::to_json() const { return {{"tp", tp}, {"fp", fp}, {"tn", tn}, {"fn", fn}}; }

ConfusionMatrix confusion(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) throw UsageError("confusion: length mismatch");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool t = y_true[i] == 1.0, p = y_pred[i] == 1.0;
    if (t && p) {
      ++cm.tp;
    } else if (t) {
      ++cm.fn;
    } else if (p) {
      ++cm.fp;
    } else {
      ++cm.tn;
    }
  }
  return cm;
}

ClassificationMetrics classification_metrics(const ConfusionMatrix& cm) {
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
  };
  ClassificationMetrics m;
  m.accuracy = ratio(cm.tp + cm.tn, cm.total());
  m.precision = ratio(cm.tp, cm.tp + cm.fp);
  m.recall = ratio(cm.tp, cm.tp + cm.fn);
  // 2PR/(P+R) in counts, one rounding
  m.f1 = ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn);
  return m;
}

RocCurve roc_auroc(std::span<const double> y_true, std::span<const double> scores) {
  if (y_true.size() != scores.size()) throw UsageError("roc: length mismatch");
  std::size_t pos = 0;
  for (double y : y_true) pos += y == 1.0;
  const std::size_t neg = y_true.size() - pos;
  if (pos == 0 || neg == 0) throw UsageError("AUROC undefined: y_true has a single class");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0, fp = 0;
  double area = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    const std::size_t tp0 = tp, fp0 = fp;
    // every instance tied at s crosses the threshold together
    for (; i < order.size() && scores[order[i]] == s; ++i) (y_true[order[i]] == 1.0 ? tp : fp)++;
    // trapezoid in count space: ties contribute half a pair each
    area += static_cast<double>(fp - fp0) * (static_cast<double>(tp0) + static_cast<double>(tp)) / 2.0;
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos), s});
  }
  curve.auroc = area / (static_cast<double>(pos) * static_cast<double>(neg));
  return curve;
}

void RocCurve::write_csv(std::ostream& out) const {
  out << "fpr,tpr,threshold\n";
  out.precision(17);
  for (const auto& p : points) {
    out << p.fpr << ',' << p.tpr << ',';
    if (std::isinf(p.threshold)) {
      out << "inf";
    } else {
      out << p.threshold;
    }
    out << '\n';
  }
}

RegressionMetrics regression_metrics(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) throw UsageError("regression metrics: length mismatch");
  RegressionMetrics m;
  const std::size_t n = y_true.size();
  if (n == 0) return m;
  const double mean = std::accumulate(y_true.begin(), y_true.end(), 0.0) / static_cast<double>(n);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
    ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
  }
  m.rmse = std::sqrt(ss_res / static_cast<double>(n));
  m.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;
  return m;
}

}  // namespace fakespread::eval
