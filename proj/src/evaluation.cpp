#include "npc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "npc/error.hpp"

namespace npc {

double msr(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) throw DataError("msr: length mismatch");
  if (y_true.empty()) throw DataError("msr: no predictions");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) wrong += y_true[i] != y_pred[i];
  return static_cast<double>(wrong) / static_cast<double>(y_true.size());
}

ConfusionMatrix::ConfusionMatrix(std::span<const int> y_true, std::span<const int> y_pred, std::size_t num_classes)
    : ConfusionMatrix(num_classes) {
  if (y_true.size() != y_pred.size()) throw DataError("confusion matrix: length mismatch");
  for (std::size_t i = 0; i < y_true.size(); ++i) add(y_true[i], y_pred[i]);
}

void ConfusionMatrix::add(int truth, int predicted) {
  if (truth < 0 || predicted < 0 || static_cast<std::size_t>(truth) >= g_ || static_cast<std::size_t>(predicted) >= g_)
    throw DataError("confusion matrix: class index out of range");
  ++counts_[static_cast<std::size_t>(truth) * g_ + static_cast<std::size_t>(predicted)];
}

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0}); }

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t g = 0; g < g_; ++g) t += (*this)(g, g);
  return t;
}

std::size_t ConfusionMatrix::row_sum(std::size_t g) const {
  std::size_t s = 0;
  for (std::size_t p = 0; p < g_; ++p) s += (*this)(g, p);
  return s;
}

std::size_t ConfusionMatrix::col_sum(std::size_t g) const {
  std::size_t s = 0;
  for (std::size_t t = 0; t < g_; ++t) s += (*this)(t, g);
  return s;
}

double ConfusionMatrix::accuracy() const {
  const std::size_t n = total();
  if (n == 0) throw DataError("confusion matrix is empty");
  return static_cast<double>(trace()) / static_cast<double>(n);
}

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ClassMetrics class_metrics(const ConfusionMatrix& cm, std::size_t g) {
  if (g >= cm.num_classes()) throw DataError("class_metrics: class index out of range");
  const std::size_t tp = cm(g, g);
  const std::size_t fn = cm.row_sum(g) - tp;
  const std::size_t fp = cm.col_sum(g) - tp;
  const std::size_t tn = cm.total() - tp - fn - fp;
  ClassMetrics m;
  m.recall = ratio(tp, tp + fn);
  m.specificity = ratio(tn, tn + fp);
  if (m.recall && m.specificity) m.balanced_accuracy = (*m.recall + *m.specificity) / 2.0;
  m.precision = ratio(tp, tp + fp);
  if (m.recall && m.precision) {
    const double s = *m.recall + *m.precision;
    m.f1 = s > 0.0 ? 2.0 * *m.recall * *m.precision / s : 0.0;
  }
  return m;
}

double weighted_f1(const ConfusionMatrix& cm) {
  const std::size_t n = cm.total();
  if (n == 0) throw DataError("weighted_f1: confusion matrix is empty");
  double acc = 0.0;
  for (std::size_t g = 0; g < cm.num_classes(); ++g) {
    const auto m = class_metrics(cm, g);
    acc += static_cast<double>(cm.row_sum(g)) * m.f1.value_or(0.0);
  }
  return acc / static_cast<double>(n);
}

namespace {

std::pair<std::size_t, std::size_t> count_classes(std::span<const double> scores, std::span<const int> labels, int g) {
  if (scores.size() != labels.size()) throw DataError("roc: length mismatch");
  std::size_t pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw DataError("roc: non-finite score");
    pos += labels[i] == g;
  }
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw DataError("roc: both positives and negatives are required");
  return {pos, neg};
}

}  // namespace

RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels, int g) {
  const auto [pos, neg] = count_classes(scores, labels, g);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.thresholds.push_back(std::numeric_limits<double>::infinity());
  roc.fpr.push_back(0.0);
  roc.tpr.push_back(0.0);
  std::size_t tp = 0;
  std::size_t fp = 0;
  double area = 0.0;  // in units of tp·fp counts, scaled at the end
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    const std::size_t tp0 = tp;
    const std::size_t fp0 = fp;
    for (; i < order.size() && scores[order[i]] == threshold; ++i) (labels[order[i]] == g ? tp : fp) += 1;
    area += static_cast<double>(fp - fp0) * static_cast<double>(tp + tp0) / 2.0;
    roc.thresholds.push_back(threshold);
    roc.fpr.push_back(static_cast<double>(fp) / static_cast<double>(neg));
    roc.tpr.push_back(static_cast<double>(tp) / static_cast<double>(pos));
  }
  roc.auc = area / (static_cast<double>(pos) * static_cast<double>(neg));
  return roc;
}

double mann_whitney_auc(std::span<const double> scores, std::span<const int> labels, int g) {
  const auto [pos, neg] = count_classes(scores, labels, g);
  double wins = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != g) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] == g) continue;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / (static_cast<double>(pos) * static_cast<double>(neg));
}

double quantile(std::span<const double> values, double p) {
  if (values.empty()) throw DataError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("quantile level outside [0, 1]");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw DataError("summary of an empty sample");
  Summary s;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  s.q1 = quantile(values, 0.25);
  s.median = quantile(values, 0.5);
  s.q3 = quantile(values, 0.75);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  return s;
}

}  // namespace npc
