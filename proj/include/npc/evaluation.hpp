#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "npc/matrix.hpp"

namespace npc {

/// Fraction of mismatched pairs.
double msr(std::span<const int> y_true, std::span<const int> y_pred);

/// counts[true][predicted].
class ConfusionMatrix {
public:
  explicit ConfusionMatrix(std::size_t num_classes) : g_(num_classes), counts_(num_classes * num_classes, 0) {}
  ConfusionMatrix(std::span<const int> y_true, std::span<const int> y_pred, std::size_t num_classes);

  void add(int truth, int predicted);
  std::size_t num_classes() const noexcept { return g_; }
  std::size_t operator()(std::size_t truth, std::size_t predicted) const { return counts_[truth * g_ + predicted]; }
  std::size_t total() const;
  std::size_t trace() const;
  std::size_t row_sum(std::size_t g) const;
  std::size_t col_sum(std::size_t g) const;
  double accuracy() const;

private:
  std::size_t g_;
  std::vector<std::size_t> counts_;
};

/// One-vs-rest metrics; a metric whose denominator is zero is absent.
struct ClassMetrics {
  std::optional<double> recall;
  std::optional<double> specificity;
  std::optional<double> balanced_accuracy;
  std::optional<double> precision;
  std::optional<double> f1;
};

ClassMetrics class_metrics(const ConfusionMatrix& cm, std::size_t g);

/// Per-class F1 weighted by true support. An absent per-class F1 contributes 0.
double weighted_f1(const ConfusionMatrix& cm);

struct RocCurve {
  Vector thresholds;  // descending; the first point (0,0) has threshold +inf
  Vector fpr;
  Vector tpr;
  double auc = 0.0;
};

/// One-vs-rest ROC of `scores` for class g, one point per distinct score.
RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels, int g);

/// P(score+ > score−) + ½P(score+ = score−) by pairwise count.
double mann_whitney_auc(std::span<const double> scores, std::span<const int> labels, int g);

struct Summary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double mean = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Type-7 (linear interpolation) quantile of unsorted values, p in [0, 1].
double quantile(std::span<const double> values, double p);
Summary summarize(std::span<const double> values);

}  // namespace npc
