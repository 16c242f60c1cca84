#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "npc/error.hpp"
#include "npc/evaluation.hpp"
#include "npc/rng.hpp"

using namespace npc;

namespace {

ConfusionMatrix binary(std::size_t tp, std::size_t fn, std::size_t fp, std::size_t tn) {
  ConfusionMatrix cm(2);
  for (std::size_t i = 0; i < tp; ++i) cm.add(0, 0);
  for (std::size_t i = 0; i < fn; ++i) cm.add(0, 1);
  for (std::size_t i = 0; i < fp; ++i) cm.add(1, 0);
  for (std::size_t i = 0; i < tn; ++i) cm.add(1, 1);
  return cm;
}

}  // namespace

TEST_CASE("misspecification rate") {
  const std::vector<int> y{0, 1, 2, 1};
  CHECK(msr(y, y) == 0.0);
  CHECK(msr(y, std::vector<int>{1, 2, 0, 0}) == 1.0);

  std::vector<int> truth(638, 0), pred(638, 0);
  for (std::size_t i = 0; i < 76; ++i) pred[i * 8] = 1;
  CHECK(msr(truth, pred) == doctest::Approx(76.0 / 638.0).epsilon(1e-15));
  CHECK(std::abs(msr(truth, pred) - 0.1191) < 1e-4);

  // Permuting the pairs jointly leaves the rate unchanged.
  Rng rng(3);
  std::vector<std::size_t> order(638);
  for (std::size_t i = 0; i < 638; ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<int> t2, p2;
  for (auto i : order) {
    t2.push_back(truth[i]);
    p2.push_back(pred[i]);
  }
  CHECK(msr(t2, p2) == msr(truth, pred));
  CHECK_THROWS_AS((void)msr(y, std::vector<int>{0}), DataError);
  CHECK_THROWS_AS((void)msr(std::vector<int>{}, std::vector<int>{}), DataError);
}

TEST_CASE("class metrics from hand counts") {
  const auto cm = binary(3, 1, 1, 5);
  const auto m = class_metrics(cm, 0);
  CHECK(*m.recall == 0.75);
  CHECK(*m.specificity == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  CHECK(std::abs(*m.balanced_accuracy - 0.7917) < 5e-5);
  CHECK(*m.precision == 0.75);
  CHECK(*m.f1 == 0.75);
  CHECK(cm.accuracy() == 0.8);
}

TEST_CASE("balanced accuracy is the mean of recall and specificity") {
  // 1000 Normal with 957 recovered; 200 others with 130 kept out of Normal.
  const auto cm = binary(957, 43, 70, 130);
  const auto m = class_metrics(cm, 0);
  CHECK(*m.recall == doctest::Approx(0.957));
  CHECK(*m.specificity == doctest::Approx(0.65));
  CHECK(std::round(*m.balanced_accuracy * 10000.0) / 100.0 == doctest::Approx(80.35));
}

TEST_CASE("perfect predictions and absent metrics") {
  ConfusionMatrix cm(3);
  for (int g = 0; g < 3; ++g)
    for (int i = 0; i <= g; ++i) cm.add(g, g);
  for (std::size_t g = 0; g < 3; ++g) {
    const auto m = class_metrics(cm, g);
    CHECK(*m.recall == 1.0);
    CHECK(*m.specificity == 1.0);
    CHECK(*m.balanced_accuracy == 1.0);
    CHECK(*m.precision == 1.0);
    CHECK(*m.f1 == 1.0);
  }
  CHECK(weighted_f1(cm) == 1.0);

  // Class 2 never occurs and is never predicted.
  ConfusionMatrix gap(3);
  gap.add(0, 0);
  gap.add(0, 1);
  gap.add(1, 1);
  const auto m2 = class_metrics(gap, 2);
  CHECK_FALSE(m2.recall.has_value());
  CHECK_FALSE(m2.precision.has_value());
  CHECK_FALSE(m2.f1.has_value());
  CHECK(*m2.specificity == 1.0);
  // Class 0: P=1, R=0.5, F1=2/3; class 1: P=0.5, R=1, F1=2/3. Supports 2 and 1.
  CHECK(weighted_f1(gap) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  ConfusionMatrix none_predicted(2);
  none_predicted.add(0, 1);
  none_predicted.add(1, 1);
  // Class 0 has recall 0 and no precision; its F1 counts as 0.
  CHECK(weighted_f1(none_predicted) == doctest::Approx(0.5 * (2.0 / 3.0)).epsilon(1e-15));
  CHECK(none_predicted.row_sum(0) == 1);
  CHECK(none_predicted.col_sum(1) == 2);
  CHECK(none_predicted.trace() == 1);
  CHECK(none_predicted.total() == 2);
}

TEST_CASE("ROC/AUC worked examples") {
  const std::vector<int> labels{0, 1, 0};
  CHECK(roc_auc(std::vector<double>{0.9, 0.8, 0.4}, labels, 0).auc == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(roc_auc(std::vector<double>{0.3, 0.3, 0.3}, labels, 0).auc == 0.5);
  CHECK(roc_auc(std::vector<double>{0.9, 0.1, 0.8}, labels, 0).auc == 1.0);
  CHECK(roc_auc(std::vector<double>{0.1, 0.9, 0.2}, labels, 0).auc == 0.0);
  CHECK_THROWS_AS((void)roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{0, 0}, 0), DataError);
}

TEST_CASE("trapezoid AUC equals the Mann-Whitney statistic; curves are monotone") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(60);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    // Coarse scores create plenty of ties.
    const std::uint64_t levels = 1 + rng.below(10);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = static_cast<int>(rng.below(3));
      scores[i] = static_cast<double>(rng.below(levels)) / static_cast<double>(levels);
    }
    labels[0] = 0;
    labels[1] = 1;
    const auto roc = roc_auc(scores, labels, 0);
    CHECK(std::abs(roc.auc - mann_whitney_auc(scores, labels, 0)) <= 1e-12);
    CHECK(std::isinf(roc.thresholds.front()));
    CHECK(roc.fpr.front() == 0.0);
    CHECK(roc.tpr.front() == 0.0);
    CHECK(roc.fpr.back() == 1.0);
    CHECK(roc.tpr.back() == 1.0);
    for (std::size_t k = 1; k < roc.fpr.size(); ++k) {
      CHECK(roc.fpr[k] >= roc.fpr[k - 1]);
      CHECK(roc.tpr[k] >= roc.tpr[k - 1]);
      CHECK(roc.thresholds[k] < roc.thresholds[k - 1]);
    }
  }
}

TEST_CASE("type-7 quantiles and summaries") {
  const std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 4.0);
  CHECK(quantile(v, 0.5) == 2.5);
  CHECK(quantile(v, 0.25) == doctest::Approx(1.75));
  const auto s = summarize(v);
  CHECK(s.mean == 2.5);
  CHECK(s.q3 == doctest::Approx(3.25));

  const auto single = summarize(std::vector<double>{0.1191});
  CHECK(single.min == 0.1191);
  CHECK(single.q1 == 0.1191);
  CHECK(single.median == 0.1191);
  CHECK(single.mean == 0.1191);
  CHECK(single.q3 == 0.1191);
  CHECK(single.max == 0.1191);
  CHECK_THROWS_AS((void)quantile(std::vector<double>{}, 0.5), DataError);
  CHECK_THROWS_AS((void)quantile(v, 1.5), ConfigError);
}
