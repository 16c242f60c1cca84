#include "npc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "npc/error.hpp"
#include "npc/linalg.hpp"

namespace npc {

namespace {

struct ClassMoments {
  Matrix means;                // G x q
  std::vector<SymMatrix> scatter;  // per class, sum of outer products about the mean
  std::vector<std::size_t> counts;
};

ClassMoments class_moments(const Dataset& train) {
  if (train.size() == 0) throw DataError("empty training set");
  const std::size_t g_count = train.num_classes();
  const std::size_t q = train.dim();
  ClassMoments m{Matrix(g_count, q), std::vector<SymMatrix>(g_count, SymMatrix(q)), train.class_counts()};
  for (std::size_t g = 0; g < g_count; ++g)
    if (m.counts[g] == 0) throw DataError("class '" + train.class_names[g] + "' is absent from the training set");
  for (std::size_t i = 0; i < train.size(); ++i) {
    auto mu = m.means.row(static_cast<std::size_t>(train.labels[i]));
    auto x = train.features.row(i);
    for (std::size_t j = 0; j < q; ++j) mu[j] += x[j];
  }
  for (std::size_t g = 0; g < g_count; ++g)
    for (double& v : m.means.row(g)) v /= static_cast<double>(m.counts[g]);
  Vector diff(q);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto g = static_cast<std::size_t>(train.labels[i]);
    auto mu = m.means.row(g);
    auto x = train.features.row(i);
    for (std::size_t j = 0; j < q; ++j) diff[j] = x[j] - mu[j];
    for (std::size_t a = 0; a < q; ++a)
      for (std::size_t b = a; b < q; ++b) m.scatter[g].add(a, b, diff[a] * diff[b]);
  }
  return m;
}

Vector log_priors(const std::vector<std::size_t>& counts) {
  const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  Vector out;
  for (std::size_t c : counts) out.push_back(std::log(static_cast<double>(c) / n));
  return out;
}

SymMatrix scaled(const SymMatrix& a, double s) {
  SymMatrix out(a.order());
  for (std::size_t i = 0; i < a.order(); ++i)
    for (std::size_t j = i; j < a.order(); ++j) out.set(i, j, a(i, j) * s);
  return out;
}

SymMatrix pooled_covariance(const ClassMoments& m, std::size_t n) {
  const std::size_t q = m.means.cols();
  const std::size_t g_count = m.counts.size();
  if (n <= g_count) throw DataError("pooled covariance needs more observations than classes");
  SymMatrix pooled(q);
  for (const auto& s : m.scatter)
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = i; j < q; ++j) pooled.add(i, j, s(i, j));
  return scaled(pooled, 1.0 / static_cast<double>(n - g_count));
}

SymMatrix regularized(const SymMatrix& a) {
  const std::size_t q = a.order();
  const double eps = 1e-8 * a.trace() / static_cast<double>(q);
  SymMatrix out = a;
  for (std::size_t i = 0; i < q; ++i) out.add(i, i, eps);
  return out;
}

SymInverse invert(const SymMatrix& a) {
  const double scale = std::max(a.trace() / static_cast<double>(a.order()), 0.0);
  const double floor = scale > 0.0 ? 1e-12 * scale : 1e-300;
  return sym_inverse(a, floor);
}

void check_dim(std::size_t expected, std::size_t got) {
  if (expected != got) throw DataError("query dimension mismatch");
}

}  // namespace

LdaModel fit_lda(const Dataset& train) {
  const ClassMoments m = class_moments(train);
  LdaModel model;
  model.class_means = m.means;
  model.pooled_precision = invert(regularized(pooled_covariance(m, train.size()))).inverse;
  model.log_priors = log_priors(m.counts);
  return model;
}

Vector lda_scores(const LdaModel& model, std::span<const double> x) {
  check_dim(model.class_means.cols(), x.size());
  const std::size_t q = x.size();
  Vector scores(model.log_priors.size());
  Vector w(q);
  for (std::size_t g = 0; g < scores.size(); ++g) {
    auto mu = model.class_means.row(g);
    for (std::size_t a = 0; a < q; ++a) w[a] = dot(model.pooled_precision.row(a), mu);
    scores[g] = dot(x, w) - 0.5 * dot(mu, w) + model.log_priors[g];
  }
  return scores;
}

std::size_t lda_predict(const LdaModel& model, std::span<const double> x) { return argmax(lda_scores(model, x)); }

QdaModel fit_qda(const Dataset& train) {
  const ClassMoments m = class_moments(train);
  const std::size_t q = train.dim();
  const std::size_t g_count = train.num_classes();
  QdaModel model;
  model.class_means = m.means;
  model.log_priors = log_priors(m.counts);
  bool need_pooled = false;
  for (std::size_t g = 0; g < g_count; ++g) {
    if (m.counts[g] < 2)
      throw DataError("class '" + train.class_names[g] + "' has fewer than 2 members; covariance undefined");
    if (m.counts[g] < q + 1) need_pooled = true;
  }
  SymMatrix pooled;
  if (need_pooled) pooled = pooled_covariance(m, train.size());
  for (std::size_t g = 0; g < g_count; ++g) {
    SymMatrix cov = scaled(m.scatter[g], 1.0 / static_cast<double>(m.counts[g] - 1));
    if (m.counts[g] < q + 1) {
      const double a = static_cast<double>(m.counts[g] - 1) / static_cast<double>(q);
      SymMatrix mixed(q);
      for (std::size_t i = 0; i < q; ++i)
        for (std::size_t j = i; j < q; ++j) mixed.set(i, j, a * cov(i, j) + (1.0 - a) * pooled(i, j));
      cov = mixed;
    }
    const SymInverse inv = invert(regularized(cov));
    model.precisions.push_back(inv.inverse);
    model.log_dets.push_back(inv.log_det);
  }
  return model;
}

Vector qda_scores(const QdaModel& model, std::span<const double> x) {
  check_dim(model.class_means.cols(), x.size());
  const std::size_t q = x.size();
  Vector scores(model.log_priors.size());
  Vector diff(q);
  for (std::size_t g = 0; g < scores.size(); ++g) {
    auto mu = model.class_means.row(g);
    for (std::size_t a = 0; a < q; ++a) diff[a] = x[a] - mu[a];
    double quad = 0.0;
    for (std::size_t a = 0; a < q; ++a) quad += diff[a] * dot(model.precisions[g].row(a), diff);
    scores[g] = -0.5 * model.log_dets[g] - 0.5 * quad + model.log_priors[g];
  }
  return scores;
}

std::size_t qda_predict(const QdaModel& model, std::span<const double> x) { return argmax(qda_scores(model, x)); }

KnnModel make_knn(Dataset train, std::size_t k) {
  if (train.size() == 0) throw DataError("kNN: empty training set");
  if (k == 0 || k > train.size()) throw ConfigError("kNN: k must lie in [1, n]");
  return KnnModel{std::move(train), k};
}

namespace {

Vector knn_votes(const Dataset& train, std::size_t k, std::span<const double> x) {
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(train.size());
  for (std::size_t r = 0; r < train.size(); ++r) d.emplace_back(squared_distance(train.features.row(r), x), r);
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  Vector votes(train.num_classes(), 0.0);
  for (std::size_t i = 0; i < k; ++i) votes[static_cast<std::size_t>(train.labels[d[i].second])] += 1.0;
  return votes;
}

}  // namespace

std::size_t knn_predict(const KnnModel& model, std::span<const double> x) {
  check_dim(model.train.dim(), x.size());
  return argmax(knn_votes(model.train, model.k, x));
}

Vector knn_vote_shares(const KnnModel& model, std::span<const double> x) {
  check_dim(model.train.dim(), x.size());
  Vector v = knn_votes(model.train, model.k, x);
  for (double& s : v) s /= static_cast<double>(model.k);
  return v;
}

std::vector<std::size_t> default_k_grid() {
  std::vector<std::size_t> out;
  for (std::size_t k = 1; k <= 31; k += 2) out.push_back(k);
  return out;
}

KnnSelection knn_cv_select_k(const Dataset& train, const std::vector<std::size_t>& k_grid, std::size_t folds) {
  if (train.size() == 0) throw DataError("kNN: empty training set");
  if (k_grid.empty()) throw ConfigError("kNN: k grid is empty");
  if (folds < 2 || folds > train.size()) throw ConfigError("kNN: folds must lie in [2, n]");
  const std::size_t n = train.size();
  // The smallest training part leaves out the largest fold.
  const std::size_t min_train = n - (n + folds - 1) / folds;
  std::vector<std::size_t> ks;
  for (std::size_t k : k_grid)
    if (k >= 1 && k <= min_train) ks.push_back(k);
  if (ks.empty()) throw ConfigError("kNN: no k candidate fits the training folds");
  const std::size_t k_max = *std::max_element(ks.begin(), ks.end());

  std::vector<std::size_t> errors(ks.size(), 0);
  std::vector<std::pair<double, std::size_t>> d;
  Vector votes(train.num_classes());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t fold = i % folds;
    d.clear();
    for (std::size_t r = 0; r < n; ++r)
      if (r % folds != fold) d.emplace_back(squared_distance(train.features.row(r), train.features.row(i)), r);
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k_max), d.end());
    // Neighbours are sorted once; each candidate k reads a prefix.
    for (std::size_t c = 0; c < ks.size(); ++c) {
      std::fill(votes.begin(), votes.end(), 0.0);
      for (std::size_t j = 0; j < ks[c]; ++j) votes[static_cast<std::size_t>(train.labels[d[j].second])] += 1.0;
      if (argmax(votes) != static_cast<std::size_t>(train.labels[i])) ++errors[c];
    }
  }
  KnnSelection out;
  out.candidates = ks;
  for (std::size_t e : errors) out.cv_msr.push_back(static_cast<double>(e) / static_cast<double>(n));
  std::size_t best = 0;
  for (std::size_t c = 1; c < ks.size(); ++c)
    if (out.cv_msr[c] < out.cv_msr[best] || (out.cv_msr[c] == out.cv_msr[best] && ks[c] < ks[best])) best = c;
  out.k = ks[best];
  return out;
}

}  // namespace npc
