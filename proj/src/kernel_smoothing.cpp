#include "npc/kernel_smoothing.hpp"

#include <algorithm>
#include <cmath>

#include "npc/error.hpp"

namespace npc {

std::string kernel_name(KernelId k) {
  switch (k) {
    case KernelId::Epanechnikov:
      return "epanechnikov";
  }
  return "unknown";
}

KernelId kernel_from_name(const std::string& name) {
  if (name == "epanechnikov") return KernelId::Epanechnikov;
  throw ConfigError("unknown kernel '" + name + "'");
}

double epanechnikov(double u) noexcept { return u < 1.0 ? 0.75 * (1.0 - u * u) : 0.0; }

double kernel_value(KernelId k, double u) noexcept {
  switch (k) {
    case KernelId::Epanechnikov:
      return epanechnikov(u);
  }
  return 0.0;
}

double kernel_from_squared(KernelId k, double u2) noexcept {
  switch (k) {
    case KernelId::Epanechnikov:
      return u2 < 1.0 ? 0.75 * (1.0 - u2) : 0.0;
  }
  return 0.0;
}

BandwidthParams BandwidthParams::make(double c, double nu) {
  if (!(c > 0.0 && c < 10.0)) throw ConfigError("bandwidth constant c must lie in (0,10)");
  if (!(nu > 0.0 && nu < 1.0)) throw ConfigError("bandwidth exponent nu must lie in (0,1)");
  return {c, nu};
}

BandwidthGrid make_bandwidth_grid(const std::vector<double>& cs, const std::vector<double>& nus) {
  BandwidthGrid grid;
  for (double c : cs)
    for (double nu : nus) grid.push_back(BandwidthParams::make(c, nu));
  if (grid.empty()) throw ConfigError("bandwidth grid is empty");
  return grid;
}

BandwidthGrid default_bandwidth_grid() {
  std::vector<double> cs, nus;
  for (int i = 1; i <= 19; ++i) {
    cs.push_back(0.5 * i);
    nus.push_back(0.05 * i);
  }
  return make_bandwidth_grid(cs, nus);
}

double adaptive_bandwidth(const BandwidthParams& params, const Matrix& train_features, std::span<const double> query) {
  const std::size_t n = train_features.rows();
  if (n == 0) throw DataError("adaptive_bandwidth: empty training sample");
  double max_d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_d2 = std::max(max_d2, squared_distance(train_features.row(i), query));
  if (max_d2 == 0.0) throw NumericError("adaptive_bandwidth: every training point coincides with the query");
  return params.c * std::sqrt(max_d2) * std::pow(static_cast<double>(n), -params.nu);
}

OfflineClassifier::OfflineClassifier(Dataset train, std::vector<BandwidthParams> per_class, KernelId kernel)
    : train_(std::move(train)), params_(std::move(per_class)), kernel_(kernel) {
  if (train_.size() == 0) throw DataError("offline classifier needs a non-empty training sample");
  if (params_.size() != train_.num_classes())
    throw ConfigError("offline classifier needs one bandwidth per class");
  for (const auto& p : params_) BandwidthParams::make(p.c, p.nu);
  const auto counts = train_.class_counts();
  for (auto c : counts) priors_.push_back(static_cast<double>(c) / static_cast<double>(train_.size()));
}

OfflineClassifier OfflineClassifier::fit(Dataset train, const BandwidthGrid& grid, KernelId kernel,
                                         std::size_t cv_folds) {
  auto params = cv_select_all(train, grid, kernel, cv_folds);
  return OfflineClassifier(std::move(train), std::move(params), kernel);
}

Vector nw_posterior(const OfflineClassifier& clf, std::span<const double> query) {
  const auto& train = clf.train();
  const std::size_t n = train.size();
  const std::size_t g_count = clf.num_classes();
  if (query.size() != train.dim()) throw DataError("nw_posterior: query dimension mismatch");

  Vector d2(n);
  double max_d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d2[i] = squared_distance(train.features.row(i), query);
    max_d2 = std::max(max_d2, d2[i]);
  }
  const double max_dist = std::sqrt(max_d2);

  Vector out(g_count);
  for (std::size_t g = 0; g < g_count; ++g) {
    const auto& p = clf.bandwidths()[g];
    const double h = p.c * max_dist * std::pow(static_cast<double>(n), -p.nu);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      // h == 0 only when every point sits on the query: all arguments are 0.
      const double w = h > 0.0 ? kernel_from_squared(clf.kernel(), d2[i] / (h * h)) : kernel_value(clf.kernel(), 0.0);
      den += w;
      if (static_cast<std::size_t>(train.labels[i]) == g) num += w;
    }
    out[g] = den > 0.0 ? num / den : clf.priors()[g];
  }
  return out;
}

std::size_t classify_offline(const OfflineClassifier& clf, std::span<const double> query) {
  return argmax(nw_posterior(clf, query));
}

namespace {

// Pairwise squared distances plus, for every point j, the farthest point and
// the class counts among the points outside j's fold. Leave-one-out is the
// case where every point is its own fold.
struct CvGeometry {
  Matrix d2;
  std::vector<std::size_t> fold;
  Vector max_dist;
  std::vector<std::size_t> reduced_size;
  Matrix reduced_counts;  // n x G

  CvGeometry(const Dataset& train, std::size_t folds)
      : d2(train.size(), train.size()),
        fold(train.size()),
        max_dist(train.size(), 0.0),
        reduced_size(train.size()),
        reduced_counts(train.size(), train.num_classes()) {
    const std::size_t n = train.size();
    const std::size_t fold_count = folds == 0 ? n : folds;
    for (std::size_t j = 0; j < n; ++j) fold[j] = folds == 0 ? j : j % folds;
    Matrix fold_counts(fold_count, train.num_classes());
    std::vector<std::size_t> fold_size(fold_count, 0);
    for (std::size_t j = 0; j < n; ++j) {
      fold_counts(fold[j], static_cast<std::size_t>(train.labels[j])) += 1.0;
      ++fold_size[fold[j]];
    }
    const auto counts = train.class_counts();
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = j + 1; i < n; ++i) {
        const double v = squared_distance(train.features.row(i), train.features.row(j));
        d2(i, j) = d2(j, i) = v;
      }
    for (std::size_t j = 0; j < n; ++j) {
      double m = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (fold[i] != fold[j]) m = std::max(m, d2(j, i));
      max_dist[j] = std::sqrt(m);
      reduced_size[j] = n - fold_size[fold[j]];
      for (std::size_t g = 0; g < train.num_classes(); ++g)
        reduced_counts(j, g) = static_cast<double>(counts[g]) - fold_counts(fold[j], g);
    }
  }
};

}  // namespace

Matrix loo_posteriors(const Dataset& train, const std::vector<BandwidthParams>& per_class, KernelId kernel) {
  const std::size_t n = train.size();
  const std::size_t g_count = train.num_classes();
  if (n < 2) throw DataError("leave-one-out posteriors need at least 2 training points");
  if (per_class.size() != g_count) throw ConfigError("leave-one-out posteriors need one bandwidth per class");
  const CvGeometry geo(train, 0);
  const double k0 = kernel_value(kernel, 0.0);
  Matrix out(n, g_count);
  for (std::size_t j = 0; j < n; ++j) {
    auto row = geo.d2.row(j);
    for (std::size_t g = 0; g < g_count; ++g) {
      const double h = per_class[g].c * std::pow(static_cast<double>(n - 1), -per_class[g].nu) * geo.max_dist[j];
      const double inv_h2 = h > 0.0 ? 1.0 / (h * h) : 0.0;
      double num = 0.0;
      double den = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i == j) continue;
        const double w = h > 0.0 ? kernel_from_squared(kernel, row[i] * inv_h2) : k0;
        den += w;
        if (static_cast<std::size_t>(train.labels[i]) == g) num += w;
      }
      out(j, g) = den > 0.0 ? num / den : geo.reduced_counts(j, g) / static_cast<double>(n - 1);
    }
  }
  return out;
}

Matrix cv_scores(const Dataset& train, const BandwidthGrid& grid, KernelId kernel, std::size_t folds) {
  const std::size_t n = train.size();
  const std::size_t g_count = train.num_classes();
  if (n < 3) throw DataError("cross-validation needs at least 3 training points");
  if (grid.empty()) throw ConfigError("bandwidth grid is empty");
  if (folds == 1 || folds > n) throw ConfigError("cross-validation folds must be 0 (leave-one-out) or in [2, n]");

  const CvGeometry geo(train, folds);
  const double k0 = kernel_value(kernel, 0.0);

  Matrix scores(grid.size(), g_count);
  Vector num(g_count);
  Vector shrink(n);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (std::size_t j = 0; j < n; ++j)
      shrink[j] = grid[k].c * std::pow(static_cast<double>(geo.reduced_size[j]), -grid[k].nu);
    for (std::size_t j = 0; j < n; ++j) {
      const double h = shrink[j] * geo.max_dist[j];
      const double inv_h2 = h > 0.0 ? 1.0 / (h * h) : 0.0;
      std::fill(num.begin(), num.end(), 0.0);
      double den = 0.0;
      auto row = geo.d2.row(j);
      const std::size_t fj = geo.fold[j];
      for (std::size_t i = 0; i < n; ++i) {
        if (geo.fold[i] == fj) continue;
        const double w = h > 0.0 ? kernel_from_squared(kernel, row[i] * inv_h2) : k0;
        if (w == 0.0) continue;
        den += w;
        num[static_cast<std::size_t>(train.labels[i])] += w;
      }
      const auto yj = static_cast<std::size_t>(train.labels[j]);
      for (std::size_t g = 0; g < g_count; ++g) {
        const double p = den > 0.0 ? num[g] / den
                                   : geo.reduced_counts(j, g) / static_cast<double>(geo.reduced_size[j]);
        const double r = (g == yj ? 1.0 : 0.0) - p;
        scores(k, g) += r * r;
      }
    }
    for (std::size_t g = 0; g < g_count; ++g) scores(k, g) /= static_cast<double>(n);
  }
  return scores;
}

Matrix loo_cv_scores(const Dataset& train, const BandwidthGrid& grid, KernelId kernel) {
  return cv_scores(train, grid, kernel, 0);
}

std::vector<BandwidthParams> cv_select_all(const Dataset& train, const BandwidthGrid& grid, KernelId kernel,
                                           std::size_t folds) {
  const Matrix scores = cv_scores(train, grid, kernel, folds);
  std::vector<BandwidthParams> out;
  for (std::size_t g = 0; g < train.num_classes(); ++g) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < grid.size(); ++k)
      if (scores(k, g) < scores(best, g)) best = k;
    out.push_back(grid[best]);
  }
  return out;
}

std::vector<BandwidthParams> loo_cv_select_all(const Dataset& train, const BandwidthGrid& grid, KernelId kernel) {
  return cv_select_all(train, grid, kernel, 0);
}

BandwidthParams loo_cv_select(const Dataset& train, int g, const BandwidthGrid& grid, KernelId kernel) {
  if (g < 0 || static_cast<std::size_t>(g) >= train.num_classes()) throw ConfigError("loo_cv_select: unknown class");
  return loo_cv_select_all(train, grid, kernel)[static_cast<std::size_t>(g)];
}

}  // namespace npc
