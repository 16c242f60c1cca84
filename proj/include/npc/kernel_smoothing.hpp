#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "npc/dataset.hpp"
#include "npc/matrix.hpp"

namespace npc {

enum class KernelId { Epanechnikov };

std::string kernel_name(KernelId k);
KernelId kernel_from_name(const std::string& name);

/// K(u) = 3/4 (1 − u²) for 0 <= u < 1, 0 otherwise.
double epanechnikov(double u) noexcept;
double kernel_value(KernelId k, double u) noexcept;
/// Same kernel evaluated from u², which saves a square root in the hot loops.
double kernel_from_squared(KernelId k, double u2) noexcept;

/// Bandwidth constants of h = c · max_i ‖X_i − x‖ · n^(−ν), with 0 < c < 10, 0 < ν < 1.
struct BandwidthParams {
  double c = 1.0;
  double nu = 0.5;

  /// Throws ConfigError outside the open boxes.
  static BandwidthParams make(double c, double nu);
  friend bool operator==(const BandwidthParams&, const BandwidthParams&) = default;
};

using BandwidthGrid = std::vector<BandwidthParams>;

/// c ∈ {0.5, 1, …, 9.5} × ν ∈ {0.05, 0.10, …, 0.95}, c-major.
BandwidthGrid default_bandwidth_grid();
BandwidthGrid make_bandwidth_grid(const std::vector<double>& cs, const std::vector<double>& nus);

double adaptive_bandwidth(const BandwidthParams& params, const Matrix& train_features, std::span<const double> query);

/// Nadaraya–Watson class posteriors with one bandwidth per class.
class OfflineClassifier {
public:
  OfflineClassifier(Dataset train, std::vector<BandwidthParams> per_class, KernelId kernel = KernelId::Epanechnikov);

  /// Selects each class's bandwidth by CV over `grid`: leave-one-out when
  /// cv_folds is 0, else cv_folds folds assigned by row position.
  static OfflineClassifier fit(Dataset train, const BandwidthGrid& grid, KernelId kernel = KernelId::Epanechnikov,
                               std::size_t cv_folds = 0);

  const Dataset& train() const noexcept { return train_; }
  const std::vector<BandwidthParams>& bandwidths() const noexcept { return params_; }
  const Vector& priors() const noexcept { return priors_; }
  KernelId kernel() const noexcept { return kernel_; }
  std::size_t num_classes() const noexcept { return train_.num_classes(); }

private:
  Dataset train_;
  std::vector<BandwidthParams> params_;
  KernelId kernel_;
  Vector priors_;
};

/// P̂_g = Σ 1{Y_i = g} K(‖X_i − x‖/h_g) / Σ K(‖X_i − x‖/h_g). A zero denominator
/// falls back to the class prior for that class.
Vector nw_posterior(const OfflineClassifier& clf, std::span<const double> query);
std::size_t classify_offline(const OfflineClassifier& clf, std::span<const double> query);

/// Posterior of every training point from the estimator built on the other
/// n − 1 points (n x G). A zero denominator gives the reduced-sample class frequency.
Matrix loo_posteriors(const Dataset& train, const std::vector<BandwidthParams>& per_class,
                      KernelId kernel = KernelId::Epanechnikov);

/// CV_g(c, ν) for every grid point and class: a grid.size() x G matrix.
Matrix loo_cv_scores(const Dataset& train, const BandwidthGrid& grid, KernelId kernel = KernelId::Epanechnikov);

/// CV_g with fold of row i = i mod folds (held-out rows are estimated from the
/// other folds); folds = 0 is leave-one-out.
Matrix cv_scores(const Dataset& train, const BandwidthGrid& grid, KernelId kernel, std::size_t folds);
std::vector<BandwidthParams> cv_select_all(const Dataset& train, const BandwidthGrid& grid, KernelId kernel,
                                           std::size_t folds);

/// argmin of CV_g over the grid; ties keep the earliest grid entry.
BandwidthParams loo_cv_select(const Dataset& train, int g, const BandwidthGrid& grid,
                              KernelId kernel = KernelId::Epanechnikov);
std::vector<BandwidthParams> loo_cv_select_all(const Dataset& train, const BandwidthGrid& grid,
                                               KernelId kernel = KernelId::Epanechnikov);

}  // namespace npc
