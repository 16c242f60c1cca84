#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "npc/dataset.hpp"
#include "npc/kernel_smoothing.hpp"
#include "npc/matrix.hpp"

namespace npc {

/// θ_n = c_γ · n^(−4/(d+4)) · K(n^(1/(d+4)) · ‖X_n − x‖), clamped to [0, 1].
struct StepSchedule {
  double c_gamma = 1.0;
  std::size_t d_eff = 1;  // dimension the recursion runs in (the PCA rank)
  KernelId kernel = KernelId::Epanechnikov;
};

double step_size(const StepSchedule& sched, std::size_t n, double distance);

/// Posterior estimates tracked at a fixed set of query points.
struct OnlinePosteriorState {
  Matrix queries;    // m x q
  Matrix estimates;  // m x G, entries in [0, 1]
  std::size_t count = 0;  // stream position n

  std::size_t num_queries() const noexcept { return queries.rows(); }
  std::size_t num_classes() const noexcept { return estimates.cols(); }

  /// P̂_g ← P̂_g + θ (1{label = g} − P̂_g) for every class at one query.
  void blend(std::size_t query, double theta, int label);
};

/// Offline estimator on the head at every query, one bandwidth per class.
OnlinePosteriorState init_online(const Dataset& head, const Matrix& queries, KernelId kernel,
                                  const std::vector<BandwidthParams>& head_bandwidth);
/// Shared bandwidth for every class; estimates then sum to one per query.
OnlinePosteriorState init_online(const Dataset& head, const Matrix& queries, KernelId kernel,
                                 const BandwidthParams& shared_bandwidth);

/// Advances the stream by one observation: count becomes n = count + 1 and
/// every query moves toward the indicator of y with its own θ_n.
void update_posterior(OnlinePosteriorState& state, const StepSchedule& sched, std::span<const double> x, int y);

std::size_t classify_online(const OnlinePosteriorState& state, std::size_t query);

struct CGammaTuning {
  double best = 0.0;
  std::vector<double> candidates;
  std::vector<double> head_msr;  // parallel to candidates
};

/// Progressive validation over the head: every head point is a query starting
/// from `initial` (head size x G), and observation i is classified with the
/// state after i−1 updates before it updates the state itself. Returns the
/// candidate with the smallest head MSR (ties to the smallest candidate).
CGammaTuning tune_c_gamma(const Dataset& head, const Matrix& initial, const std::vector<double>& grid,
                          std::size_t q, KernelId kernel = KernelId::Epanechnikov);

/// Same, starting from the leave-one-out offline posteriors of the head with
/// bandwidths chosen by CV on the head over `bandwidth_grid`.
CGammaTuning tune_c_gamma(const Dataset& head, const std::vector<double>& grid, std::size_t q,
                          KernelId kernel = KernelId::Epanechnikov,
                          const BandwidthGrid& bandwidth_grid = default_bandwidth_grid());

/// 60 log-spaced values in [0.5, 120].
std::vector<double> default_c_gamma_grid();

struct OnlineSnapshot {
  static constexpr int schema_version = 1;
  OnlinePosteriorState state;
  StepSchedule schedule;
};

std::string snapshot_to_json(const OnlineSnapshot& snap);
OnlineSnapshot snapshot_from_json(const std::string& text);
void save_snapshot(const std::filesystem::path& path, const OnlineSnapshot& snap);
OnlineSnapshot load_snapshot(const std::filesystem::path& path);

}  // namespace npc
