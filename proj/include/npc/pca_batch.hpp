#pragma once

#include <cstddef>
#include <span>

#include "npc/matrix.hpp"

namespace npc {

/// Top-q principal subspace of the 1/n sample covariance.
struct PcaModel {
  Vector mean;            // length d
  Matrix basis;           // d x q, orthonormal columns
  Vector eigenvalues;     // length q, descending, clamped at 0
  double total_variance = 0.0;  // trace of the covariance
  double residual_loss = 0.0;   // sum of the discarded eigenvalues

  std::size_t dim() const noexcept { return basis.rows(); }
  std::size_t rank() const noexcept { return basis.cols(); }
};

PcaModel fit_batch_pca(const Matrix& data, std::size_t q);

/// Centred scores z_j = (x − mean)ᵀ u_j.
Vector project(const PcaModel& model, std::span<const double> x);
Matrix project(const PcaModel& model, const Matrix& data);
/// Scores for an arbitrary mean/basis pair (shared with the streaming PCA).
Matrix project_rows(const Matrix& data, std::span<const double> mean, const Matrix& basis);

struct ExplainedVariance {
  Vector ratios;
  Vector cumulative;
};

ExplainedVariance explained_variance(const PcaModel& model);

}  // namespace npc
