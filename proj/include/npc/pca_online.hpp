#pragma once

#include <cstddef>
#include <span>

#include "npc/linalg.hpp"
#include "npc/matrix.hpp"

namespace npc {

/// Rank-q incremental PCA state: Ξ_n = V_n D_n V_nᵀ approximates the 1/n covariance.
struct StreamingPcaState {
  std::size_t count = 0;
  Vector mean;         // μ_n
  Matrix basis;        // V_n, d x q
  Vector eigenvalues;  // diagonal of D_n, descending
  /// trace of the full 1/n covariance, tracked recursively for variance ratios.
  double total_variance = 0.0;

  std::size_t dim() const noexcept { return basis.rows(); }
  std::size_t rank() const noexcept { return basis.cols(); }
  /// V_n D_n V_nᵀ.
  Matrix approximation() const;
};

/// Batch PCA of the head, truncated to rank q.
StreamingPcaState init_streaming_pca(const Matrix& head, std::size_t q);

/// μ_{n+1} = n/(n+1)·μ_n + x/(n+1).
Vector update_mean(std::span<const double> mean, std::size_t n, std::span<const double> x);

/// Exact recursive 1/n covariance; used to check the rank-q recursion.
struct CovRecursionState {
  std::size_t count = 0;
  Vector mean;
  SymMatrix cov;

  static CovRecursionState from_first(std::span<const double> x);
};

CovRecursionState update_cov_recursion(const CovRecursionState& state, std::span<const double> x);

/// One rank-q update with observation x. Eigendecomposes the (q+1)x(q+1)
/// matrix P_{n+1} built from D_n, the in-span coordinates of x − μ_n and its
/// residual norm, then rotates the augmented basis and keeps the top q. When
/// the residual is below 1e-10·(1+‖x − μ_n‖) only the q x q block is used.
void ipca_update_in_place(StreamingPcaState& state, std::span<const double> x);
StreamingPcaState ipca_update(StreamingPcaState state, std::span<const double> x);

}  // namespace npc
