#pragma once

#include <cstddef>
#include <span>

#include "npc/matrix.hpp"

namespace npc {

/// Square symmetric matrix; symmetry is enforced on every write.
class SymMatrix {
public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t order) : m_(order, order) {}
  /// Symmetrizes `a` as (a + aᵀ)/2.
  explicit SymMatrix(const Matrix& a);

  std::size_t order() const noexcept { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  void set(std::size_t i, std::size_t j, double v) {
    m_(i, j) = v;
    m_(j, i) = v;
  }
  void add(std::size_t i, std::size_t j, double v) {
    m_(i, j) += v;
    if (i != j) m_(j, i) += v;
  }
  double trace() const;
  const Matrix& matrix() const noexcept { return m_; }

private:
  Matrix m_;
};

struct EigenDecomposition {
  Vector values;   // descending
  Matrix vectors;  // column j pairs with values[j]
};

struct MeanCovariance {
  Vector mean;
  SymMatrix cov;  // 1/n normalization
};

MeanCovariance covariance(const Matrix& points);

/// Cyclic Jacobi. Converges when the off-diagonal Frobenius norm drops below
/// 1e-12 * ||A||_F; throws NumericError after 100 sweeps or on non-finite input.
/// Each eigenvector's largest-magnitude component is made positive (ties go to
/// the lowest index).
EigenDecomposition sym_eigen(const SymMatrix& a);

/// Sign convention of sym_eigen applied to each column of `vectors`.
void normalize_column_signs(Matrix& vectors);

/// max |BᵀB − I| over all entries.
double orthonormality_residual(const Matrix& basis);
/// Modified Gram–Schmidt on the columns, in place.
void orthonormalize_columns(Matrix& basis);

/// Largest principal angle (radians) between the column spans of two
/// orthonormal d x q bases.
double max_principal_angle(const Matrix& a, const Matrix& b);

struct SymInverse {
  Matrix inverse;
  double log_det = 0.0;
};

/// Inverse and log-determinant via the eigendecomposition; eigenvalues are
/// floored at `floor` (> 0).
SymInverse sym_inverse(const SymMatrix& a, double floor);

}  // namespace npc
