#include "npc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "npc/error.hpp"

namespace npc {

SymMatrix::SymMatrix(const Matrix& a) : m_(a.rows(), a.cols()) {
  if (a.rows() != a.cols()) throw NumericError("SymMatrix needs a square matrix");
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j) set(i, j, 0.5 * (a(i, j) + a(j, i)));
}

double SymMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < order(); ++i) t += m_(i, i);
  return t;
}

MeanCovariance covariance(const Matrix& points) {
  const std::size_t n = points.rows();
  const std::size_t m = points.cols();
  if (n == 0) throw DataError("covariance of an empty sample");
  MeanCovariance out{Vector(m, 0.0), SymMatrix(m)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out.mean[j] += points(i, j);
  for (auto& v : out.mean) v /= static_cast<double>(n);

  Matrix acc(m, m);
  Vector centred(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) centred[j] = points(i, j) - out.mean[j];
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a; b < m; ++b) acc(a, b) += centred[a] * centred[b];
  }
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a; b < m; ++b) out.cov.set(a, b, acc(a, b) / static_cast<double>(n));
  return out;
}

void normalize_column_signs(Matrix& vectors) {
  for (std::size_t j = 0; j < vectors.cols(); ++j) {
    double max_abs = 0.0;
    for (std::size_t i = 0; i < vectors.rows(); ++i) max_abs = std::max(max_abs, std::abs(vectors(i, j)));
    if (max_abs == 0.0) continue;
    std::size_t pivot = 0;
    for (std::size_t i = 0; i < vectors.rows(); ++i) {
      if (std::abs(vectors(i, j)) >= max_abs * (1.0 - 1e-12)) {
        pivot = i;
        break;
      }
    }
    if (vectors(pivot, j) < 0.0)
      for (std::size_t i = 0; i < vectors.rows(); ++i) vectors(i, j) = -vectors(i, j);
  }
}

EigenDecomposition sym_eigen(const SymMatrix& sym) {
  const std::size_t m = sym.order();
  Matrix a = sym.matrix();
  Matrix v = Matrix::identity(m);

  double frob = 0.0;
  for (double x : a.data()) {
    if (!std::isfinite(x)) throw NumericError("sym_eigen: non-finite matrix entry");
    frob += x * x;
  }
  frob = std::sqrt(frob);
  const double threshold = 1e-12 * frob;

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  constexpr int max_sweeps = 100;
  bool converged = false;
  for (int sweep = 0; sweep <= max_sweeps; ++sweep) {
    if (off_norm() <= threshold) {
      converged = true;
      break;
    }
    if (sweep == max_sweeps) break;
    for (std::size_t p = 0; p + 1 < m; ++p) {
      for (std::size_t q = p + 1; q < m; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = a(p, k) = c * akp - s * akq;
          a(k, q) = a(q, k) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) throw NumericError("sym_eigen: Jacobi iteration did not converge in 100 sweeps");

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenDecomposition out{Vector(m), Matrix(m, m)};
  for (std::size_t k = 0; k < m; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < m; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  normalize_column_signs(out.vectors);
  return out;
}

double orthonormality_residual(const Matrix& basis) {
  double worst = 0.0;
  for (std::size_t a = 0; a < basis.cols(); ++a)
    for (std::size_t b = a; b < basis.cols(); ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < basis.rows(); ++i) s += basis(i, a) * basis(i, b);
      worst = std::max(worst, std::abs(s - (a == b ? 1.0 : 0.0)));
    }
  return worst;
}

void orthonormalize_columns(Matrix& basis) {
  for (std::size_t a = 0; a < basis.cols(); ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < basis.rows(); ++i) s += basis(i, a) * basis(i, b);
      for (std::size_t i = 0; i < basis.rows(); ++i) basis(i, a) -= s * basis(i, b);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < basis.rows(); ++i) norm += basis(i, a) * basis(i, a);
    norm = std::sqrt(norm);
    if (norm == 0.0) throw NumericError("orthonormalize_columns: linearly dependent columns");
    for (std::size_t i = 0; i < basis.rows(); ++i) basis(i, a) /= norm;
  }
}

double max_principal_angle(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw NumericError("max_principal_angle: shape mismatch");
  const Matrix cross = a.transpose() * b;  // q x q, singular values are cosines
  const auto eig = sym_eigen(SymMatrix(cross.transpose() * cross));
  const double smallest = std::clamp(eig.values.back(), 0.0, 1.0);
  return std::acos(std::min(1.0, std::sqrt(smallest)));
}

SymInverse sym_inverse(const SymMatrix& a, double floor) {
  if (!(floor > 0.0)) throw NumericError("sym_inverse: eigenvalue floor must be positive");
  const auto eig = sym_eigen(a);
  const std::size_t m = a.order();
  SymInverse out{Matrix(m, m), 0.0};
  for (std::size_t k = 0; k < m; ++k) {
    const double lambda = std::max(eig.values[k], floor);
    out.log_det += std::log(lambda);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) out.inverse(i, j) += eig.vectors(i, k) * eig.vectors(j, k) / lambda;
  }
  return out;
}

}  // namespace npc
