#include "npc/pca_online.hpp"

#include <algorithm>
#include <cmath>

#include "npc/error.hpp"
#include "npc/pca_batch.hpp"

namespace npc {

Matrix StreamingPcaState::approximation() const {
  const std::size_t d = dim();
  Matrix out(d, d);
  for (std::size_t k = 0; k < rank(); ++k)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) out(i, j) += basis(i, k) * eigenvalues[k] * basis(j, k);
  return out;
}

StreamingPcaState init_streaming_pca(const Matrix& head, std::size_t q) {
  if (head.rows() < q + 1)
    throw DataError("streaming PCA head has " + std::to_string(head.rows()) + " rows, needs at least q+1=" +
                    std::to_string(q + 1));
  const PcaModel batch = fit_batch_pca(head, q);
  StreamingPcaState s;
  s.count = head.rows();
  s.mean = batch.mean;
  s.basis = batch.basis;
  s.eigenvalues = batch.eigenvalues;
  s.total_variance = batch.total_variance;
  return s;
}

Vector update_mean(std::span<const double> mean, std::size_t n, std::span<const double> x) {
  const double w_old = static_cast<double>(n) / static_cast<double>(n + 1);
  const double w_new = 1.0 / static_cast<double>(n + 1);
  Vector out(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i) out[i] = w_old * mean[i] + w_new * x[i];
  return out;
}

CovRecursionState CovRecursionState::from_first(std::span<const double> x) {
  return {1, Vector(x.begin(), x.end()), SymMatrix(x.size())};
}

CovRecursionState update_cov_recursion(const CovRecursionState& state, std::span<const double> x) {
  const double n = static_cast<double>(state.count);
  const double a = n / (n + 1.0);
  const double b = n / ((n + 1.0) * (n + 1.0));
  const std::size_t d = x.size();
  Vector diff(d);
  for (std::size_t i = 0; i < d; ++i) diff[i] = x[i] - state.mean[i];

  CovRecursionState out{state.count + 1, update_mean(state.mean, state.count, x), SymMatrix(d)};
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) out.cov.set(i, j, a * state.cov(i, j) + b * diff[i] * diff[j]);
  return out;
}

void ipca_update_in_place(StreamingPcaState& s, std::span<const double> x) {
  const std::size_t d = s.dim();
  const std::size_t q = s.rank();
  if (x.size() != d) throw DataError("ipca_update: observation dimension mismatch");
  const double n = static_cast<double>(s.count);

  Vector centred(d);
  for (std::size_t i = 0; i < d; ++i) centred[i] = x[i] - s.mean[i];
  Vector coords(q, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < q; ++k) coords[k] += s.basis(i, k) * centred[i];
  Vector residual = centred;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < q; ++k) residual[i] -= s.basis(i, k) * coords[k];
  const double centred_norm = norm2(centred);
  const double residual_norm = norm2(residual);
  const bool augment = residual_norm >= 1e-10 * (1.0 + centred_norm);

  const std::size_t m = augment ? q + 1 : q;
  const double scale = n / ((n + 1.0) * (n + 1.0));
  SymMatrix p(m);
  for (std::size_t a = 0; a < q; ++a)
    for (std::size_t b = a; b < q; ++b)
      p.set(a, b, scale * ((a == b ? (n + 1.0) * s.eigenvalues[a] : 0.0) + coords[a] * coords[b]));
  if (augment) {
    for (std::size_t a = 0; a < q; ++a) p.set(a, q, scale * residual_norm * coords[a]);
    p.set(q, q, scale * residual_norm * residual_norm);
  }
  const auto eig = sym_eigen(p);

  // New basis = [V_n, residual/‖residual‖] · U[:, :q].
  Matrix rotated(d, q);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < q; ++k) {
      double v = 0.0;
      for (std::size_t a = 0; a < q; ++a) v += s.basis(i, a) * eig.vectors(a, k);
      if (augment) v += residual[i] / residual_norm * eig.vectors(q, k);
      rotated(i, k) = v;
    }
  }
  normalize_column_signs(rotated);
  if (orthonormality_residual(rotated) > 1e-8) orthonormalize_columns(rotated);

  s.basis = std::move(rotated);
  for (std::size_t k = 0; k < q; ++k) s.eigenvalues[k] = std::max(eig.values[k], 0.0);
  s.total_variance = n / (n + 1.0) * s.total_variance + scale * centred_norm * centred_norm;
  s.mean = update_mean(s.mean, s.count, x);
  ++s.count;
}

StreamingPcaState ipca_update(StreamingPcaState state, std::span<const double> x) {
  ipca_update_in_place(state, x);
  return state;
}

}  // namespace npc
