#include "npc/pca_batch.hpp"

#include <algorithm>

#include "npc/error.hpp"
#include "npc/linalg.hpp"

namespace npc {

PcaModel fit_batch_pca(const Matrix& data, std::size_t q) {
  const std::size_t d = data.cols();
  if (q < 1 || q > d) throw ConfigError("PCA rank q=" + std::to_string(q) + " outside 1.." + std::to_string(d));
  if (data.rows() < 2) throw DataError("batch PCA needs at least 2 rows");

  auto [mean, cov] = covariance(data);
  const auto eig = sym_eigen(cov);

  PcaModel model;
  model.mean = std::move(mean);
  model.total_variance = cov.trace();
  model.basis = Matrix(d, q);
  for (std::size_t j = 0; j < q; ++j) {
    model.eigenvalues.push_back(std::max(eig.values[j], 0.0));
    for (std::size_t i = 0; i < d; ++i) model.basis(i, j) = eig.vectors(i, j);
  }
  for (std::size_t j = q; j < d; ++j) model.residual_loss += std::max(eig.values[j], 0.0);
  return model;
}

Vector project(const PcaModel& model, std::span<const double> x) {
  if (x.size() != model.dim())
    throw DataError("project: vector of dimension " + std::to_string(x.size()) + ", model expects " +
                    std::to_string(model.dim()));
  Vector z(model.rank(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double centred = x[i] - model.mean[i];
    for (std::size_t j = 0; j < model.rank(); ++j) z[j] += centred * model.basis(i, j);
  }
  return z;
}

Matrix project_rows(const Matrix& data, std::span<const double> mean, const Matrix& basis) {
  if (data.cols() != basis.rows())
    throw DataError("project: data has " + std::to_string(data.cols()) + " columns, basis expects " +
                    std::to_string(basis.rows()));
  Matrix out(data.rows(), basis.cols());
  for (std::size_t r = 0; r < data.rows(); ++r) {
    auto x = data.row(r);
    auto z = out.row(r);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double centred = x[i] - mean[i];
      for (std::size_t j = 0; j < basis.cols(); ++j) z[j] += centred * basis(i, j);
    }
  }
  return out;
}

Matrix project(const PcaModel& model, const Matrix& data) { return project_rows(data, model.mean, model.basis); }

ExplainedVariance explained_variance(const PcaModel& model) {
  if (!(model.total_variance > 0.0)) throw NumericError("explained variance undefined: total variance is zero");
  ExplainedVariance out;
  double running = 0.0;
  for (double lambda : model.eigenvalues) {
    const double r = lambda / model.total_variance;
    running += r;
    out.ratios.push_back(r);
    out.cumulative.push_back(running);
  }
  return out;
}

}  // namespace npc
