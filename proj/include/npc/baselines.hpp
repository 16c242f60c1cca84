#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "npc/dataset.hpp"
#include "npc/matrix.hpp"

namespace npc {

/// Linear discriminant: δ_g(x) = xᵀΣ⁻¹μ_g − ½μ_gᵀΣ⁻¹μ_g + log π_g.
struct LdaModel {
  Matrix class_means;       // G x q
  Matrix pooled_precision;  // q x q
  Vector log_priors;        // length G
};

/// Pooled covariance uses the n − G denominator and is regularized by
/// 1e-8·trace/q on the diagonal.
LdaModel fit_lda(const Dataset& train);
Vector lda_scores(const LdaModel& model, std::span<const double> x);
std::size_t lda_predict(const LdaModel& model, std::span<const double> x);

/// Quadratic discriminant: δ_g(x) = −½log|Σ_g| − ½(x−μ_g)ᵀΣ_g⁻¹(x−μ_g) + log π_g.
struct QdaModel {
  Matrix class_means;           // G x q
  std::vector<Matrix> precisions;
  Vector log_dets;
  Vector log_priors;
};

/// Class covariances use n_g − 1. A class with fewer than q + 1 members is
/// shrunk toward the pooled covariance with weight (n_g − 1)/q; one with fewer
/// than 2 members is an error.
QdaModel fit_qda(const Dataset& train);
Vector qda_scores(const QdaModel& model, std::span<const double> x);
std::size_t qda_predict(const QdaModel& model, std::span<const double> x);

struct KnnModel {
  Dataset train;
  std::size_t k = 1;
};

KnnModel make_knn(Dataset train, std::size_t k);
/// Majority vote among the k nearest training points (Euclidean). Distance ties
/// keep the lower training index; vote ties go to the lower class.
std::size_t knn_predict(const KnnModel& model, std::span<const double> x);
/// Fraction of the k neighbours in each class.
Vector knn_vote_shares(const KnnModel& model, std::span<const double> x);

/// {1, 3, …, 31}.
std::vector<std::size_t> default_k_grid();

struct KnnSelection {
  std::size_t k = 1;
  std::vector<std::size_t> candidates;
  std::vector<double> cv_msr;
};

/// Fold of row i is i mod folds. Returns the k minimizing the pooled CV
/// misclassification rate; ties go to the smallest k. Candidates larger than
/// the smallest training fold are skipped.
KnnSelection knn_cv_select_k(const Dataset& train, const std::vector<std::size_t>& k_grid, std::size_t folds = 10);

}  // namespace npc
