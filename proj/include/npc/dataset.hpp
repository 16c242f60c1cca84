#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "npc/matrix.hpp"
#include "npc/rng.hpp"

namespace npc {

/// Labelled observations. `labels[i]` is a 0-based index into `class_names`;
/// external interfaces (CSV, C API, reports) present classes 1-based.
struct Dataset {
  Matrix features;  // n x d
  std::vector<int> labels;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.cols(); }
  std::size_t num_classes() const noexcept { return class_names.size(); }

  std::vector<std::size_t> class_counts() const;
  Dataset subset(const std::vector<std::size_t>& rows) const;
  /// Same labels and names, new feature matrix (e.g. PCA scores).
  Dataset with_features(Matrix features, std::vector<std::string> names = {}) const;
  /// Throws DataError when an invariant (label range, finiteness, G >= 2) fails.
  void validate() const;
};

/// Column layout expected by load_csv.
struct CsvSchema {
  std::string name;
  /// Expected feature columns in order; empty means "every column except the label".
  std::vector<std::string> feature_columns;
  std::string label_column;
  /// Declared classes. Empty means classes are taken from the label values in
  /// order of first appearance.
  std::vector<std::string> class_names;
  /// Raw label codes, parallel to class_names (e.g. "1" -> Normal). A label
  /// cell may hold either the code (numerically compared) or the class name.
  std::vector<std::string> class_codes;

  /// The cardiotocography layout: 21 features plus NSP in {1,2,3}.
  static CsvSchema ctg();
  /// The same recordings as distributed with long column names and a
  /// `fetal_health` label column.
  static CsvSchema fetal_health();
  static CsvSchema generic(std::string label_column);
  /// "ctg", "fetal_health" or "generic:<label column>".
  static CsvSchema by_name(const std::string& name);
};

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);
void write_csv(const std::filesystem::path& path, const Dataset& data, const CsvSchema& schema);

struct StandardizationParams {
  Vector means;  // per retained column
  Vector stds;   // per retained column, > 0
  std::vector<std::size_t> kept;  // retained column indices of the input
  std::vector<std::string> dropped;  // names of constant columns

  Vector apply(std::span<const double> x) const;
  Dataset apply(const Dataset& data) const;
};

/// Column-wise z-scores with the n-1 standard deviation. Constant columns are
/// dropped and recorded.
std::pair<Dataset, StandardizationParams> standardize(const Dataset& data);

struct SplitSpec {
  std::optional<double> train_fraction;
  /// Explicit per-class train counts (class order); overrides the fraction.
  std::vector<std::size_t> train_counts;
};

struct Split {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_rows;  // indices into the input, stream order
  std::vector<std::size_t> test_rows;   // indices into the input, ascending
};

/// Per-class sampling without replacement. The training set comes out in a
/// seeded random order, which is the order the online pipeline streams it in.
Split stratified_split(const Dataset& data, const SplitSpec& spec, Rng& rng);

/// Gaussian-mixture data in the CTG layout (21 features, classes
/// Normal/Suspect/Pathologic with the given totals). Test fixture and demo data.
Dataset synthetic_ctg_like(std::uint64_t seed, std::vector<std::size_t> class_totals = {1655, 295, 176});

}  // namespace npc
