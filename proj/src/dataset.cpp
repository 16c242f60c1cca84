#include "npc/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>

#include "npc/csv.hpp"
#include "npc/error.hpp"

namespace npc {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes(), 0);
  for (int y : labels) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.features = Matrix(rows.size(), dim());
  out.labels.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto src = features.row(rows[r]);
    std::copy(src.begin(), src.end(), out.features.row(r).begin());
    out.labels.push_back(labels[rows[r]]);
  }
  out.feature_names = feature_names;
  out.class_names = class_names;
  return out;
}

Dataset Dataset::with_features(Matrix f, std::vector<std::string> names) const {
  Dataset out;
  if (names.empty())
    for (std::size_t j = 0; j < f.cols(); ++j) names.push_back("PC" + std::to_string(j + 1));
  out.features = std::move(f);
  out.labels = labels;
  out.feature_names = std::move(names);
  out.class_names = class_names;
  return out;
}

void Dataset::validate() const {
  if (num_classes() < 2) throw DataError("dataset needs at least 2 classes");
  if (size() == 0) throw DataError("dataset is empty");
  if (dim() == 0) throw DataError("dataset has no features");
  if (features.rows() != size()) throw DataError("feature rows and labels differ in length");
  for (int y : labels)
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes())
      throw DataError("label index " + std::to_string(y + 1) + " outside 1.." + std::to_string(num_classes()));
  for (double v : features.data())
    if (!std::isfinite(v)) throw DataError("non-finite feature value");
}

CsvSchema CsvSchema::ctg() {
  return {"ctg",
          {"LB", "AC", "FM", "UC", "DL", "DS", "DP", "ASTV", "MSTV", "ALTV", "MLTV", "Width", "Min", "Max",
           "Nmax", "Nzeros", "Mode", "Mean", "Median", "Variance", "Tendency"},
          "NSP",
          {"Normal", "Suspect", "Pathologic"},
          {"1", "2", "3"}};
}

CsvSchema CsvSchema::fetal_health() {
  return {"fetal_health",
          {"baseline value",
           "accelerations",
           "fetal_movement",
           "uterine_contractions",
           "light_decelerations",
           "severe_decelerations",
           "prolongued_decelerations",
           "abnormal_short_term_variability",
           "mean_value_of_short_term_variability",
           "percentage_of_time_with_abnormal_long_term_variability",
           "mean_value_of_long_term_variability",
           "histogram_width",
           "histogram_min",
           "histogram_max",
           "histogram_number_of_peaks",
           "histogram_number_of_zeroes",
           "histogram_mode",
           "histogram_mean",
           "histogram_median",
           "histogram_variance",
           "histogram_tendency"},
          "fetal_health",
          {"Normal", "Suspect", "Pathologic"},
          {"1", "2", "3"}};
}

CsvSchema CsvSchema::generic(std::string label_column) {
  CsvSchema s;
  s.name = "generic";
  s.label_column = std::move(label_column);
  return s;
}

CsvSchema CsvSchema::by_name(const std::string& name) {
  if (name == "ctg") return ctg();
  if (name == "fetal_health") return fetal_health();
  if (name.rfind("generic:", 0) == 0 && name.size() > 8) return generic(name.substr(8));
  throw ConfigError("unknown schema '" + name + "' (expected ctg, fetal_health or generic:<label column>)");
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  if (!std::filesystem::exists(path)) throw IoError("input file not found: " + path.string());
  const csv::Table table = csv::read(path);
  if (table.header.empty()) throw DataError(path.string() + ": missing header row");

  std::map<std::string, std::size_t> column_of;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    const auto key = lower(trim(table.header[j]));
    if (!column_of.emplace(key, j).second)
      throw DataError(path.string() + ": duplicate column '" + table.header[j] + "'");
  }

  const auto label_it = column_of.find(lower(schema.label_column));
  if (label_it == column_of.end())
    throw DataError(path.string() + ": missing label column '" + schema.label_column + "'");
  const std::size_t label_col = label_it->second;

  Dataset out;
  std::vector<std::size_t> feature_cols;
  if (schema.feature_columns.empty()) {
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      if (j == label_col) continue;
      feature_cols.push_back(j);
      out.feature_names.push_back(trim(table.header[j]));
    }
  } else {
    for (const auto& name : schema.feature_columns) {
      auto it = column_of.find(lower(name));
      if (it == column_of.end()) throw DataError(path.string() + ": missing column '" + name + "'");
      feature_cols.push_back(it->second);
      out.feature_names.push_back(name);
    }
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      if (j == label_col) continue;
      if (std::find(feature_cols.begin(), feature_cols.end(), j) == feature_cols.end())
        throw DataError(path.string() + ": unexpected column '" + table.header[j] + "'");
    }
  }

  out.class_names = schema.class_names;
  auto resolve_label = [&](const std::string& raw, std::size_t line) -> int {
    const std::string cell = trim(raw);
    if (!schema.class_names.empty()) {
      const auto numeric = csv::parse_double(cell);
      for (std::size_t g = 0; g < schema.class_names.size(); ++g) {
        if (g < schema.class_codes.size()) {
          if (cell == schema.class_codes[g]) return static_cast<int>(g);
          if (numeric && csv::parse_double(schema.class_codes[g]) == numeric) return static_cast<int>(g);
        }
        if (lower(cell) == lower(schema.class_names[g])) return static_cast<int>(g);
      }
      throw DataError(path.string() + ": line " + std::to_string(line) + ", column '" + schema.label_column +
                      "': unknown label '" + cell + "'");
    }
    if (cell.empty())
      throw DataError(path.string() + ": line " + std::to_string(line) + ", column '" + schema.label_column +
                      "': empty label");
    auto it = std::find(out.class_names.begin(), out.class_names.end(), cell);
    if (it != out.class_names.end()) return static_cast<int>(it - out.class_names.begin());
    out.class_names.push_back(cell);
    return static_cast<int>(out.class_names.size() - 1);
  };

  out.features = Matrix(table.rows.size(), feature_cols.size());
  out.labels.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.lines[r];
    if (row.size() != table.header.size())
      throw DataError(path.string() + ": line " + std::to_string(line) + ": expected " +
                      std::to_string(table.header.size()) + " fields, found " + std::to_string(row.size()));
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      const auto& cell = row[feature_cols[j]];
      const auto v = csv::parse_double(cell);
      if (!v || !std::isfinite(*v))
        throw DataError(path.string() + ": line " + std::to_string(line) + ", column '" + out.feature_names[j] +
                        "': invalid numeric value '" + cell + "'");
      out.features(r, j) = *v;
    }
    out.labels.push_back(resolve_label(row[label_col], line));
  }
  out.validate();
  return out;
}

void write_csv(const std::filesystem::path& path, const Dataset& data, const CsvSchema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  auto header = data.feature_names;
  header.push_back(schema.label_column.empty() ? "label" : schema.label_column);
  out << csv::join(header) << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::vector<std::string> fields;
    for (double v : data.features.row(i)) fields.push_back(csv::format(v));
    const auto g = static_cast<std::size_t>(data.labels[i]);
    fields.push_back(g < schema.class_codes.size() ? schema.class_codes[g] : data.class_names[g]);
    out << csv::join(fields) << '\n';
  }
}

Vector StandardizationParams::apply(std::span<const double> x) const {
  Vector out(kept.size());
  for (std::size_t j = 0; j < kept.size(); ++j) out[j] = (x[kept[j]] - means[j]) / stds[j];
  return out;
}

Dataset StandardizationParams::apply(const Dataset& data) const {
  Matrix f(data.size(), kept.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto row = data.features.row(i);
    for (std::size_t j = 0; j < kept.size(); ++j) f(i, j) = (row[kept[j]] - means[j]) / stds[j];
  }
  std::vector<std::string> names;
  for (auto j : kept) names.push_back(data.feature_names.at(j));
  return data.with_features(std::move(f), std::move(names));
}

std::pair<Dataset, StandardizationParams> standardize(const Dataset& data) {
  const std::size_t n = data.size();
  if (n < 2) throw DataError("standardize needs at least 2 rows");
  StandardizationParams params;
  for (std::size_t j = 0; j < data.dim(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += data.features(i, j);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = data.features(i, j) - mean;
      ss += t * t;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) {
      params.dropped.push_back(data.feature_names.at(j));
      continue;
    }
    params.kept.push_back(j);
    params.means.push_back(mean);
    params.stds.push_back(sd);
  }
  if (params.kept.empty()) throw DataError("all feature columns are constant");
  return {params.apply(data), std::move(params)};
}

Split stratified_split(const Dataset& data, const SplitSpec& spec, Rng& rng) {
  const std::size_t g_count = data.num_classes();
  const auto totals = data.class_counts();
  for (std::size_t g = 0; g < g_count; ++g)
    if (totals[g] < 2) throw DataError("class '" + data.class_names[g] + "' has fewer than 2 members");

  std::vector<std::size_t> wanted(g_count);
  if (!spec.train_counts.empty()) {
    if (spec.train_counts.size() != g_count)
      throw ConfigError("train_counts has " + std::to_string(spec.train_counts.size()) + " entries, dataset has " +
                        std::to_string(g_count) + " classes");
    wanted = spec.train_counts;
  } else {
    if (!spec.train_fraction) throw ConfigError("split needs train_fraction or train_counts");
    const double f = *spec.train_fraction;
    if (!(f > 0.0 && f < 1.0)) throw ConfigError("train_fraction must lie in (0,1)");
    for (std::size_t g = 0; g < g_count; ++g) wanted[g] = static_cast<std::size_t>(std::llround(f * static_cast<double>(totals[g])));
  }
  for (std::size_t g = 0; g < g_count; ++g)
    if (wanted[g] > totals[g])
      throw ConfigError("train count " + std::to_string(wanted[g]) + " exceeds size " + std::to_string(totals[g]) +
                        " of class '" + data.class_names[g] + "'");

  std::vector<std::vector<std::size_t>> members(g_count);
  for (std::size_t i = 0; i < data.size(); ++i) members[static_cast<std::size_t>(data.labels[i])].push_back(i);

  Split out;
  for (std::size_t g = 0; g < g_count; ++g) {
    auto& m = members[g];
    rng.shuffle(m);
    out.train_rows.insert(out.train_rows.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(wanted[g]));
    out.test_rows.insert(out.test_rows.end(), m.begin() + static_cast<std::ptrdiff_t>(wanted[g]), m.end());
  }
  rng.shuffle(out.train_rows);
  std::sort(out.test_rows.begin(), out.test_rows.end());
  out.train = data.subset(out.train_rows);
  out.test = data.subset(out.test_rows);
  return out;
}

Dataset synthetic_ctg_like(std::uint64_t seed, std::vector<std::size_t> class_totals) {
  const CsvSchema schema = CsvSchema::ctg();
  constexpr std::size_t d = 21;
  constexpr std::size_t latent = 6;
  if (class_totals.size() != 3) throw ConfigError("synthetic CTG data has exactly 3 classes");

  // Fixed loadings so every seed shares the same feature geometry.
  Rng layout(0x5eed'c7a6ULL);
  Matrix loadings(d, latent);
  for (auto& v : loadings.data()) v = layout.normal();
  Vector scale(d), offset(d);
  for (std::size_t j = 0; j < d; ++j) {
    scale[j] = 0.5 + 4.0 * layout.uniform();
    offset[j] = 100.0 * layout.uniform();
  }
  // Class centres in latent space; Pathologic is a two-lobe mixture.
  const double centres[4][latent] = {{0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
                                     {2.2, -1.0, 0.8, 0.0, 0.5, 0.0},
                                     {-1.5, 2.4, -0.5, 1.0, 0.0, 0.6},
                                     {1.0, 2.0, 1.5, -1.2, 0.0, -0.4}};
  const double spread[3] = {1.0, 0.8, 0.9};

  Rng rng(seed);
  Dataset out;
  out.feature_names = schema.feature_columns;
  out.class_names = schema.class_names;
  std::size_t n = 0;
  for (auto t : class_totals) n += t;
  out.features = Matrix(n, d);
  std::vector<int> labels;
  for (std::size_t g = 0; g < 3; ++g) labels.insert(labels.end(), class_totals[g], static_cast<int>(g));
  rng.shuffle(labels);
  out.labels = labels;
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = static_cast<std::size_t>(labels[i]);
    const std::size_t centre = (g == 2 && rng.uniform() < 0.4) ? 3 : g;
    double z[latent];
    for (std::size_t k = 0; k < latent; ++k) z[k] = centres[centre][k] + spread[g] * rng.normal();
    for (std::size_t j = 0; j < d; ++j) {
      double v = 0.0;
      for (std::size_t k = 0; k < latent; ++k) v += loadings(j, k) * z[k];
      // Mild nonlinearity keeps the classes from being exactly Gaussian.
      v += 0.15 * z[0] * z[1];
      out.features(i, j) = offset[j] + scale[j] * (v + 0.6 * rng.normal());
    }
  }
  return out;
}

}  // namespace npc
