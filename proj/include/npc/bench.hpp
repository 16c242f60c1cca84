#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "npc/dataset.hpp"
#include "npc/error.hpp"
#include "npc/kernel_smoothing.hpp"
#include "npc/matrix.hpp"

namespace npc {

enum class Method { Lda, Qda, Knn, Offline, Online };

std::string method_name(Method m);
Method method_from_name(const std::string& name);
const std::vector<Method>& all_methods();

struct ExternalPredictionSource {
  std::string label;
  std::filesystem::path path;
};

struct BenchConfig {
  std::filesystem::path input;
  std::string schema = "ctg";
  std::vector<Method> methods = all_methods();
  std::size_t q = 5;
  SplitSpec split{std::nullopt, {1153, 205, 130}};
  std::size_t replications = 1;
  /// Offline runs only in the first offline_replications replications (all when unset).
  std::optional<std::size_t> offline_replications;
  std::uint64_t seed = 1;
  std::size_t n0 = 300;
  std::vector<double> c_gamma_grid;       // default_c_gamma_grid() when empty
  std::vector<double> bandwidth_c;        // default grid when both empty
  std::vector<double> bandwidth_nu;
  KernelId kernel = KernelId::Epanechnikov;
  std::size_t offline_cv_folds = 0;       // 0: exact leave-one-out
  std::vector<std::size_t> k_grid;        // default_k_grid() when empty
  std::size_t folds = 10;
  bool standardize = true;
  /// Project each training row with the basis available when it arrives
  /// instead of the final basis.
  bool streaming_projection = false;
  std::filesystem::path out_dir;
  bool serial = false;
  std::size_t threads = 0;  // 0: NPC_THREADS, else hardware concurrency
  std::vector<ExternalPredictionSource> merge_predictions;

  /// Keys are the field names above; unknown keys are rejected.
  static BenchConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  /// Field-level checks that do not need the data.
  void validate() const;

  BandwidthGrid bandwidth_grid() const;
  std::vector<double> c_gamma_candidates() const;
  std::vector<std::size_t> k_candidates() const;
  bool runs(Method m) const;
};

struct MethodOutcome {
  Method method = Method::Lda;
  bool ok = false;
  std::string error;
  ErrorKind error_kind = ErrorKind::Numeric;
  std::vector<int> predicted;  // per test row
  Matrix scores;               // test x G: posteriors, discriminants or vote shares
  double seconds = 0.0;
  nlohmann::json tuning;       // selected hyperparameters
};

struct ReplicationResult {
  std::size_t index = 0;  // 1-based
  std::uint64_t seed = 0;
  std::vector<std::size_t> test_rows;  // indices into the input, ascending
  std::vector<int> test_labels;
  std::vector<std::string> dropped_columns;
  std::vector<MethodOutcome> outcomes;  // in config method order; skipped methods absent

  const MethodOutcome* find(Method m) const;
};

/// One replication: split with the replication's sub-seed, standardize on the
/// training part, then fit, tune and predict every configured method.
ReplicationResult run_replication(const Dataset& data, const BenchConfig& config, std::size_t index);

struct BenchReport {
  std::vector<ReplicationResult> replications;  // ordered by index
};

/// Replication 1 runs alone first (its timings are reported); the rest run on
/// a worker pool unless config.serial.
BenchReport replicate(const Dataset& data, const BenchConfig& config);

/// Loads the input, runs the replications and writes every artifact into
/// config.out_dir. Returns the report.
BenchReport run_bench(const BenchConfig& config);

/// Writes the report's artifacts for `data` into config.out_dir.
void write_bench_artifacts(const Dataset& data, const BenchConfig& config, const BenchReport& report);

/// Worker count from the config, NPC_THREADS, or the hardware.
std::size_t resolve_threads(const BenchConfig& config);

struct TuneResult {
  double best = 0.0;
  std::vector<double> candidates;
  std::vector<double> head_msr;
};

/// Replication-1 split and reduction, then c_γ tuning on the head. Writes
/// cgamma_curve.csv into config.out_dir when it is set.
TuneResult run_tune_cgamma(const BenchConfig& config);

struct PcaConfig {
  std::filesystem::path input;
  std::string schema = "ctg";
  std::size_t q = 5;
  bool batch = true;
  bool streaming = false;
  bool standardize = true;
  bool scores = false;
  std::size_t n0 = 300;
  std::uint64_t seed = 1;  // stream order of the streaming mode
  std::filesystem::path out_dir;

  static PcaConfig from_json(const nlohmann::json& j);
};

struct PcaRunResult {
  nlohmann::json summary;  // also written to pca_summary.json
};

PcaRunResult run_pca(const PcaConfig& config);

struct SynthConfig {
  std::filesystem::path out;
  std::uint64_t seed = 1;
  std::vector<std::size_t> totals{1655, 295, 176};

  static SynthConfig from_json(const nlohmann::json& j);
};

void run_synth(const SynthConfig& config);

}  // namespace npc
