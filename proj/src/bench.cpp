#include "npc/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "npc/baselines.hpp"
#include "npc/csv.hpp"
#include "npc/error.hpp"
#include "npc/evaluation.hpp"
#include "npc/online_classifier.hpp"
#include "npc/pca_batch.hpp"
#include "npc/pca_online.hpp"

namespace npc {

using nlohmann::json;

namespace {

constexpr int kResultsSchemaVersion = 1;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.contains(key)) throw ConfigError(what + ": unknown field '" + key + "'");
}

template <typename T>
void read_field(const json& j, const char* key, T& target) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Matrix head_rows(const Matrix& m, std::size_t count) {
  Matrix out(count, m.cols());
  std::copy_n(m.data().begin(), count * m.cols(), out.data().begin());
  return out;
}

std::vector<std::size_t> iota_rows(std::size_t count) {
  std::vector<std::size_t> rows(count);
  for (std::size_t i = 0; i < count; ++i) rows[i] = i;
  return rows;
}

// Training rows reduced by the rank-q incremental PCA fed in stream order,
// and test rows projected on its final basis.
struct StreamReduction {
  Dataset train;
  Dataset test;
  double seconds = 0.0;
};

StreamReduction reduce_streaming(const Dataset& train, const Dataset& test, std::size_t q, std::size_t n0,
                                 bool streaming_projection) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = train.size();
  StreamingPcaState state = init_streaming_pca(head_rows(train.features, n0), q);
  Matrix train_scores;
  if (streaming_projection) {
    train_scores = project_rows(head_rows(train.features, n0), state.mean, state.basis);
    for (std::size_t i = n0; i < n; ++i) {
      ipca_update_in_place(state, train.features.row(i));
      Matrix one(1, train.dim());
      std::copy(train.features.row(i).begin(), train.features.row(i).end(), one.row(0).begin());
      train_scores.append_row(project_rows(one, state.mean, state.basis).row(0));
    }
  } else {
    for (std::size_t i = n0; i < n; ++i) ipca_update_in_place(state, train.features.row(i));
    train_scores = project_rows(train.features, state.mean, state.basis);
  }
  StreamReduction out;
  out.train = train.with_features(std::move(train_scores));
  out.test = test.with_features(project_rows(test.features, state.mean, state.basis));
  out.seconds = seconds_since(start);
  return out;
}

json bandwidths_json(const std::vector<BandwidthParams>& params) {
  json out = json::array();
  for (const auto& p : params) out.push_back({{"c", p.c}, {"nu", p.nu}});
  return out;
}

void run_offline(MethodOutcome& out, const Dataset& train, const Dataset& test, const BenchConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const PcaModel pca = fit_batch_pca(train.features, config.q);
  const Dataset train_red = train.with_features(project(pca, train.features));
  const Matrix test_red = project(pca, test.features);
  const OfflineClassifier clf = OfflineClassifier::fit(train_red, config.bandwidth_grid(), config.kernel, config.offline_cv_folds);
  out.scores = Matrix(test.size(), train.num_classes());
  for (std::size_t i = 0; i < test.size(); ++i) {
    const Vector p = nw_posterior(clf, test_red.row(i));
    std::copy(p.begin(), p.end(), out.scores.row(i).begin());
    out.predicted.push_back(static_cast<int>(argmax(p)));
  }
  out.seconds = seconds_since(start);
  out.tuning = {{"bandwidth", bandwidths_json(clf.bandwidths())}};
}

void run_online(MethodOutcome& out, const StreamReduction& red, const BenchConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const Dataset head = red.train.subset(iota_rows(config.n0));
  const auto head_bw = loo_cv_select_all(head, config.bandwidth_grid(), config.kernel);
  const CGammaTuning tuned =
      tune_c_gamma(head, loo_posteriors(head, head_bw, config.kernel), config.c_gamma_candidates(), config.q, config.kernel);
  OnlinePosteriorState state = init_online(head, red.test.features, config.kernel, head_bw);
  const StepSchedule sched{tuned.best, config.q, config.kernel};
  for (std::size_t i = config.n0; i < red.train.size(); ++i)
    update_posterior(state, sched, red.train.features.row(i), red.train.labels[i]);
  out.scores = state.estimates;
  for (std::size_t k = 0; k < state.num_queries(); ++k) out.predicted.push_back(static_cast<int>(classify_online(state, k)));
  out.seconds = red.seconds + seconds_since(start);
  out.tuning = {{"c_gamma", tuned.best}, {"head_bandwidth", bandwidths_json(head_bw)}};
}

template <typename Fit, typename Score>
void run_discriminant(MethodOutcome& out, const StreamReduction& red, Fit fit, Score score) {
  const auto start = std::chrono::steady_clock::now();
  const auto model = fit(red.train);
  out.scores = Matrix(red.test.size(), red.train.num_classes());
  for (std::size_t i = 0; i < red.test.size(); ++i) {
    const Vector s = score(model, red.test.features.row(i));
    std::copy(s.begin(), s.end(), out.scores.row(i).begin());
    out.predicted.push_back(static_cast<int>(argmax(s)));
  }
  out.seconds = red.seconds + seconds_since(start);
}

void run_knn(MethodOutcome& out, const StreamReduction& red, const BenchConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const KnnSelection sel = knn_cv_select_k(red.train, config.k_candidates(), config.folds);
  const KnnModel model = make_knn(red.train, sel.k);
  out.scores = Matrix(red.test.size(), red.train.num_classes());
  for (std::size_t i = 0; i < red.test.size(); ++i) {
    const Vector s = knn_vote_shares(model, red.test.features.row(i));
    std::copy(s.begin(), s.end(), out.scores.row(i).begin());
    out.predicted.push_back(static_cast<int>(argmax(s)));
  }
  out.seconds = red.seconds + seconds_since(start);
  out.tuning = {{"k", sel.k}};
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Lda: return "lda";
    case Method::Qda: return "qda";
    case Method::Knn: return "knn";
    case Method::Offline: return "offline";
    case Method::Online: return "online";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  const std::string n = lower(name);
  for (Method m : all_methods())
    if (method_name(m) == n) return m;
  throw ConfigError("config field 'methods': unknown method '" + name + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods{Method::Lda, Method::Qda, Method::Knn, Method::Online, Method::Offline};
  return methods;
}

BenchConfig BenchConfig::from_json(const json& j) {
  reject_unknown_keys(j,
                      {"input", "schema", "methods", "q", "train_counts", "train_fraction", "m", "offline_m", "seed",
                       "n0", "c_gamma_grid", "bandwidth_c", "bandwidth_nu", "kernel", "offline_cv_folds", "k_grid", "folds", "standardize",
                       "streaming_projection", "out_dir", "serial", "threads", "merge_predictions"},
                      "bench config");
  BenchConfig c;
  std::string input;
  read_field(j, "input", input);
  c.input = input;
  read_field(j, "schema", c.schema);
  if (j.contains("methods")) {
    std::vector<std::string> names;
    const auto& v = j.at("methods");
    if (v.is_string()) {
      std::stringstream ss(v.get<std::string>());
      for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) names.push_back(item);
    } else {
      read_field(j, "methods", names);
    }
    c.methods.clear();
    for (const auto& name : names) {
      const Method m = method_from_name(name);
      if (std::find(c.methods.begin(), c.methods.end(), m) == c.methods.end()) c.methods.push_back(m);
    }
  }
  read_field(j, "q", c.q);
  if (j.contains("train_fraction")) {
    double f = 0.0;
    read_field(j, "train_fraction", f);
    c.split = SplitSpec{f, {}};
  }
  if (j.contains("train_counts")) {
    if (j.contains("train_fraction")) throw ConfigError("config fields 'train_counts' and 'train_fraction' are exclusive");
    std::vector<std::size_t> counts;
    read_field(j, "train_counts", counts);
    c.split = SplitSpec{std::nullopt, counts};
  }
  read_field(j, "m", c.replications);
  if (j.contains("offline_m")) {
    std::size_t om = 0;
    read_field(j, "offline_m", om);
    c.offline_replications = om;
  }
  read_field(j, "seed", c.seed);
  read_field(j, "n0", c.n0);
  read_field(j, "c_gamma_grid", c.c_gamma_grid);
  read_field(j, "bandwidth_c", c.bandwidth_c);
  read_field(j, "bandwidth_nu", c.bandwidth_nu);
  if (j.contains("kernel")) {
    std::string k;
    read_field(j, "kernel", k);
    try {
      c.kernel = kernel_from_name(k);
    } catch (const Error& e) {
      throw ConfigError(std::string("config field 'kernel': ") + e.what());
    }
  }
  read_field(j, "offline_cv_folds", c.offline_cv_folds);
  read_field(j, "k_grid", c.k_grid);
  read_field(j, "folds", c.folds);
  read_field(j, "standardize", c.standardize);
  read_field(j, "streaming_projection", c.streaming_projection);
  std::string out_dir;
  read_field(j, "out_dir", out_dir);
  c.out_dir = out_dir;
  read_field(j, "serial", c.serial);
  read_field(j, "threads", c.threads);
  if (j.contains("merge_predictions")) {
    std::vector<std::string> specs;
    read_field(j, "merge_predictions", specs);
    for (const auto& s : specs) {
      const auto colon = s.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == s.size())
        throw ConfigError("config field 'merge_predictions': expected <label>:<csv>, got '" + s + "'");
      c.merge_predictions.push_back({s.substr(0, colon), s.substr(colon + 1)});
    }
  }
  c.validate();
  return c;
}

json BenchConfig::to_json() const {
  json j;
  j["input"] = input.string();
  j["schema"] = schema;
  json m = json::array();
  for (Method x : methods) m.push_back(method_name(x));
  j["methods"] = m;
  j["q"] = q;
  if (split.train_counts.empty())
    j["train_fraction"] = split.train_fraction.value_or(0.0);
  else
    j["train_counts"] = split.train_counts;
  j["m"] = replications;
  if (offline_replications) j["offline_m"] = *offline_replications;
  j["seed"] = seed;
  j["n0"] = n0;
  j["c_gamma_grid"] = c_gamma_candidates();
  json grid = json::array();
  for (const auto& p : bandwidth_grid()) grid.push_back({p.c, p.nu});
  j["bandwidth_grid"] = grid;
  j["kernel"] = kernel_name(kernel);
  j["offline_cv_folds"] = offline_cv_folds;
  j["k_grid"] = k_candidates();
  j["folds"] = folds;
  j["standardize"] = standardize;
  j["streaming_projection"] = streaming_projection;
  return j;
}

void BenchConfig::validate() const {
  if (input.empty()) throw ConfigError("config field 'input': required");
  if (methods.empty()) throw ConfigError("config field 'methods': must name at least one method");
  if (q < 1) throw ConfigError("config field 'q': must be >= 1");
  if (replications < 1) throw ConfigError("config field 'm': must be >= 1");
  if (offline_replications && *offline_replications < 1)
    throw ConfigError("config field 'offline_m': must be >= 1");
  if (split.train_counts.empty()) {
    if (!split.train_fraction || !(*split.train_fraction > 0.0 && *split.train_fraction < 1.0))
      throw ConfigError("config field 'train_fraction': must lie in (0, 1)");
  }
  if (n0 < q + 1) throw ConfigError("config field 'n0': must be at least q + 1");
  for (double c : c_gamma_grid)
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("config field 'c_gamma_grid': values must be positive");
  if (bandwidth_c.empty() != bandwidth_nu.empty())
    throw ConfigError("config fields 'bandwidth_c' and 'bandwidth_nu' must be given together");
  try {
    (void)bandwidth_grid();
  } catch (const Error& e) {
    throw ConfigError(std::string("config field 'bandwidth_c'/'bandwidth_nu': ") + e.what());
  }
  for (std::size_t k : k_grid)
    if (k < 1) throw ConfigError("config field 'k_grid': values must be >= 1");
  if (folds < 2) throw ConfigError("config field 'folds': must be >= 2");
  if (offline_cv_folds == 1) throw ConfigError("config field 'offline_cv_folds': must be 0 (leave-one-out) or >= 2");
}

BandwidthGrid BenchConfig::bandwidth_grid() const {
  if (bandwidth_c.empty()) return default_bandwidth_grid();
  return make_bandwidth_grid(bandwidth_c, bandwidth_nu);
}

std::vector<double> BenchConfig::c_gamma_candidates() const {
  return c_gamma_grid.empty() ? default_c_gamma_grid() : c_gamma_grid;
}

std::vector<std::size_t> BenchConfig::k_candidates() const { return k_grid.empty() ? default_k_grid() : k_grid; }

bool BenchConfig::runs(Method m) const { return std::find(methods.begin(), methods.end(), m) != methods.end(); }

const MethodOutcome* ReplicationResult::find(Method m) const {
  for (const auto& o : outcomes)
    if (o.method == m) return &o;
  return nullptr;
}

ReplicationResult run_replication(const Dataset& data, const BenchConfig& config, std::size_t index) {
  Rng rng = Rng(config.seed).substream(index);
  ReplicationResult rep;
  rep.index = index;
  rep.seed = rng.seed();
  Split split = stratified_split(data, config.split, rng);
  rep.test_rows = split.test_rows;
  rep.test_labels = split.test.labels;

  Dataset train = std::move(split.train);
  Dataset test = std::move(split.test);
  if (config.standardize) {
    auto [train_s, params] = standardize(train);
    test = params.apply(test);
    train = std::move(train_s);
    rep.dropped_columns = params.dropped;
  }

  const bool offline_here = !config.offline_replications || index <= *config.offline_replications;
  std::optional<StreamReduction> reduced;
  std::string reduction_error;
  ErrorKind reduction_kind = ErrorKind::Numeric;
  const bool needs_stream = std::any_of(config.methods.begin(), config.methods.end(),
                                        [](Method m) { return m != Method::Offline; });
  if (needs_stream) {
    try {
      if (config.q > train.dim())
        throw ConfigError("q=" + std::to_string(config.q) + " exceeds the feature dimension " +
                          std::to_string(train.dim()));
      if (config.n0 >= train.size()) throw ConfigError("n0 must be smaller than the training size");
      reduced = reduce_streaming(train, test, config.q, config.n0, config.streaming_projection);
    } catch (const Error& e) {
      reduction_error = e.what();
      reduction_kind = e.kind();
    }
  }

  for (Method m : config.methods) {
    if (m == Method::Offline && !offline_here) continue;
    MethodOutcome out;
    out.method = m;
    try {
      if (m != Method::Offline && !reduced) throw Error(reduction_kind, "stream reduction failed: " + reduction_error);
      switch (m) {
        case Method::Offline: run_offline(out, train, test, config); break;
        case Method::Online: run_online(out, *reduced, config); break;
        case Method::Lda: run_discriminant(out, *reduced, fit_lda, lda_scores); break;
        case Method::Qda: run_discriminant(out, *reduced, fit_qda, qda_scores); break;
        case Method::Knn: run_knn(out, *reduced, config); break;
      }
      out.ok = true;
    } catch (const Error& e) {
      out = MethodOutcome{};
      out.method = m;
      out.error = e.what();
      out.error_kind = e.kind();
    } catch (const std::exception& e) {
      out = MethodOutcome{};
      out.method = m;
      out.error = e.what();
      out.error_kind = ErrorKind::Numeric;
    }
    rep.outcomes.push_back(std::move(out));
  }
  return rep;
}

std::size_t resolve_threads(const BenchConfig& config) {
  if (config.serial) return 1;
  if (config.threads > 0) return config.threads;
  if (const char* env = std::getenv("NPC_THREADS")) {
    const auto v = csv::parse_double(env);
    if (v && *v >= 1.0 && *v == std::floor(*v)) return static_cast<std::size_t>(*v);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

BenchReport replicate(const Dataset& data, const BenchConfig& config) {
  BenchReport report;
  report.replications.resize(config.replications);
  report.replications[0] = run_replication(data, config, 1);

  const std::size_t remaining = config.replications - 1;
  const std::size_t workers = std::min(resolve_threads(config), remaining);
  if (workers <= 1) {
    for (std::size_t k = 2; k <= config.replications; ++k) report.replications[k - 1] = run_replication(data, config, k);
    return report;
  }
  std::atomic<std::size_t> next{2};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k <= config.replications; k = next++) {
          try {
            report.replications[k - 1] = run_replication(data, config, k);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return report;
}

namespace {

std::string cell(const std::optional<double>& v) { return v ? csv::format(*v) : std::string(); }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct ExternalResult {
  std::string label;
  std::vector<int> predicted;
};

ExternalResult load_external(const ExternalPredictionSource& src, const Dataset& data, const ReplicationResult& rep) {
  const csv::Table t = csv::read(src.path);
  auto column = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < t.header.size(); ++i)
      if (lower(t.header[i]) == name) return i;
    throw DataError("'" + src.path.string() + "': missing column '" + name + "'");
  };
  const std::size_t idx_col = column("index");
  const std::size_t pred_col = column("predicted");
  std::vector<int> by_row(data.size(), -1);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto where = "'" + src.path.string() + "' line " + std::to_string(t.lines[r]);
    if (t.rows[r].size() != t.header.size()) throw DataError(where + ": wrong number of fields");
    const auto idx = csv::parse_double(t.rows[r][idx_col]);
    if (!idx || *idx < 0 || *idx != std::floor(*idx) || *idx >= static_cast<double>(data.size()))
      throw DataError(where + ": invalid index '" + t.rows[r][idx_col] + "'");
    const std::string& p = t.rows[r][pred_col];
    int cls = -1;
    for (std::size_t g = 0; g < data.num_classes(); ++g)
      if (lower(data.class_names[g]) == lower(p)) cls = static_cast<int>(g);
    if (cls < 0) {
      const auto v = csv::parse_double(p);
      if (v && *v >= 1 && *v <= static_cast<double>(data.num_classes()) && *v == std::floor(*v))
        cls = static_cast<int>(*v) - 1;
    }
    if (cls < 0) throw DataError(where + ": unknown class '" + p + "'");
    by_row[static_cast<std::size_t>(*idx)] = cls;
  }
  ExternalResult out{src.label, {}};
  for (std::size_t row : rep.test_rows) {
    if (by_row[row] < 0)
      throw DataError("'" + src.path.string() + "': no prediction for test index " + std::to_string(row));
    out.predicted.push_back(by_row[row]);
  }
  if (t.rows.size() != rep.test_rows.size())
    throw DataError("'" + src.path.string() + "': row count does not match the test manifest");
  return out;
}

json confusion_json(const ConfusionMatrix& cm) {
  json rows = json::array();
  for (std::size_t t = 0; t < cm.num_classes(); ++t) {
    json r = json::array();
    for (std::size_t p = 0; p < cm.num_classes(); ++p) r.push_back(cm(t, p));
    rows.push_back(r);
  }
  return rows;
}

json per_class_json(const ConfusionMatrix& cm, const Dataset& data) {
  json out = json::array();
  for (std::size_t g = 0; g < cm.num_classes(); ++g) {
    const ClassMetrics m = class_metrics(cm, g);
    out.push_back({{"class", data.class_names[g]},
                   {"recall", opt_json(m.recall)},
                   {"specificity", opt_json(m.specificity)},
                   {"balanced_accuracy", opt_json(m.balanced_accuracy)},
                   {"precision", opt_json(m.precision)},
                   {"f1", opt_json(m.f1)}});
  }
  return out;
}

void append_class_rows(std::string& table, const std::string& label, const ConfusionMatrix& cm, const Dataset& data) {
  for (std::size_t g = 0; g < cm.num_classes(); ++g) {
    const ClassMetrics m = class_metrics(cm, g);
    auto pct = [](const std::optional<double>& v) { return v ? std::optional<double>(*v * 100.0) : std::nullopt; };
    table += csv::join({label, data.class_names[g], cell(pct(m.recall)), cell(pct(m.specificity)),
                        cell(pct(m.balanced_accuracy)), cell(pct(m.precision)), cell(m.f1)}) +
             "\n";
  }
}

}  // namespace

void write_bench_artifacts(const Dataset& data, const BenchConfig& config, const BenchReport& report) {
  ensure_dir(config.out_dir);
  const ReplicationResult& first = report.replications.front();
  const std::size_t g_count = data.num_classes();

  json results;
  results["schema_version"] = kResultsSchemaVersion;
  results["config"] = config.to_json();
  results["data"] = {{"rows", data.size()},
                     {"features", data.dim()},
                     {"classes", data.class_names},
                     {"class_counts", data.class_counts()},
                     {"dropped_constant_columns", first.dropped_columns}};
  results["replications"] = report.replications.size();

  std::string msr_table = "statistic";
  std::string class_table = "method,class,recall,specificity,balanced_accuracy,precision,f1\n";
  std::string summary_table = "method,accuracy,weighted_f1\n";
  std::string timing = "method,seconds,ratio_to_online\n";
  std::vector<std::optional<Summary>> summaries;

  const MethodOutcome* online_first = first.find(Method::Online);
  const double online_seconds = online_first && online_first->ok ? online_first->seconds : 0.0;

  json methods = json::object();
  for (Method m : config.methods) {
    const std::string name = method_name(m);
    msr_table += "," + name;
    json mj;
    json msrs = json::array();
    json failures = json::array();
    std::vector<double> ok_msr;
    for (const auto& rep : report.replications) {
      const MethodOutcome* o = rep.find(m);
      if (!o) continue;
      if (o->ok) {
        const double v = msr(rep.test_labels, o->predicted);
        msrs.push_back(v);
        ok_msr.push_back(v);
      } else {
        msrs.push_back(nullptr);
        failures.push_back({{"replication", rep.index}, {"error", o->error}});
      }
    }
    mj["msr"] = msrs;
    mj["failures"] = failures;
    if (ok_msr.empty()) {
      summaries.emplace_back(std::nullopt);
      mj["summary"] = nullptr;
    } else {
      const Summary s = summarize(ok_msr);
      summaries.emplace_back(s);
      mj["summary"] = {{"min", s.min}, {"q1", s.q1}, {"median", s.median}, {"mean", s.mean}, {"q3", s.q3}, {"max", s.max}};
    }

    const MethodOutcome* o = first.find(m);
    if (o && o->ok) {
      const ConfusionMatrix cm(first.test_labels, o->predicted, g_count);
      json r1;
      r1["confusion"] = confusion_json(cm);
      r1["accuracy"] = cm.accuracy();
      r1["weighted_f1"] = weighted_f1(cm);
      r1["per_class"] = per_class_json(cm, data);
      r1["tuning"] = o->tuning;
      json auc = json::object();
      for (std::size_t g = 0; g < g_count; ++g) {
        std::vector<double> scores = o->scores.col(g);
        RocCurve roc;
        try {
          roc = roc_auc(scores, first.test_labels, static_cast<int>(g));
        } catch (const DataError&) {
          auc[data.class_names[g]] = nullptr;
          continue;
        }
        auc[data.class_names[g]] = roc.auc;
        std::string text = "threshold,fpr,tpr\n";
        for (std::size_t i = 0; i < roc.fpr.size(); ++i)
          text += csv::join({csv::format(roc.thresholds[i]), csv::format(roc.fpr[i]), csv::format(roc.tpr[i])}) + "\n";
        write_text(config.out_dir / ("roc_" + name + "_" + lower(data.class_names[g]) + ".csv"), text);
      }
      r1["auc"] = auc;
      mj["replication1"] = r1;
      append_class_rows(class_table, name, cm, data);
      summary_table += csv::join({name, csv::format(cm.accuracy() * 100.0), csv::format(weighted_f1(cm))}) + "\n";
      timing += csv::join({name, csv::format(o->seconds),
                           online_seconds > 0.0 ? csv::format(o->seconds / online_seconds) : std::string()}) +
                "\n";
    } else {
      mj["replication1"] = nullptr;
    }
    methods[name] = mj;
  }
  results["methods"] = methods;

  msr_table += "\n";
  const std::vector<std::pair<std::string, double Summary::*>> stats{
      {"min", &Summary::min}, {"q1", &Summary::q1},   {"median", &Summary::median},
      {"mean", &Summary::mean}, {"q3", &Summary::q3}, {"max", &Summary::max}};
  for (const auto& [label, field] : stats) {
    std::vector<std::string> row{label};
    for (const auto& s : summaries) row.push_back(s ? csv::format((*s).*field * 100.0) : std::string());
    msr_table += csv::join(row) + "\n";
  }

  json external = json::object();
  for (const auto& src : config.merge_predictions) {
    const ExternalResult ext = load_external(src, data, first);
    const ConfusionMatrix cm(first.test_labels, ext.predicted, g_count);
    external[ext.label] = {{"msr", msr(first.test_labels, ext.predicted)},
                           {"accuracy", cm.accuracy()},
                           {"weighted_f1", weighted_f1(cm)},
                           {"confusion", confusion_json(cm)},
                           {"per_class", per_class_json(cm, data)}};
    append_class_rows(class_table, ext.label, cm, data);
    summary_table += csv::join({ext.label, csv::format(cm.accuracy() * 100.0), csv::format(weighted_f1(cm))}) + "\n";
  }
  if (!config.merge_predictions.empty()) results["external"] = external;

  std::string manifest = "index,label\n";
  for (std::size_t i = 0; i < first.test_rows.size(); ++i)
    manifest += csv::join({std::to_string(first.test_rows[i]),
                           data.class_names[static_cast<std::size_t>(first.test_labels[i])]}) +
                "\n";

  write_text(config.out_dir / "results.json", results.dump(2) + "\n");
  write_text(config.out_dir / "table3.csv", msr_table);
  write_text(config.out_dir / "table4.csv", class_table);
  write_text(config.out_dir / "table5.csv", summary_table);
  write_text(config.out_dir / "timing.csv", timing);
  write_text(config.out_dir / "test_manifest.csv", manifest);
}

BenchReport run_bench(const BenchConfig& config) {
  config.validate();
  if (config.out_dir.empty()) throw ConfigError("config field 'out_dir': required");
  const Dataset data = load_csv(config.input, CsvSchema::by_name(config.schema));
  BenchReport report = replicate(data, config);

  // A run in which nothing succeeded reports the first failure.
  bool any_ok = false;
  for (const auto& rep : report.replications)
    for (const auto& o : rep.outcomes) any_ok = any_ok || o.ok;
  if (!any_ok) {
    const auto& o = report.replications.front().outcomes.front();
    throw Error(o.error_kind, "every method failed; first error (" + method_name(o.method) + "): " + o.error);
  }
  write_bench_artifacts(data, config, report);
  return report;
}

TuneResult run_tune_cgamma(const BenchConfig& config) {
  config.validate();
  const Dataset data = load_csv(config.input, CsvSchema::by_name(config.schema));
  Rng rng = Rng(config.seed).substream(1);
  Split split = stratified_split(data, config.split, rng);
  Dataset train = std::move(split.train);
  Dataset test = std::move(split.test);
  if (config.standardize) {
    auto [train_s, params] = standardize(train);
    test = params.apply(test);
    train = std::move(train_s);
  }
  if (config.q > train.dim()) throw ConfigError("config field 'q': exceeds the feature dimension");
  if (config.n0 >= train.size()) throw ConfigError("config field 'n0': must be smaller than the training size");
  const StreamReduction red = reduce_streaming(train, test, config.q, config.n0, config.streaming_projection);
  const Dataset head = red.train.subset(iota_rows(config.n0));
  const CGammaTuning tuned =
      tune_c_gamma(head, config.c_gamma_candidates(), config.q, config.kernel, config.bandwidth_grid());
  if (!config.out_dir.empty()) {
    ensure_dir(config.out_dir);
    std::string text = "c_gamma,head_msr\n";
    for (std::size_t i = 0; i < tuned.candidates.size(); ++i)
      text += csv::join({csv::format(tuned.candidates[i]), csv::format(tuned.head_msr[i])}) + "\n";
    write_text(config.out_dir / "cgamma_curve.csv", text);
  }
  return {tuned.best, tuned.candidates, tuned.head_msr};
}

PcaConfig PcaConfig::from_json(const json& j) {
  reject_unknown_keys(j, {"input", "schema", "q", "mode", "standardize", "scores", "n0", "seed", "out_dir"},
                      "pca config");
  PcaConfig c;
  std::string input;
  read_field(j, "input", input);
  c.input = input;
  if (c.input.empty()) throw ConfigError("config field 'input': required");
  read_field(j, "schema", c.schema);
  read_field(j, "q", c.q);
  if (c.q < 1) throw ConfigError("config field 'q': must be >= 1");
  if (j.contains("mode")) {
    std::string mode;
    read_field(j, "mode", mode);
    mode = lower(mode);
    if (mode == "batch") {
      c.batch = true;
      c.streaming = false;
    } else if (mode == "streaming") {
      c.batch = false;
      c.streaming = true;
    } else if (mode == "both") {
      c.batch = c.streaming = true;
    } else {
      throw ConfigError("config field 'mode': expected batch, streaming or both");
    }
  }
  read_field(j, "standardize", c.standardize);
  read_field(j, "scores", c.scores);
  read_field(j, "n0", c.n0);
  read_field(j, "seed", c.seed);
  std::string out_dir;
  read_field(j, "out_dir", out_dir);
  c.out_dir = out_dir;
  if (c.out_dir.empty()) throw ConfigError("config field 'out_dir': required");
  return c;
}

namespace {

std::string variance_csv(const Vector& eigenvalues, const ExplainedVariance& ev) {
  std::string text = "component,eigenvalue,ratio,cumulative\n";
  for (std::size_t k = 0; k < eigenvalues.size(); ++k)
    text += csv::join({std::to_string(k + 1), csv::format(eigenvalues[k]), csv::format(ev.ratios[k]),
                       csv::format(ev.cumulative[k])}) +
            "\n";
  return text;
}

std::string scores_csv(const Dataset& data, const Matrix& scores) {
  const std::size_t shown = std::min<std::size_t>(2, scores.cols());
  std::vector<std::string> header{"index", "label"};
  for (std::size_t k = 0; k < shown; ++k) header.push_back("pc" + std::to_string(k + 1));
  std::string text = csv::join(header) + "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::vector<std::string> row{std::to_string(i), data.class_names[static_cast<std::size_t>(data.labels[i])]};
    for (std::size_t k = 0; k < shown; ++k) row.push_back(csv::format(scores(i, k)));
    text += csv::join(row) + "\n";
  }
  return text;
}

}  // namespace

PcaRunResult run_pca(const PcaConfig& config) {
  Dataset data = load_csv(config.input, CsvSchema::by_name(config.schema));
  json summary;
  summary["schema_version"] = kResultsSchemaVersion;
  if (config.standardize) {
    auto [std_data, params] = standardize(data);
    data = std::move(std_data);
    summary["dropped_constant_columns"] = params.dropped;
  }
  if (config.q > data.dim())
    throw ConfigError("config field 'q': " + std::to_string(config.q) + " exceeds the feature dimension " +
                      std::to_string(data.dim()));
  ensure_dir(config.out_dir);
  summary["q"] = config.q;
  summary["rows"] = data.size();
  summary["features"] = data.dim();

  std::optional<PcaModel> batch;
  if (config.batch) {
    batch = fit_batch_pca(data.features, config.q);
    const ExplainedVariance ev = explained_variance(*batch);
    write_text(config.out_dir / "pca_batch.csv", variance_csv(batch->eigenvalues, ev));
    if (config.scores) write_text(config.out_dir / "scores_batch.csv", scores_csv(data, project(*batch, data.features)));
    summary["batch"] = {{"eigenvalues", batch->eigenvalues},
                        {"ratios", ev.ratios},
                        {"cumulative", ev.cumulative},
                        {"total_variance", batch->total_variance}};
  }
  if (config.streaming) {
    if (config.n0 < config.q + 1 || config.n0 > data.size())
      throw ConfigError("config field 'n0': must lie in [q + 1, n]");
    std::vector<std::size_t> order = iota_rows(data.size());
    Rng rng(config.seed);
    rng.shuffle(order);
    const Dataset stream = data.subset(order);
    StreamingPcaState state = init_streaming_pca(head_rows(stream.features, config.n0), config.q);
    for (std::size_t i = config.n0; i < stream.size(); ++i) ipca_update_in_place(state, stream.features.row(i));
    if (!(state.total_variance > 0.0)) throw NumericError("streaming PCA: total variance is zero");
    ExplainedVariance ev;
    double cum = 0.0;
    for (double lambda : state.eigenvalues) {
      ev.ratios.push_back(lambda / state.total_variance);
      cum += ev.ratios.back();
      ev.cumulative.push_back(cum);
    }
    write_text(config.out_dir / "pca_streaming.csv", variance_csv(state.eigenvalues, ev));
    if (config.scores)
      write_text(config.out_dir / "scores_streaming.csv",
                 scores_csv(data, project_rows(data.features, state.mean, state.basis)));
    summary["streaming"] = {{"eigenvalues", state.eigenvalues},
                            {"ratios", ev.ratios},
                            {"cumulative", ev.cumulative},
                            {"total_variance", state.total_variance},
                            {"n0", config.n0},
                            {"seed", config.seed}};
    if (batch) summary["max_principal_angle"] = max_principal_angle(batch->basis, state.basis);
  }
  write_text(config.out_dir / "pca_summary.json", summary.dump(2) + "\n");
  return {summary};
}

SynthConfig SynthConfig::from_json(const json& j) {
  reject_unknown_keys(j, {"out", "seed", "totals"}, "synth config");
  SynthConfig c;
  std::string out;
  read_field(j, "out", out);
  c.out = out;
  if (c.out.empty()) throw ConfigError("config field 'out': required");
  read_field(j, "seed", c.seed);
  read_field(j, "totals", c.totals);
  if (c.totals.size() != 3) throw ConfigError("config field 'totals': expected three class totals");
  for (std::size_t t : c.totals)
    if (t < 2) throw ConfigError("config field 'totals': every class needs at least 2 rows");
  return c;
}

void run_synth(const SynthConfig& config) {
  if (config.out.has_parent_path()) ensure_dir(config.out.parent_path());
  write_csv(config.out, synthetic_ctg_like(config.seed, config.totals), CsvSchema::ctg());
}

}  // namespace npc
