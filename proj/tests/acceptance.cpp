// Acceptance runner: one PASS/FAIL line per criterion.
//
//   acceptance [--only <id>] [--cli <path to npc>]
//
// The CTG recordings are read from $NPC_CTG_CSV or data/ctg.csv (CTG or
// fetal_health layout). Criteria that need them fail when neither exists.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "npc/bench.hpp"
#include "npc/csv.hpp"
#include "npc/dataset.hpp"
#include "npc/error.hpp"
#include "npc/evaluation.hpp"
#include "npc/kernel_smoothing.hpp"
#include "npc/linalg.hpp"
#include "npc/online_classifier.hpp"
#include "npc/pca_batch.hpp"
#include "npc/pca_online.hpp"

namespace fs = std::filesystem;
using namespace npc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 2) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

std::string sci(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::scientific << v;
  return os.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("npc_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------- CTG data

struct CtgSource {
  fs::path path;
  std::string schema;
};

std::optional<CtgSource> find_ctg() {
  std::vector<fs::path> candidates;
  if (const char* env = std::getenv("NPC_CTG_CSV"); env && *env) candidates.emplace_back(env);
  candidates.emplace_back("data/ctg.csv");
  for (const auto& p : candidates) {
    if (!fs::exists(p)) continue;
    for (const char* schema : {"ctg", "fetal_health"}) {
      try {
        (void)load_csv(p, CsvSchema::by_name(schema));
        return CtgSource{p, schema};
      } catch (const Error&) {
      }
    }
  }
  return std::nullopt;
}

const char* kMissingCtg = "CTG data not found (set NPC_CTG_CSV or place it at data/ctg.csv)";

// Same-scale stand-in for the timing and bounds criteria when CTG is absent.
CtgSource synthetic_source() {
  static const CtgSource src = [] {
    const auto dir = scratch("synthetic");
    write_csv(dir / "ctg_like.csv", synthetic_ctg_like(2126), CsvSchema::ctg());
    return CtgSource{dir / "ctg_like.csv", "ctg"};
  }();
  return src;
}

BenchConfig ctg_config(const CtgSource& src) {
  BenchConfig c;
  c.input = src.path;
  c.schema = src.schema;
  return c;
}

std::map<Method, double> medians(const BenchReport& report, const std::vector<Method>& methods) {
  std::map<Method, double> out;
  for (Method m : methods) {
    std::vector<double> rates;
    for (const auto& rep : report.replications)
      if (const auto* o = rep.find(m); o && o->ok) rates.push_back(msr(rep.test_labels, o->predicted));
    if (!rates.empty()) out[m] = quantile(rates, 0.5);
  }
  return out;
}

std::optional<std::map<Method, double>> benchmark_medians(std::string& why) {
  const auto src = find_ctg();
  if (!src) {
    why = kMissingCtg;
    return std::nullopt;
  }
  BenchConfig c = ctg_config(*src);
  c.replications = 100;
  c.offline_replications = 20;
  const Dataset data = load_csv(c.input, CsvSchema::by_name(c.schema));
  return medians(replicate(data, c), c.methods);
}

// -------------------------------------------------------------- criteria

Outcome criterion_1() {
  std::string why;
  const auto med = benchmark_medians(why);
  if (!med) return {false, why};
  const std::map<Method, double> published{{Method::Lda, 14.77},
                                           {Method::Qda, 15.78},
                                           {Method::Knn, 14.24},
                                           {Method::Online, 11.92},
                                           {Method::Offline, 11.54}};
  bool ok = true;
  std::string detail;
  for (const auto& [m, target] : published) {
    const auto it = med->find(m);
    const double got = it == med->end() ? NAN : it->second * 100.0;
    const bool in_band = std::abs(got - target) <= 1.5;
    ok = ok && in_band;
    detail += method_name(m) + "=" + fmt(got) + "% (target " + fmt(target) + "±1.5)" + (in_band ? "" : " OUT") + "; ";
  }
  return {ok, detail};
}

Outcome criterion_2() {
  std::string why;
  const auto med = benchmark_medians(why);
  if (!med) return {false, why};
  auto get = [&](Method m) { return med->count(m) ? med->at(m) : NAN; };
  const double on = get(Method::Online), knn = get(Method::Knn), qda = get(Method::Qda), off = get(Method::Offline);
  const bool ok = on < knn && knn < qda && off <= knn;
  return {ok, "online " + fmt(on * 100) + " < knn " + fmt(knn * 100) + " < qda " + fmt(qda * 100) + ", offline " +
                  fmt(off * 100) + " <= knn"};
}

Outcome criterion_3() {
  const auto src = find_ctg();
  if (!src) return {false, kMissingCtg};
  const Dataset data = standardize(load_csv(src->path, CsvSchema::by_name(src->schema))).first;
  const auto ev = explained_variance(fit_batch_pca(data.features, 5));
  const double pc2 = ev.cumulative[1], pc5 = ev.cumulative[4];
  const bool ok = pc2 >= 0.41 && pc2 <= 0.48 && pc5 > 0.60;
  return {ok, "PC1-2 " + fmt(pc2 * 100) + "% in [41,48], PC1-5 " + fmt(pc5 * 100) + "% > 60"};
}

Outcome criterion_4() {
  const auto ctg = find_ctg();
  const CtgSource src = ctg ? *ctg : synthetic_source();
  BenchConfig c = ctg_config(src);
  c.methods = {Method::Online, Method::Offline};
  c.serial = true;
  const Dataset data = load_csv(c.input, CsvSchema::by_name(c.schema));
  const ReplicationResult rep = run_replication(data, c, 1);
  const auto* on = rep.find(Method::Online);
  const auto* off = rep.find(Method::Offline);
  if (!on->ok || !off->ok) return {false, "method failed: " + on->error + off->error};
  const double ratio = off->seconds / on->seconds;
  return {ratio >= 5.0, std::string(ctg ? "CTG" : "synthetic CTG-scale stand-in") + ": offline " +
                            fmt(off->seconds, 3) + " s / online " + fmt(on->seconds, 3) + " s = " + fmt(ratio) +
                            " >= 5"};
}

Outcome criterion_5a() {
  Rng rng(501);
  double worst = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t d = 1 + rng.below(8);
    const std::size_t n = d + 2 + rng.below(499 - d);
    Matrix stream(n, d);
    for (auto& v : stream.data()) v = 3.0 * rng.normal();
    Matrix head(d + 1, d);
    for (std::size_t i = 0; i <= d; ++i)
      for (std::size_t j = 0; j < d; ++j) head(i, j) = stream(i, j);
    auto state = init_streaming_pca(head, d);
    auto exact = CovRecursionState::from_first(stream.row(0));
    for (std::size_t i = 1; i <= d; ++i) exact = update_cov_recursion(exact, stream.row(i));
    for (std::size_t i = d + 1; i < n; ++i) {
      ipca_update_in_place(state, stream.row(i));
      exact = update_cov_recursion(exact, stream.row(i));
      const Matrix approx = state.approximation();
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) worst = std::max(worst, std::abs(approx(a, b) - exact.cov(a, b)));
    }
  }
  return {worst <= 1e-8, "max entry deviation " + sci(worst) + " <= 1e-8 over 40 streams (n <= 500, d <= 8)"};
}

Outcome criterion_5b() {
  Rng rng(502);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t g_count = 2 + rng.below(3);
    OnlinePosteriorState s;
    s.queries = Matrix(1, 1);
    s.estimates = Matrix(1, g_count);
    std::vector<double> counts(g_count, 0.0);
    for (std::size_t n = 1; n <= 1000; ++n) {
      const int y = static_cast<int>(rng.below(g_count));
      counts[static_cast<std::size_t>(y)] += 1.0;
      s.blend(0, 1.0 / static_cast<double>(n), y);
      for (std::size_t g = 0; g < g_count; ++g)
        worst = std::max(worst, std::abs(s.estimates(0, g) - counts[g] / static_cast<double>(n)));
    }
  }
  return {worst <= 1e-12, "max deviation from running frequency " + sci(worst) + " <= 1e-12 (n = 1000)"};
}

Outcome criterion_5c() {
  Rng rng(503);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t g_count = 2 + rng.below(3);
    const std::size_t n = 1 + rng.below(20);
    const std::size_t d = 1 + rng.below(5);
    Dataset train;
    train.features = Matrix(n, d);
    for (auto& v : train.features.data()) v = rng.normal();
    for (std::size_t i = 0; i < n; ++i) train.labels.push_back(static_cast<int>(rng.below(g_count)));
    for (std::size_t j = 0; j < d; ++j) train.feature_names.push_back("x" + std::to_string(j));
    for (std::size_t g = 0; g < g_count; ++g) train.class_names.push_back("c" + std::to_string(g));
    std::vector<BandwidthParams> bw;
    for (std::size_t g = 0; g < g_count; ++g) bw.push_back({0.1 + 9.8 * rng.uniform(), 0.02 + 0.96 * rng.uniform()});
    const OfflineClassifier clf(train, bw);
    Vector x(d);
    for (auto& v : x) v = rng.normal();
    const Vector fast = nw_posterior(clf, x);

    double max_dist = 0.0;
    Vector dist(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += (train.features(i, j) - x[j]) * (train.features(i, j) - x[j]);
      dist[i] = std::sqrt(s);
      max_dist = std::max(max_dist, dist[i]);
    }
    for (std::size_t g = 0; g < g_count; ++g) {
      const double h = bw[g].c * max_dist * std::pow(static_cast<double>(n), -bw[g].nu);
      double num = 0.0, den = 0.0, count = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double u = h > 0.0 ? dist[i] / h : 0.0;
        const double w = u < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
        den += w;
        if (train.labels[i] == static_cast<int>(g)) {
          num += w;
          count += 1.0;
        }
      }
      const double naive = den > 0.0 ? num / den : count / static_cast<double>(n);
      worst = std::max(worst, std::abs(naive - fast[g]));
    }
  }
  return {worst <= 1e-12, "max deviation from the naive weighted average " + sci(worst) + " <= 1e-12 (200 instances)"};
}

Outcome criterion_5d() {
  Rng rng(504);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(80);
    const std::uint64_t levels = 1 + rng.below(12);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.below(levels)) / static_cast<double>(levels) + (levels > 10 ? rng.uniform() : 0);
      labels[i] = static_cast<int>(rng.below(3));
    }
    labels[0] = 1;
    labels[1] = 2;
    // Pairwise count computed here rather than through the library.
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (labels[i] == 1 && labels[j] != 1) {
          pairs += 1.0;
          wins += scores[i] > scores[j] ? 1.0 : scores[i] == scores[j] ? 0.5 : 0.0;
        }
    worst = std::max(worst, std::abs(roc_auc(scores, labels, 1).auc - wins / pairs));
  }
  return {worst <= 1e-12, "max |trapezoid AUC - Mann-Whitney| " + sci(worst) + " <= 1e-12 (200 instances)"};
}

Outcome criterion_5e() {
  const auto ctg = find_ctg();
  const CtgSource src = ctg ? *ctg : synthetic_source();
  BenchConfig c = ctg_config(src);
  c.methods = {Method::Online, Method::Offline};
  c.serial = true;
  const Dataset data = load_csv(c.input, CsvSchema::by_name(c.schema));
  const ReplicationResult rep = run_replication(data, c, 1);
  double lo = 1.0, hi = 0.0;
  std::size_t checked = 0;
  for (const auto& o : rep.outcomes) {
    if (!o.ok) return {false, method_name(o.method) + " failed: " + o.error};
    for (double v : o.scores.data()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      ++checked;
    }
  }
  const bool bounded = lo >= 0.0 && hi <= 1.0;

  // Shared bandwidth and shared step: both estimators sum to one per query.
  const Dataset z = standardize(data).first;
  const auto pca = fit_batch_pca(z.features, 5);
  const Dataset reduced = z.with_features(project(pca, z.features));
  std::vector<std::size_t> head_rows, stream_rows;
  for (std::size_t i = 0; i < reduced.size(); ++i) (i < 300 ? head_rows : stream_rows).push_back(i);
  const Dataset head = reduced.subset(head_rows);
  Matrix queries(200, 5);
  for (std::size_t k = 0; k < 200; ++k)
    for (std::size_t j = 0; j < 5; ++j) queries(k, j) = reduced.features(stream_rows[k * 7], j);
  auto state = init_online(head, queries, KernelId::Epanechnikov, BandwidthParams{2.0, 0.2});
  double worst = 0.0;
  auto track = [&] {
    for (std::size_t k = 0; k < state.num_queries(); ++k) {
      double sum = 0.0;
      for (std::size_t g = 0; g < state.num_classes(); ++g) sum += state.estimates(k, g);
      worst = std::max(worst, std::abs(sum - 1.0));
    }
  };
  track();
  const StepSchedule sched{61.3, 5, KernelId::Epanechnikov};
  for (std::size_t i : stream_rows) {
    update_posterior(state, sched, reduced.features.row(i), reduced.labels[i]);
    track();
  }
  const bool sums = worst <= 1e-9;
  return {bounded && sums, std::string(ctg ? "CTG" : "synthetic CTG-scale stand-in") + ": " +
                               std::to_string(checked) + " estimates in [" + fmt(lo, 6) + ", " + fmt(hi, 6) +
                               "]; shared-bandwidth/shared-step sum-to-one deviation " + sci(worst) + " <= 1e-9"};
}

Outcome criterion_5f() {
  Rng rng(506);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 1 + rng.below(21);
    const double scale = std::pow(10.0, static_cast<double>(rng.below(5)) - 2.0);
    SymMatrix a(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i; j < m; ++j) a.set(i, j, scale * rng.normal());
    double amax = 0.0;
    for (double v : a.matrix().data()) amax = std::max(amax, std::abs(v));
    const auto e = sym_eigen(a);
    double resid = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) s += e.vectors(i, k) * e.values[k] * e.vectors(j, k);
        resid = std::max(resid, std::abs(s - a(i, j)));
      }
    worst = std::max(worst, resid / (1.0 + amax));
  }
  return {worst <= 1e-8, "max reconstruction residual / (1 + max|A|) " + sci(worst) + " <= 1e-8 (500 matrices, order <= 21)"};
}

std::string g_cli;

Outcome criterion_6() {
  if (g_cli.empty()) return {false, "--cli <path to npc> not given"};
  const auto ctg = find_ctg();
  const CtgSource src = ctg ? *ctg : synthetic_source();
  const auto dir = scratch("determinism");
  for (const char* run : {"a", "b"}) {
    const std::string cmd = "\"" + g_cli + "\" bench --input \"" + src.path.string() + "\" --schema " + src.schema +
                            " --methods lda,qda,knn,online --m 2 --seed 7 --out \"" + (dir / run).string() +
                            "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "bench run failed: " + cmd};
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const auto name = entry.path().filename().string();
    if (name == "timing.csv") continue;  // wall-clock seconds
    std::ifstream fa(entry.path(), std::ios::binary), fb(dir / "b" / name, std::ios::binary);
    const std::string a((std::istreambuf_iterator<char>(fa)), {}), b((std::istreambuf_iterator<char>(fb)), {});
    if (!fb || a != b) return {false, name + " differs between identical runs"};
    ++compared;
  }
  return {compared >= 5, std::to_string(compared) + " artifacts byte-identical across two seeded runs"};
}

}  // namespace

int main(int argc, char** argv) {
  std::optional<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      only = argv[++i];
    } else if (arg == "--cli" && i + 1 < argc) {
      g_cli = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--only <id>] [--cli <path>]\n";
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1", criterion_1},   {"2", criterion_2},   {"3", criterion_3},   {"4", criterion_4},
      {"5a", criterion_5a}, {"5b", criterion_5b}, {"5c", criterion_5c}, {"5d", criterion_5d},
      {"5e", criterion_5e}, {"5f", criterion_5f}, {"6", criterion_6}};

  bool all_pass = true;
  bool ran = false;
  for (const auto& [id, run] : criteria) {
    if (only && *only != id) continue;
    ran = true;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << o.detail << " [" << fmt(secs, 1)
              << " s]" << std::endl;
    all_pass = all_pass && o.pass;
  }
  if (!ran) {
    std::cerr << "unknown criterion '" << *only << "'\n";
    return 2;
  }
  return all_pass ? 0 : 1;
}
