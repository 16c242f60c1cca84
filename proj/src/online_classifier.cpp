#include "npc/online_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "npc/error.hpp"

namespace npc {

namespace {

// The n-dependent factors of θ_n, shared by every query at one stream step.
struct StepFactors {
  double decay;  // n^(−4/(d+4))
  double scale;  // n^(1/(d+4))

  StepFactors(std::size_t n, std::size_t d_eff) {
    const double dn = static_cast<double>(std::max<std::size_t>(n, 1));
    const double d = static_cast<double>(d_eff);
    decay = std::pow(dn, -4.0 / (d + 4.0));
    scale = std::pow(dn, 1.0 / (d + 4.0));
  }

  double theta(double c_gamma, KernelId kernel, double distance) const {
    return std::clamp(c_gamma * decay * kernel_value(kernel, scale * distance), 0.0, 1.0);
  }
};

}  // namespace

double step_size(const StepSchedule& sched, std::size_t n, double distance) {
  return StepFactors(n, sched.d_eff).theta(sched.c_gamma, sched.kernel, distance);
}

void OnlinePosteriorState::blend(std::size_t query, double theta, int label) {
  auto row = estimates.row(query);
  for (std::size_t g = 0; g < row.size(); ++g) {
    const double target = static_cast<std::size_t>(label) == g ? 1.0 : 0.0;
    row[g] += theta * (target - row[g]);
  }
}

OnlinePosteriorState init_online(const Dataset& head, const Matrix& queries, KernelId kernel,
                                  const std::vector<BandwidthParams>& head_bandwidth) {
  if (queries.rows() == 0) throw ConfigError("init_online: no query points");
  if (head.size() < 2) throw DataError("init_online: head needs at least 2 observations");
  if (queries.cols() != head.dim()) throw DataError("init_online: query dimension mismatch");
  const OfflineClassifier offline(head, head_bandwidth, kernel);
  OnlinePosteriorState state;
  state.queries = queries;
  state.estimates = Matrix(queries.rows(), head.num_classes());
  state.count = head.size();
  for (std::size_t k = 0; k < queries.rows(); ++k) {
    const auto p = nw_posterior(offline, queries.row(k));
    std::copy(p.begin(), p.end(), state.estimates.row(k).begin());
  }
  return state;
}

OnlinePosteriorState init_online(const Dataset& head, const Matrix& queries, KernelId kernel,
                                 const BandwidthParams& shared_bandwidth) {
  return init_online(head, queries, kernel, std::vector<BandwidthParams>(head.num_classes(), shared_bandwidth));
}

void update_posterior(OnlinePosteriorState& state, const StepSchedule& sched, std::span<const double> x, int y) {
  if (x.size() != state.queries.cols()) throw DataError("update_posterior: observation dimension mismatch");
  if (y < 0 || static_cast<std::size_t>(y) >= state.num_classes()) throw DataError("update_posterior: unknown class");
  const std::size_t n = state.count + 1;
  const StepFactors f(n, sched.d_eff);
  // K vanishes once scale·distance >= 1, so clearly farther queries are
  // skipped; the slack leaves the boundary decision to the kernel itself.
  const double reach2 = (1.0 + 1e-9) / (f.scale * f.scale);
  for (std::size_t k = 0; k < state.num_queries(); ++k) {
    const double dist2 = squared_distance(state.queries.row(k), x);
    if (dist2 > reach2) continue;
    const double theta = f.theta(sched.c_gamma, sched.kernel, std::sqrt(dist2));
    if (theta > 0.0) state.blend(k, theta, y);
  }
  state.count = n;
}

std::size_t classify_online(const OnlinePosteriorState& state, std::size_t query) {
  if (query >= state.num_queries())
    throw ConfigError("classify_online: query index " + std::to_string(query) + " out of range");
  return argmax(state.estimates.row(query));
}

std::vector<double> default_c_gamma_grid() {
  std::vector<double> grid;
  const double lo = std::log(0.5);
  const double hi = std::log(120.0);
  for (int i = 0; i < 60; ++i) grid.push_back(std::exp(lo + (hi - lo) * i / 59.0));
  return grid;
}

CGammaTuning tune_c_gamma(const Dataset& head, const Matrix& initial, const std::vector<double>& grid,
                          std::size_t q, KernelId kernel) {
  if (grid.empty()) throw ConfigError("c_gamma grid is empty");
  for (double c : grid)
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("c_gamma candidates must be finite and positive");
  const std::size_t n0 = head.size();
  const std::size_t g_count = head.num_classes();
  {
    auto counts = head.class_counts();
    if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2)
      throw DataError("c_gamma tuning needs at least 2 classes in the head");
  }
  if (initial.rows() != n0 || initial.cols() != g_count)
    throw ConfigError("c_gamma tuning: initial estimates must be head size x number of classes");

  Matrix dist(n0, n0);
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t k = i + 1; k < n0; ++k)
      dist(i, k) = dist(k, i) = std::sqrt(squared_distance(head.features.row(i), head.features.row(k)));

  std::vector<StepFactors> factors;
  for (std::size_t i = 0; i < n0; ++i) factors.emplace_back(i + 1, q);

  CGammaTuning out;
  out.candidates = grid;
  for (double c_gamma : grid) {
    Matrix est = initial;
    std::size_t errors = 0;
    for (std::size_t i = 0; i < n0; ++i) {
      if (argmax(est.row(i)) != static_cast<std::size_t>(head.labels[i])) ++errors;
      const StepFactors& f = factors[i];
      for (std::size_t k = 0; k < n0; ++k) {
        if (f.scale * dist(i, k) >= 1.0) continue;
        const double theta = f.theta(c_gamma, kernel, dist(i, k));
        if (theta == 0.0) continue;
        auto row = est.row(k);
        for (std::size_t g = 0; g < g_count; ++g)
          row[g] += theta * ((static_cast<std::size_t>(head.labels[i]) == g ? 1.0 : 0.0) - row[g]);
      }
    }
    out.head_msr.push_back(static_cast<double>(errors) / static_cast<double>(n0));
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (out.head_msr[k] < out.head_msr[best] || (out.head_msr[k] == out.head_msr[best] && grid[k] < grid[best]))
      best = k;
  }
  out.best = grid[best];
  return out;
}

CGammaTuning tune_c_gamma(const Dataset& head, const std::vector<double>& grid, std::size_t q, KernelId kernel,
                          const BandwidthGrid& bandwidth_grid) {
  const auto bw = loo_cv_select_all(head, bandwidth_grid, kernel);
  return tune_c_gamma(head, loo_posteriors(head, bw, kernel), grid, q, kernel);
}

std::string snapshot_to_json(const OnlineSnapshot& snap) {
  using nlohmann::json;
  json j;
  j["schema_version"] = OnlineSnapshot::schema_version;
  j["count"] = snap.state.count;
  json queries = json::array();
  for (std::size_t k = 0; k < snap.state.num_queries(); ++k) {
    auto r = snap.state.queries.row(k);
    queries.push_back(std::vector<double>(r.begin(), r.end()));
  }
  json estimates = json::array();
  for (std::size_t k = 0; k < snap.state.num_queries(); ++k) {
    auto r = snap.state.estimates.row(k);
    estimates.push_back(std::vector<double>(r.begin(), r.end()));
  }
  j["queries"] = std::move(queries);
  j["estimates"] = std::move(estimates);
  j["schedule"] = {{"c_gamma", snap.schedule.c_gamma},
                   {"d_eff", snap.schedule.d_eff},
                   {"kernel", kernel_name(snap.schedule.kernel)}};
  return j.dump();
}

OnlineSnapshot snapshot_from_json(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("snapshot: ") + e.what());
  }
  try {
    if (j.at("schema_version").get<int>() != OnlineSnapshot::schema_version)
      throw DataError("snapshot: unsupported schema_version");
    OnlineSnapshot snap;
    snap.state.count = j.at("count").get<std::size_t>();
    const auto& queries = j.at("queries");
    const auto& estimates = j.at("estimates");
    if (queries.size() != estimates.size()) throw DataError("snapshot: queries and estimates differ in length");
    for (std::size_t k = 0; k < queries.size(); ++k) {
      snap.state.queries.append_row(queries[k].get<std::vector<double>>());
      snap.state.estimates.append_row(estimates[k].get<std::vector<double>>());
    }
    for (double v : snap.state.estimates.data())
      if (!(v >= 0.0 && v <= 1.0)) throw DataError("snapshot: estimate outside [0,1]");
    const auto& s = j.at("schedule");
    snap.schedule.c_gamma = s.at("c_gamma").get<double>();
    snap.schedule.d_eff = s.at("d_eff").get<std::size_t>();
    snap.schedule.kernel = kernel_from_name(s.at("kernel").get<std::string>());
    return snap;
  } catch (const json::exception& e) {
    throw DataError(std::string("snapshot: ") + e.what());
  }
}

void save_snapshot(const std::filesystem::path& path, const OnlineSnapshot& snap) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << snapshot_to_json(snap) << '\n';
}

OnlineSnapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return snapshot_from_json(buf.str());
}

}  // namespace npc
