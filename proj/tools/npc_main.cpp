// npc: benchmark, tuning, PCA and data-generation commands over the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "npc/npc.h"

namespace {

using nlohmann::json;

int exit_code(npc_status s) {
  switch (s) {
    case NPC_OK: return 0;
    case NPC_ERR_ARGUMENT:
    case NPC_ERR_CONFIG: return 2;
    case NPC_ERR_DATA:
    case NPC_ERR_IO: return 3;
    case NPC_ERR_NUMERIC: return 4;
    case NPC_ERR_INTERNAL: return 1;
  }
  return 1;
}

int report(npc_status s) {
  if (s != NPC_OK) std::cerr << "npc: " << npc_last_error() << '\n';
  return exit_code(s);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw CLI::ValidationError("list", "not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw CLI::ValidationError("--config", e.what());
  }
}

// Flags shared by bench and tune-cgamma.
struct DataFlags {
  std::string config_file;
  std::string input;
  std::string schema;
  std::optional<std::size_t> q;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n0;
  std::string train_counts;
  std::optional<double> train_fraction;
  std::string c_gamma_grid;
  std::string kernel;
  bool no_standardize = false;
  bool streaming_projection = false;
  std::string out;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_file, "JSON config file; flags override its fields");
    app->add_option("--input", input, "input CSV");
    app->add_option("--schema", schema, "ctg, fetal_health or generic:<label column>");
    app->add_option("--q", q, "reduced dimension");
    app->add_option("--seed", seed, "master seed");
    app->add_option("--n0", n0, "head size of the online pipeline");
    app->add_option("--train-counts", train_counts, "per-class training counts, comma separated");
    app->add_option("--train-fraction", train_fraction, "per-class training fraction");
    app->add_option("--c-gamma-grid", c_gamma_grid, "c_gamma candidates, comma separated");
    app->add_option("--kernel", kernel, "kernel name");
    app->add_flag("--no-standardize", no_standardize, "skip feature standardization");
    app->add_flag("--streaming-projection", streaming_projection,
                  "project training rows with the basis current at their arrival");
    app->add_option("--out", out, "output directory");
  }

  json to_json() const {
    json j = load_config_file(config_file);
    if (!input.empty()) j["input"] = input;
    if (!schema.empty()) j["schema"] = schema;
    if (q) j["q"] = *q;
    if (seed) j["seed"] = *seed;
    if (n0) j["n0"] = *n0;
    if (!train_counts.empty()) {
      std::vector<std::size_t> counts;
      for (double v : parse_list(train_counts)) counts.push_back(static_cast<std::size_t>(v));
      j["train_counts"] = counts;
      j.erase("train_fraction");
    }
    if (train_fraction) {
      j["train_fraction"] = *train_fraction;
      j.erase("train_counts");
    }
    if (!c_gamma_grid.empty()) j["c_gamma_grid"] = parse_list(c_gamma_grid);
    if (!kernel.empty()) j["kernel"] = kernel;
    if (no_standardize) j["standardize"] = false;
    if (streaming_projection) j["streaming_projection"] = true;
    if (!out.empty()) j["out_dir"] = out;
    return j;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming nonparametric classification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(npc_version()));

  DataFlags bench_flags;
  std::string methods;
  std::optional<std::size_t> m;
  std::optional<std::size_t> offline_m;
  std::optional<std::size_t> offline_cv_folds;
  bool serial = false;
  std::optional<std::size_t> threads;
  std::vector<std::string> merge;
  CLI::App* bench = app.add_subcommand("bench", "replicated benchmark of the configured methods");
  bench_flags.add_to(bench);
  bench->add_option("--methods", methods, "comma-separated subset of lda,qda,knn,online,offline");
  bench->add_option("--m", m, "number of replications");
  bench->add_option("--offline-m", offline_m, "replications that also run the offline classifier");
  bench->add_option("--offline-cv-folds", offline_cv_folds, "k-fold bandwidth CV for the offline classifier (0: leave-one-out)");
  bench->add_flag("--serial", serial, "run every replication sequentially");
  bench->add_option("--threads", threads, "worker threads (default: NPC_THREADS or all cores)");
  bench->add_option("--merge-predictions", merge, "<label>:<csv> external predictions (index,predicted)");

  DataFlags tune_flags;
  CLI::App* tune = app.add_subcommand("tune-cgamma", "select c_gamma on the head of replication 1");
  tune_flags.add_to(tune);

  std::string pca_config;
  std::string pca_input;
  std::string pca_schema;
  std::optional<std::size_t> pca_q;
  std::string pca_mode;
  bool pca_no_standardize = false;
  bool pca_scores = false;
  std::optional<std::size_t> pca_n0;
  std::optional<std::uint64_t> pca_seed;
  std::string pca_out;
  CLI::App* pca = app.add_subcommand("pca", "explained variance of batch and/or streaming PCA");
  pca->add_option("--config", pca_config, "JSON config file; flags override its fields");
  pca->add_option("--input", pca_input, "input CSV");
  pca->add_option("--schema", pca_schema, "ctg, fetal_health or generic:<label column>");
  pca->add_option("--q", pca_q, "number of components");
  pca->add_option("--mode", pca_mode, "batch, streaming or both");
  pca->add_flag("--no-standardize", pca_no_standardize, "skip feature standardization");
  pca->add_flag("--scores", pca_scores, "write per-row scores on the first two components");
  pca->add_option("--n0", pca_n0, "head size of the streaming mode");
  pca->add_option("--seed", pca_seed, "stream order seed of the streaming mode");
  pca->add_option("--out", pca_out, "output directory");

  std::string synth_out;
  std::uint64_t synth_seed = 1;
  std::string synth_totals;
  CLI::App* synth = app.add_subcommand("synth", "write a synthetic data set in the CTG layout");
  synth->add_option("--out", synth_out, "output CSV")->required();
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--totals", synth_totals, "per-class row counts, comma separated");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (bench->parsed()) {
      json j = bench_flags.to_json();
      if (!methods.empty()) j["methods"] = methods;
      if (m) j["m"] = *m;
      if (offline_m) j["offline_m"] = *offline_m;
      if (offline_cv_folds) j["offline_cv_folds"] = *offline_cv_folds;
      if (serial) j["serial"] = true;
      if (threads) j["threads"] = *threads;
      if (!merge.empty()) j["merge_predictions"] = merge;
      const npc_status s = npc_bench_run(j.dump().c_str());
      if (s == NPC_OK) std::cout << "wrote results to " << j.value("out_dir", std::string()) << '\n';
      return report(s);
    }
    if (tune->parsed()) {
      const json j = tune_flags.to_json();
      double best = 0.0;
      const npc_status s = npc_tune_cgamma_run(j.dump().c_str(), &best);
      if (s == NPC_OK) std::cout << "c_gamma " << json(best).dump() << '\n';
      return report(s);
    }
    if (pca->parsed()) {
      json j = load_config_file(pca_config);
      if (!pca_input.empty()) j["input"] = pca_input;
      if (!pca_schema.empty()) j["schema"] = pca_schema;
      if (pca_q) j["q"] = *pca_q;
      if (!pca_mode.empty()) j["mode"] = pca_mode;
      if (pca_no_standardize) j["standardize"] = false;
      if (pca_scores) j["scores"] = true;
      if (pca_n0) j["n0"] = *pca_n0;
      if (pca_seed) j["seed"] = *pca_seed;
      if (!pca_out.empty()) j["out_dir"] = pca_out;
      return report(npc_pca_run(j.dump().c_str()));
    }
    if (synth->parsed()) {
      json j{{"out", synth_out}, {"seed", synth_seed}};
      if (!synth_totals.empty()) {
        std::vector<std::size_t> totals;
        for (double v : parse_list(synth_totals)) totals.push_back(static_cast<std::size_t>(v));
        j["totals"] = totals;
      }
      return report(npc_synth_run(j.dump().c_str()));
    }
  } catch (const CLI::Error& e) {
    std::cerr << "npc: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "npc: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
