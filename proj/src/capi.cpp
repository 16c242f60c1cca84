#include "npc/npc.h"

#include <algorithm>
#include <memory>
#include <new>
#include <string>

#include <json.hpp>

#include "npc/bench.hpp"
#include "npc/dataset.hpp"
#include "npc/error.hpp"
#include "npc/kernel_smoothing.hpp"
#include "npc/online_classifier.hpp"
#include "npc/pca_batch.hpp"
#include "npc/pca_online.hpp"

struct npc_dataset {
  npc::Dataset data;
};

struct npc_pca {
  npc::PcaModel model;
};

struct npc_stream_pca {
  npc::StreamingPcaState state;
};

struct npc_offline {
  npc::OfflineClassifier clf;
};

struct npc_online {
  npc::OnlineSnapshot snap;
};

namespace {

thread_local std::string last_error;

struct ArgumentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename F>
npc_status guarded(F&& body) {
  try {
    body();
    return NPC_OK;
  } catch (const ArgumentError& e) {
    last_error = e.what();
    return NPC_ERR_ARGUMENT;
  } catch (const npc::Error& e) {
    last_error = e.what();
    return static_cast<npc_status>(static_cast<int>(e.kind()));
  } catch (const nlohmann::json::exception& e) {
    last_error = std::string("configuration: ") + e.what();
    return NPC_ERR_CONFIG;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return NPC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return NPC_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return NPC_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw ArgumentError(what);
}

template <typename T>
void require_ptr(const T* p, const char* name) {
  if (!p) throw ArgumentError(std::string(name) + " is null");
}

npc::Matrix rows_from(const double* values, std::size_t n, std::size_t d) {
  npc::Matrix m(n, d);
  std::copy_n(values, n * d, m.data().begin());
  return m;
}

nlohmann::json parse_config(const char* text) {
  require_ptr(text, "config_json");
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw npc::ConfigError(std::string("invalid JSON configuration: ") + e.what());
  }
}

}  // namespace

extern "C" {

const char* npc_version(void) { return "1.0.0"; }

const char* npc_last_error(void) { return last_error.c_str(); }

npc_status npc_dataset_load(const char* path, const char* schema, npc_dataset** out) {
  return guarded([&] {
    require_ptr(path, "path");
    require_ptr(out, "out");
    const std::string name = schema ? schema : "ctg";
    *out = new npc_dataset{npc::load_csv(path, npc::CsvSchema::by_name(name))};
  });
}

npc_status npc_dataset_from_arrays(const double* features, const int* labels, size_t n, size_t d,
                                   size_t num_classes, npc_dataset** out) {
  return guarded([&] {
    require_ptr(features, "features");
    require_ptr(labels, "labels");
    require_ptr(out, "out");
    require(n >= 1 && d >= 1, "n and d must be positive");
    npc::Dataset ds;
    ds.features = rows_from(features, n, d);
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] < 1 || static_cast<std::size_t>(labels[i]) > num_classes)
        throw npc::DataError("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                             " is outside 1.." + std::to_string(num_classes));
      ds.labels.push_back(labels[i] - 1);
    }
    for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("x" + std::to_string(j + 1));
    for (std::size_t g = 0; g < num_classes; ++g) ds.class_names.push_back(std::to_string(g + 1));
    ds.validate();
    *out = new npc_dataset{std::move(ds)};
  });
}

npc_status npc_dataset_standardize(const npc_dataset* in, npc_dataset** out) {
  return guarded([&] {
    require_ptr(in, "in");
    require_ptr(out, "out");
    *out = new npc_dataset{npc::standardize(in->data).first};
  });
}

size_t npc_dataset_rows(const npc_dataset* ds) { return ds ? ds->data.size() : 0; }
size_t npc_dataset_dim(const npc_dataset* ds) { return ds ? ds->data.dim() : 0; }
size_t npc_dataset_classes(const npc_dataset* ds) { return ds ? ds->data.num_classes() : 0; }

npc_status npc_dataset_row(const npc_dataset* ds, size_t i, double* features, size_t d, int* label) {
  return guarded([&] {
    require_ptr(ds, "ds");
    require(i < ds->data.size(), "row index out of range");
    require(d == ds->data.dim(), "d does not match the dataset");
    if (features) std::copy_n(ds->data.features.row(i).begin(), d, features);
    if (label) *label = ds->data.labels[i] + 1;
  });
}

void npc_dataset_free(npc_dataset* ds) { delete ds; }

npc_status npc_pca_fit(const npc_dataset* ds, size_t q, npc_pca** out) {
  return guarded([&] {
    require_ptr(ds, "ds");
    require_ptr(out, "out");
    *out = new npc_pca{npc::fit_batch_pca(ds->data.features, q)};
  });
}

npc_status npc_pca_project(const npc_pca* pca, const double* x, size_t d, double* scores, size_t q) {
  return guarded([&] {
    require_ptr(pca, "pca");
    require_ptr(x, "x");
    require_ptr(scores, "scores");
    require(d == pca->model.dim() && q == pca->model.rank(), "dimension mismatch");
    const npc::Vector z = npc::project(pca->model, std::span<const double>(x, d));
    std::copy(z.begin(), z.end(), scores);
  });
}

npc_status npc_pca_explained(const npc_pca* pca, double* ratios, double* cumulative, size_t q) {
  return guarded([&] {
    require_ptr(pca, "pca");
    require(q == pca->model.rank(), "q does not match the model");
    const auto ev = npc::explained_variance(pca->model);
    if (ratios) std::copy(ev.ratios.begin(), ev.ratios.end(), ratios);
    if (cumulative) std::copy(ev.cumulative.begin(), ev.cumulative.end(), cumulative);
  });
}

npc_status npc_pca_reduce(const npc_pca* pca, const npc_dataset* ds, npc_dataset** out) {
  return guarded([&] {
    require_ptr(pca, "pca");
    require_ptr(ds, "ds");
    require_ptr(out, "out");
    *out = new npc_dataset{ds->data.with_features(npc::project(pca->model, ds->data.features))};
  });
}

void npc_pca_free(npc_pca* pca) { delete pca; }

npc_status npc_stream_pca_init(const double* head, size_t n0, size_t d, size_t q, npc_stream_pca** out) {
  return guarded([&] {
    require_ptr(head, "head");
    require_ptr(out, "out");
    require(d >= 1, "d must be positive");
    *out = new npc_stream_pca{npc::init_streaming_pca(rows_from(head, n0, d), q)};
  });
}

npc_status npc_stream_pca_update(npc_stream_pca* s, const double* x, size_t d) {
  return guarded([&] {
    require_ptr(s, "s");
    require_ptr(x, "x");
    require(d == s->state.dim(), "d does not match the state");
    npc::ipca_update_in_place(s->state, std::span<const double>(x, d));
  });
}

npc_status npc_stream_pca_basis(const npc_stream_pca* s, double* basis, size_t d, size_t q) {
  return guarded([&] {
    require_ptr(s, "s");
    require_ptr(basis, "basis");
    require(d == s->state.dim() && q == s->state.rank(), "dimension mismatch");
    std::copy(s->state.basis.data().begin(), s->state.basis.data().end(), basis);
  });
}

npc_status npc_stream_pca_eigenvalues(const npc_stream_pca* s, double* values, size_t q) {
  return guarded([&] {
    require_ptr(s, "s");
    require_ptr(values, "values");
    require(q == s->state.rank(), "q does not match the state");
    std::copy(s->state.eigenvalues.begin(), s->state.eigenvalues.end(), values);
  });
}

npc_status npc_stream_pca_project(const npc_stream_pca* s, const double* x, size_t d, double* scores, size_t q) {
  return guarded([&] {
    require_ptr(s, "s");
    require_ptr(x, "x");
    require_ptr(scores, "scores");
    require(d == s->state.dim() && q == s->state.rank(), "dimension mismatch");
    const npc::Matrix z = npc::project_rows(rows_from(x, 1, d), s->state.mean, s->state.basis);
    std::copy_n(z.row(0).begin(), q, scores);
  });
}

size_t npc_stream_pca_count(const npc_stream_pca* s) { return s ? s->state.count : 0; }

void npc_stream_pca_free(npc_stream_pca* s) { delete s; }

npc_status npc_offline_fit(const npc_dataset* train, npc_offline** out) {
  return guarded([&] {
    require_ptr(train, "train");
    require_ptr(out, "out");
    *out = new npc_offline{npc::OfflineClassifier::fit(train->data, npc::default_bandwidth_grid())};
  });
}

npc_status npc_offline_posterior(const npc_offline* clf, const double* x, size_t d, double* posterior,
                                 size_t num_classes) {
  return guarded([&] {
    require_ptr(clf, "clf");
    require_ptr(x, "x");
    require_ptr(posterior, "posterior");
    require(d == clf->clf.train().dim() && num_classes == clf->clf.num_classes(), "dimension mismatch");
    const npc::Vector p = npc::nw_posterior(clf->clf, std::span<const double>(x, d));
    std::copy(p.begin(), p.end(), posterior);
  });
}

npc_status npc_offline_classify(const npc_offline* clf, const double* x, size_t d, int* label) {
  return guarded([&] {
    require_ptr(clf, "clf");
    require_ptr(x, "x");
    require_ptr(label, "label");
    require(d == clf->clf.train().dim(), "dimension mismatch");
    *label = static_cast<int>(npc::classify_offline(clf->clf, std::span<const double>(x, d))) + 1;
  });
}

void npc_offline_free(npc_offline* clf) { delete clf; }

npc_status npc_online_tune_c_gamma(const npc_dataset* head, const double* grid, size_t grid_len, double* best) {
  return guarded([&] {
    require_ptr(head, "head");
    require_ptr(best, "best");
    std::vector<double> candidates = grid ? std::vector<double>(grid, grid + grid_len) : npc::default_c_gamma_grid();
    *best = npc::tune_c_gamma(head->data, candidates, head->data.dim()).best;
  });
}

npc_status npc_online_init(const npc_dataset* head, const double* queries, size_t m, size_t d, double c_gamma,
                           npc_online** out) {
  return guarded([&] {
    require_ptr(head, "head");
    require_ptr(queries, "queries");
    require_ptr(out, "out");
    if (!(c_gamma > 0.0)) throw npc::ConfigError("c_gamma must be positive");
    const auto bw = npc::loo_cv_select_all(head->data, npc::default_bandwidth_grid());
    npc::OnlineSnapshot snap;
    snap.state = npc::init_online(head->data, rows_from(queries, m, d), npc::KernelId::Epanechnikov, bw);
    snap.schedule = npc::StepSchedule{c_gamma, d, npc::KernelId::Epanechnikov};
    *out = new npc_online{std::move(snap)};
  });
}

npc_status npc_online_update(npc_online* state, const double* x, size_t d, int label) {
  return guarded([&] {
    require_ptr(state, "state");
    require_ptr(x, "x");
    npc::update_posterior(state->snap.state, state->snap.schedule, std::span<const double>(x, d), label - 1);
  });
}

npc_status npc_online_posterior(const npc_online* state, size_t query, double* posterior, size_t num_classes) {
  return guarded([&] {
    require_ptr(state, "state");
    require_ptr(posterior, "posterior");
    require(num_classes == state->snap.state.num_classes(), "num_classes does not match the state");
    if (query >= state->snap.state.num_queries()) throw npc::ConfigError("unknown query index");
    const auto row = state->snap.state.estimates.row(query);
    std::copy(row.begin(), row.end(), posterior);
  });
}

npc_status npc_online_classify(const npc_online* state, size_t query, int* label) {
  return guarded([&] {
    require_ptr(state, "state");
    require_ptr(label, "label");
    *label = static_cast<int>(npc::classify_online(state->snap.state, query)) + 1;
  });
}

size_t npc_online_count(const npc_online* state) { return state ? state->snap.state.count : 0; }

npc_status npc_online_save(const npc_online* state, const char* path) {
  return guarded([&] {
    require_ptr(state, "state");
    require_ptr(path, "path");
    npc::save_snapshot(path, state->snap);
  });
}

npc_status npc_online_load(const char* path, npc_online** out) {
  return guarded([&] {
    require_ptr(path, "path");
    require_ptr(out, "out");
    *out = new npc_online{npc::load_snapshot(path)};
  });
}

void npc_online_free(npc_online* state) { delete state; }

npc_status npc_bench_run(const char* config_json) {
  return guarded([&] { npc::run_bench(npc::BenchConfig::from_json(parse_config(config_json))); });
}

npc_status npc_tune_cgamma_run(const char* config_json, double* best) {
  return guarded([&] {
    const auto result = npc::run_tune_cgamma(npc::BenchConfig::from_json(parse_config(config_json)));
    if (best) *best = result.best;
  });
}

npc_status npc_pca_run(const char* config_json) {
  return guarded([&] { npc::run_pca(npc::PcaConfig::from_json(parse_config(config_json))); });
}

npc_status npc_synth_run(const char* config_json) {
  return guarded([&] { npc::run_synth(npc::SynthConfig::from_json(parse_config(config_json))); });
}

}  // extern "C"
