/* C interface to the streaming nonparametric classification toolkit.
 *
 * Every function returns an npc_status. On failure the message is available
 * from npc_last_error() on the calling thread until the next failing call.
 * Handles are opaque and must be released with their *_free function.
 * Class labels crossing this interface are 1-based.
 */
#ifndef NPC_NPC_H
#define NPC_NPC_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define NPC_API __declspec(dllexport)
#else
#define NPC_API __attribute__((visibility("default")))
#endif

typedef enum npc_status {
  NPC_OK = 0,
  NPC_ERR_ARGUMENT = 1, /* null pointer or size mismatch at the call site */
  NPC_ERR_CONFIG = 2,
  NPC_ERR_DATA = 3,
  NPC_ERR_NUMERIC = 4,
  NPC_ERR_IO = 5,
  NPC_ERR_INTERNAL = 6
} npc_status;

typedef struct npc_dataset npc_dataset;
typedef struct npc_pca npc_pca;
typedef struct npc_stream_pca npc_stream_pca;
typedef struct npc_offline npc_offline;
typedef struct npc_online npc_online;

NPC_API const char* npc_version(void);
NPC_API const char* npc_last_error(void);

/* Datasets. schema is "ctg", "fetal_health" or "generic:<label column>". */
NPC_API npc_status npc_dataset_load(const char* path, const char* schema, npc_dataset** out);
/* features is row-major n x d; labels are in 1..num_classes. */
NPC_API npc_status npc_dataset_from_arrays(const double* features, const int* labels, size_t n, size_t d,
                                           size_t num_classes, npc_dataset** out);
NPC_API npc_status npc_dataset_standardize(const npc_dataset* in, npc_dataset** out);
NPC_API size_t npc_dataset_rows(const npc_dataset* ds);
NPC_API size_t npc_dataset_dim(const npc_dataset* ds);
NPC_API size_t npc_dataset_classes(const npc_dataset* ds);
NPC_API npc_status npc_dataset_row(const npc_dataset* ds, size_t i, double* features, size_t d, int* label);
NPC_API void npc_dataset_free(npc_dataset* ds);

/* Batch PCA. */
NPC_API npc_status npc_pca_fit(const npc_dataset* ds, size_t q, npc_pca** out);
NPC_API npc_status npc_pca_project(const npc_pca* pca, const double* x, size_t d, double* scores, size_t q);
NPC_API npc_status npc_pca_explained(const npc_pca* pca, double* ratios, double* cumulative, size_t q);
/* Returns a new dataset holding the q principal scores of every row. */
NPC_API npc_status npc_pca_reduce(const npc_pca* pca, const npc_dataset* ds, npc_dataset** out);
NPC_API void npc_pca_free(npc_pca* pca);

/* Incremental PCA. head is row-major n0 x d with n0 >= q + 1. */
NPC_API npc_status npc_stream_pca_init(const double* head, size_t n0, size_t d, size_t q, npc_stream_pca** out);
NPC_API npc_status npc_stream_pca_update(npc_stream_pca* s, const double* x, size_t d);
/* basis is row-major d x q. */
NPC_API npc_status npc_stream_pca_basis(const npc_stream_pca* s, double* basis, size_t d, size_t q);
NPC_API npc_status npc_stream_pca_eigenvalues(const npc_stream_pca* s, double* values, size_t q);
NPC_API npc_status npc_stream_pca_project(const npc_stream_pca* s, const double* x, size_t d, double* scores,
                                          size_t q);
NPC_API size_t npc_stream_pca_count(const npc_stream_pca* s);
NPC_API void npc_stream_pca_free(npc_stream_pca* s);

/* Offline kernel classifier; bandwidths chosen by leave-one-out CV on the default grid. */
NPC_API npc_status npc_offline_fit(const npc_dataset* train, npc_offline** out);
NPC_API npc_status npc_offline_posterior(const npc_offline* clf, const double* x, size_t d, double* posterior,
                                         size_t num_classes);
NPC_API npc_status npc_offline_classify(const npc_offline* clf, const double* x, size_t d, int* label);
NPC_API void npc_offline_free(npc_offline* clf);

/* Online classifier tracking m query points (row-major m x d). The initial
 * estimates come from the offline estimator on head with CV-chosen bandwidths. */
NPC_API npc_status npc_online_tune_c_gamma(const npc_dataset* head, const double* grid, size_t grid_len,
                                           double* best);
NPC_API npc_status npc_online_init(const npc_dataset* head, const double* queries, size_t m, size_t d,
                                   double c_gamma, npc_online** out);
NPC_API npc_status npc_online_update(npc_online* state, const double* x, size_t d, int label);
NPC_API npc_status npc_online_posterior(const npc_online* state, size_t query, double* posterior,
                                        size_t num_classes);
NPC_API npc_status npc_online_classify(const npc_online* state, size_t query, int* label);
NPC_API size_t npc_online_count(const npc_online* state);
NPC_API npc_status npc_online_save(const npc_online* state, const char* path);
NPC_API npc_status npc_online_load(const char* path, npc_online** out);
NPC_API void npc_online_free(npc_online* state);

/* Commands driven by a JSON configuration string (see README). */
NPC_API npc_status npc_bench_run(const char* config_json);
NPC_API npc_status npc_tune_cgamma_run(const char* config_json, double* best);
NPC_API npc_status npc_pca_run(const char* config_json);
NPC_API npc_status npc_synth_run(const char* config_json);

#ifdef __cplusplus
}
#endif

#endif /* NPC_NPC_H */
