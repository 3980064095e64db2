/*
 * Copyright 2026 The TCN Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface to libtcn: sparse tensors, tensor-originated graphs, TCN
 * encoders with tensor-factorization predictors, and top-k evaluation.
 *
 * Objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every fallible call returns a tcn_status; on
 * failure tcn_last_error() describes the problem for the calling thread.
 * Indices are 0-based.
 */
#ifndef TCN_TCN_H_
#define TCN_TCN_H_

#include <stddef.h>
#include <stdint.h>

#if defined(TCN_BUILDING_LIBRARY)
#define TCN_API __attribute__((visibility("default")))
#else
#define TCN_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values match the CLI exit codes. */
typedef enum tcn_status {
  TCN_OK = 0,
  TCN_ERROR_USAGE = 1,   /* bad argument or configuration */
  TCN_ERROR_DATA = 2,    /* malformed input, I/O failure, shape mismatch */
  TCN_ERROR_NUMERIC = 3  /* non-finite loss, sampling failure */
} tcn_status;

typedef enum tcn_fusion {
  TCN_FUSION_SUM = 0,
  TCN_FUSION_MEAN = 1,
  TCN_FUSION_PRODUCT = 2,
  TCN_FUSION_CONCAT = 3
} tcn_fusion;

typedef enum tcn_predictor {
  TCN_PREDICTOR_CP = 0,
  TCN_PREDICTOR_TUCKER = 1,
  TCN_PREDICTOR_MLP = 2,
  TCN_PREDICTOR_CONV = 3
} tcn_predictor;

typedef enum tcn_candidates {
  TCN_CANDIDATES_FULL = 0,
  TCN_CANDIDATES_SAMPLED = 1
} tcn_candidates;

/* Name lookups; the parsers also accept "ncft" (mlp) and "costco" (conv). */
TCN_API const char* tcn_fusion_name(tcn_fusion f);
TCN_API tcn_status tcn_fusion_parse(const char* name, tcn_fusion* out);
TCN_API const char* tcn_predictor_name(tcn_predictor p);
TCN_API tcn_status tcn_predictor_parse(const char* name, tcn_predictor* out);
TCN_API const char* tcn_candidates_name(tcn_candidates c);
TCN_API tcn_status tcn_candidates_parse(const char* name,
                                        tcn_candidates* out);

typedef struct tcn_tensor tcn_tensor;
typedef struct tcn_graph tcn_graph;
typedef struct tcn_model tcn_model;

/* Message for the last failed call on this thread; never NULL. */
TCN_API const char* tcn_last_error(void);
TCN_API const char* tcn_version(void);

/* Named sub-seed of a root seed, e.g. ("split", 0) or ("eval", run). */
TCN_API uint64_t tcn_derive_seed(uint64_t root, const char* name,
                                 uint64_t index);

/* ---- tensors ---------------------------------------------------------- */

/* Loads a COO text file. With dims NULL the shape comes from the file header
 * or is inferred as max index + 1; a nonzero order then fixes the number of
 * index fields (trailing fields are ignored), 0 takes it from the header or
 * the first line. duplicates (nullable) receives the merged count. */
TCN_API tcn_status tcn_tensor_load(const char* path, int index_base,
                                   const int64_t* dims, size_t order,
                                   size_t* duplicates, tcn_tensor** out);
/* Header + lexicographically ordered 0-based rows. */
TCN_API tcn_status tcn_tensor_save(const tcn_tensor* t, const char* path);
/* Builds a tensor from nnz rows of `order` indices. */
TCN_API tcn_status tcn_tensor_create(const int64_t* dims, size_t order,
                                     const int64_t* indices, size_t nnz,
                                     tcn_tensor** out);
TCN_API void tcn_tensor_free(tcn_tensor* t);

TCN_API size_t tcn_tensor_order(const tcn_tensor* t);
TCN_API int64_t tcn_tensor_dim(const tcn_tensor* t, size_t n);
TCN_API size_t tcn_tensor_nnz(const tcn_tensor* t);
/* Copies entry e into out[0..order). */
TCN_API tcn_status tcn_tensor_entry(const tcn_tensor* t, size_t e,
                                    int64_t* out);
TCN_API int tcn_tensor_contains(const tcn_tensor* t, const int64_t* index);
TCN_API tcn_status tcn_tensor_merge(const tcn_tensor* a, const tcn_tensor* b,
                                    tcn_tensor** out);

/* ratios = {train, valid, test}, positive, summing to 1. */
TCN_API tcn_status tcn_tensor_split(const tcn_tensor* t, const double* ratios,
                                    uint64_t seed, tcn_tensor** train,
                                    tcn_tensor** valid, tcn_tensor** test);

/* Planted low-rank data; see the README for the generator. */
TCN_API tcn_status tcn_synth_planted(const int64_t* dims, size_t order,
                                     int rank, uint64_t n_obs,
                                     double noise_frac, uint64_t seed,
                                     tcn_tensor** observed,
                                     tcn_tensor** holdout);

/* ---- graphs ----------------------------------------------------------- */

typedef struct tcn_graph_stats {
  int64_t node_count;
  int64_t isolated_nodes;
  uint64_t hyperedges;
  uint64_t incidence_nnz;
  uint64_t adjacency_nnz;   /* stored directed entries */
  uint64_t undirected_edges;
  double max_degree;
  double mean_degree;
  double hypergraph_seconds;
  double clique_seconds;
  uint64_t hypergraph_bytes;
  uint64_t clique_bytes;
} tcn_graph_stats;

/* Incidence matrix, clique expansion and normalized adjacency of t. */
TCN_API tcn_status tcn_graph_build(const tcn_tensor* t, tcn_graph** out);
TCN_API void tcn_graph_free(tcn_graph* g);
TCN_API tcn_status tcn_graph_stats_get(const tcn_graph* g,
                                       tcn_graph_stats* out);
TCN_API size_t tcn_graph_order(const tcn_graph* g);
TCN_API int64_t tcn_graph_dim_nodes(const tcn_graph* g, size_t n);
/* Undirected weight between global node ids i and j; 0 when absent or out
   of range. */
TCN_API double tcn_graph_weight(const tcn_graph* g, int64_t i, int64_t j);
TCN_API double tcn_graph_normalized_weight(const tcn_graph* g, int64_t i,
                                           int64_t j);
/* "# nodes |V| edges m" header then "i\tj\tw" with i < j. */
TCN_API tcn_status tcn_graph_write_edges(const tcn_graph* g,
                                         const char* path);

/* ---- training --------------------------------------------------------- */

typedef struct tcn_eval_options {
  tcn_candidates candidates;
  uint64_t multiplier;
  uint64_t seed;
  int exclude_valid;
  uint64_t budget;
  size_t threads;
} tcn_eval_options;

TCN_API void tcn_eval_options_default(tcn_eval_options* out);

typedef struct tcn_train_options {
  size_t rank;
  int layers;
  int feature_transform;
  int nonlinearity;
  tcn_fusion fusion;
  tcn_predictor predictor;
  size_t hidden;
  size_t mlp_depth;
  size_t channels; /* 0: slab width */
  int epochs;
  size_t batch_size;
  double learning_rate;
  double weight_decay;
  size_t negatives_per_positive;
  uint64_t seed;
  int valid_every; /* 0 disables validation */
  size_t valid_k;
  tcn_eval_options valid;
  int graph_includes_valid;
  int audit_negatives;
} tcn_train_options;

TCN_API void tcn_train_options_default(tcn_train_options* out);

/* Called after every epoch; valid_ap is NaN when validation did not run. */
typedef void (*tcn_epoch_callback)(void* user, int epoch, double loss,
                                   double valid_ap, double wall_ms);

/* Creates a model and trains opts->epochs epochs. valid may be NULL. */
TCN_API tcn_status tcn_model_train(const tcn_tensor* train,
                                   const tcn_tensor* valid,
                                   const tcn_graph* graph,
                                   const tcn_train_options* opts,
                                   tcn_epoch_callback callback, void* user,
                                   tcn_model** out);
/* Continues training a (loaded) model for `epochs` more epochs. */
TCN_API tcn_status tcn_model_resume(tcn_model* m, const tcn_tensor* train,
                                    const tcn_tensor* valid,
                                    const tcn_graph* graph, int epochs,
                                    tcn_epoch_callback callback, void* user);
TCN_API tcn_status tcn_model_save(const tcn_model* m, const char* path);
TCN_API tcn_status tcn_model_load(const char* path, tcn_model** out);
TCN_API void tcn_model_free(tcn_model* m);

typedef struct tcn_model_info {
  int epochs_done;
  int best_epoch;        /* -1 without validation */
  double best_valid_ap;
  double last_loss;      /* NaN before the first epoch */
  uint64_t optimizer_step;
} tcn_model_info;

TCN_API tcn_status tcn_model_info_get(const tcn_model* m, tcn_model_info* out);
TCN_API tcn_status tcn_model_options(const tcn_model* m,
                                     tcn_train_options* out);
/* Epoch log entry i (0-based). */
TCN_API tcn_status tcn_model_log_entry(const tcn_model* m, size_t i,
                                       int* epoch, double* loss,
                                       double* valid_ap, double* wall_ms);
TCN_API size_t tcn_model_log_size(const tcn_model* m);

/* Scores `count` cells (count * order indices) with the selected model. */
TCN_API tcn_status tcn_model_score(const tcn_model* m, const tcn_graph* graph,
                                   const int64_t* cells, size_t count,
                                   double* scores);

/* ---- evaluation ------------------------------------------------------- */

typedef struct tcn_metric_row {
  size_t k;
  double ap;
  double precision;
  uint64_t n_test;
  uint64_t n_candidates;
} tcn_metric_row;

/* Ranks candidates with the selected model (best validation epoch when
 * available) and fills rows[0..n_k). valid may be NULL. When ranked_path
 * is non-NULL the top-max(k) list is written there. */
TCN_API tcn_status tcn_evaluate(const tcn_model* m, const tcn_graph* graph,
                                const tcn_tensor* train,
                                const tcn_tensor* valid,
                                const tcn_tensor* test,
                                const tcn_eval_options* opts,
                                const size_t* ks, size_t n_k,
                                tcn_metric_row* rows,
                                const char* ranked_path);

/* AP@k and Precision@k of an explicit ranking (n_ranked cells, best first)
 * against test. */
TCN_API tcn_status tcn_ap_at_k(const tcn_tensor* test, const int64_t* ranked,
                               size_t n_ranked, size_t k, double* ap,
                               double* precision);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* TCN_TCN_H_ */
