#ifndef EFGRAPH_EFGRAPH_H
#define EFGRAPH_EFGRAPH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define EFG_API __declspec(dllexport)
#else
#define EFG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct efg_graph efg_graph;
typedef struct efg_embedding efg_embedding;
typedef struct efg_report efg_report;

typedef enum efg_status {
  EFG_OK = 0,
  EFG_ERR_PARSE = 1,
  EFG_ERR_VALUE = 2,
  EFG_ERR_DUPLICATE = 3,
  EFG_ERR_RANGE = 4,
  EFG_ERR_ORDER = 5,
  EFG_ERR_BOUND = 6,
  EFG_ERR_IO = 7,
  EFG_ERR_CONFIG = 8,
  EFG_ERR_DISTRIBUTION = 9,
  EFG_ERR_INFEASIBLE = 10,
  EFG_ERR_DIVERGENCE = 11,
  EFG_ERR_DEGENERATE = 12,
  EFG_ERR_CONTRACT = 13,
  EFG_ERR_SHAPE = 14,
  EFG_ERR_NULL_ARGUMENT = 100,
  EFG_ERR_INTERNAL = 101
} efg_status;

/* Message and stage of the last failure on the calling thread ("" if none). */
EFG_API const char* efg_last_error(void);
EFG_API const char* efg_last_error_stage(void);
EFG_API const char* efg_status_name(efg_status status);

/* Strings and buffers returned by the library. */
EFG_API void efg_string_free(char* s);
EFG_API void efg_buffer_free(void* p);

enum { EFG_DEDUPE_ERROR = 0, EFG_DEDUPE_KEEP_FIRST = 1, EFG_DEDUPE_SUM_WEIGHTS = 2 };
enum { EFG_CACHE_DESTINATIONS = 1, EFG_CACHE_OUT_DEGREES = 2, EFG_CACHE_SOURCES = 4 };

typedef struct efg_load_options {
  int directed;
  int has_header;
  char separator; /* 0 sniffs tab, comma, then space */
  int64_t weight_column; /* -1 for none */
  int64_t edge_type_column; /* -1 for none */
  int dedupe_policy;
  int allow_self_loops;
  int sort_nodes;
  const char* node_list; /* NULL for none */
} efg_load_options;

EFG_API void efg_load_options_default(efg_load_options* options);

EFG_API efg_status efg_graph_load(const char* path, const efg_load_options* options, efg_graph** out);
EFG_API efg_status efg_graph_from_edges(uint64_t node_count, const uint32_t* sources, const uint32_t* destinations,
                                        const float* weights, uint64_t edge_count, int directed, efg_graph** out);
EFG_API efg_status efg_graph_read(const char* path, efg_graph** out);
EFG_API efg_status efg_graph_write(const efg_graph* g, const char* path);
EFG_API void efg_graph_free(efg_graph* g);

EFG_API uint64_t efg_graph_node_count(const efg_graph* g);
EFG_API uint64_t efg_graph_edge_count(const efg_graph* g);
EFG_API int efg_graph_directed(const efg_graph* g);
EFG_API int efg_graph_weighted(const efg_graph* g);
EFG_API efg_status efg_graph_degree(const efg_graph* g, uint32_t node, uint64_t* out);
/* Writes up to `capacity` sorted successors; `count` receives the degree. */
EFG_API efg_status efg_graph_neighbors(const efg_graph* g, uint32_t node, uint32_t* out, uint64_t capacity,
                                       uint64_t* count);
EFG_API efg_status efg_graph_has_edge(const efg_graph* g, uint32_t a, uint32_t b, int* out);
EFG_API efg_status efg_graph_node_name(const efg_graph* g, uint32_t node, char** out);
EFG_API efg_status efg_graph_enable_cache(efg_graph* g, unsigned kinds);

enum { EFG_REPORT_TEXT = 0, EFG_REPORT_KEY_VALUES = 1 };
EFG_API efg_status efg_graph_report(const efg_graph* g, int format, char** out);

typedef struct efg_walk_config {
  double return_p;
  double in_out_q;
  uint64_t length;
  uint64_t iterations;
  uint64_t degree_threshold; /* 0 for exact walks */
  uint64_t seed;
  unsigned threads;
  uint64_t batch_nodes;
} efg_walk_config;

EFG_API void efg_walk_config_default(efg_walk_config* cfg);

/* Called once per batch: rows walks stored back to back, row i spanning
   nodes[offsets[i]] .. nodes[offsets[i + 1]]. Return nonzero to stop. */
typedef int (*efg_walk_callback)(void* user, const uint32_t* nodes, const uint64_t* offsets, uint64_t rows,
                                 uint64_t iteration);

EFG_API efg_status efg_walks_generate(const efg_graph* g, const efg_walk_config* cfg, efg_walk_callback callback,
                                      void* user);
/* One walk per line, space separated; node names when `names` is set. NULL path writes stdout. */
EFG_API efg_status efg_walks_write(const efg_graph* g, const efg_walk_config* cfg, const char* path, int names);
/* Order-sensitive 64-bit digest of every generated walk. */
EFG_API efg_status efg_walks_digest(const efg_graph* g, const efg_walk_config* cfg, uint64_t* digest,
                                    uint64_t* walks, uint64_t* steps);
/* Exact next-step distribution from `current` after `previous`, aligned with the neighbors. */
EFG_API efg_status efg_walk_transition_probabilities(const efg_graph* g, const efg_walk_config* cfg,
                                                     uint32_t previous, uint32_t current, double* out,
                                                     uint64_t capacity, uint64_t* count);

enum { EFG_METHOD_SKIPGRAM = 0, EFG_METHOD_CBOW = 1, EFG_METHOD_LINE_FIRST = 2, EFG_METHOD_LINE_SECOND = 3,
       EFG_METHOD_TRANSE = 4 };

typedef struct efg_train_config {
  int method;
  uint64_t dim;
  uint64_t epochs;
  double learning_rate;
  uint64_t window_size;
  uint64_t negatives;
  double margin;
  uint64_t seed;
  unsigned threads;
} efg_train_config;

EFG_API void efg_train_config_default(efg_train_config* cfg);

EFG_API efg_status efg_embedding_train(const efg_graph* g, const efg_walk_config* walks, const efg_train_config* cfg,
                                       efg_embedding** out);
EFG_API uint64_t efg_embedding_rows(const efg_embedding* e);
EFG_API uint64_t efg_embedding_dim(const efg_embedding* e);
/* Row-major rows x dim floats, owned by the handle. */
EFG_API const float* efg_embedding_data(const efg_embedding* e);
/* Mean loss of every epoch; `count` receives the epoch count. */
EFG_API efg_status efg_embedding_losses(const efg_embedding* e, double* out, uint64_t capacity, uint64_t* count);
/* Row names come from `g` when given. */
EFG_API efg_status efg_embedding_write(const efg_embedding* e, const efg_graph* g, const char* path, int binary);
EFG_API void efg_embedding_free(efg_embedding* e);

enum { EFG_SCHEMA_KFOLD = 0, EFG_SCHEMA_MONTE_CARLO = 1, EFG_SCHEMA_CONNECTED_MONTE_CARLO = 2 };
enum { EFG_NEGATIVES_UNIFORM = 0, EFG_NEGATIVES_SCALE_FREE = 1 };

typedef struct efg_holdout_config {
  int schema;
  double train_fraction;
  uint64_t repeats;
  int stratify;
  int negative_policy;
  double unbalance_ratio;
  int strict;
  uint64_t seed;
} efg_holdout_config;

EFG_API void efg_holdout_config_default(efg_holdout_config* cfg);

/* Holdout `repeat`: training graph plus test edges as interleaved
   (source, destination) pairs freed with efg_buffer_free. */
EFG_API efg_status efg_split_edges(const efg_graph* g, const efg_holdout_config* cfg, uint64_t repeat,
                                   efg_graph** train, uint32_t** test_pairs, uint64_t* test_count, int* flagged);

enum { EFG_OP_CONCATENATION = 0, EFG_OP_HADAMARD = 1, EFG_OP_MEAN = 2, EFG_OP_SUM = 3, EFG_OP_SUBTRACTION = 4,
       EFG_OP_L1 = 5, EFG_OP_L2 = 6, EFG_OP_COSINE = 7 };
enum { EFG_TASK_EDGE_PREDICTION = 0, EFG_TASK_NODE_LABEL = 1 };

typedef struct efg_pipeline_config {
  int task;
  efg_walk_config walks;
  efg_train_config train;
  efg_holdout_config holdouts;
  int edge_operator;
  uint64_t classifier_epochs;
  double classifier_learning_rate;
  uint64_t minibatch;
  int softmax;
  int smoke;
  const char* cache_dir; /* NULL disables caching */
  unsigned threads;
  int baseline;
} efg_pipeline_config;

EFG_API void efg_pipeline_config_default(efg_pipeline_config* cfg);

EFG_API efg_status efg_evaluate(const efg_graph* g, const efg_pipeline_config* cfg, efg_report** out);
EFG_API uint64_t efg_report_holdouts(const efg_report* r);
/* Mean of a metric over holdouts; EFG_ERR_DEGENERATE when no holdout defines it. */
EFG_API efg_status efg_report_mean(const efg_report* r, const char* metric, double* out);
EFG_API efg_status efg_report_baseline_mean(const efg_report* r, const char* metric, double* out);
EFG_API efg_status efg_report_tsv(const efg_report* r, char** out);
EFG_API efg_status efg_report_key_values(const efg_report* r, char** out);
EFG_API void efg_report_free(efg_report* r);

/* Name lookups for the enums above (e.g. "skipgram", "connected_monte_carlo",
   "scale_free", "hadamard"). */
EFG_API efg_status efg_method_from_name(const char* name, int* out);
EFG_API efg_status efg_schema_from_name(const char* name, int* out);
EFG_API efg_status efg_negative_policy_from_name(const char* name, int* out);
EFG_API efg_status efg_operator_from_name(const char* name, int* out);

#ifdef __cplusplus
}
#endif

#endif
