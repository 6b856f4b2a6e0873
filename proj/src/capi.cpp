#include "efgraph/efgraph.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <new>
#include <string>

#include "efgraph/embedding.hpp"
#include "efgraph/error.hpp"
#include "efgraph/evaluation.hpp"
#include "efgraph/graph.hpp"
#include "efgraph/loader.hpp"
#include "efgraph/pipeline.hpp"
#include "efgraph/walks.hpp"

struct efg_graph {
  efg::Graph graph;
};

struct efg_embedding {
  efg::TrainResult result;
};

struct efg_report {
  efg::EvaluationReport report;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_stage;

efg_status record(efg_status status, const std::string& message, const std::string& stage = {}) {
  g_last_error = message;
  g_last_stage = stage;
  return status;
}

efg_status status_of(efg::ErrorKind kind) { return static_cast<efg_status>(static_cast<int>(kind)); }

template <class Fn>
efg_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    g_last_stage.clear();
    return EFG_OK;
  } catch (const efg::StageError& e) {
    return record(status_of(e.kind()), e.what(), e.stage());
  } catch (const efg::Error& e) {
    return record(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return record(EFG_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(EFG_ERR_INTERNAL, e.what());
  }
}

efg_status null_argument(const char* name) {
  return record(EFG_ERR_NULL_ARGUMENT, std::string(name) + " must not be NULL");
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

efg::WalkConfig to_walk_config(const efg_walk_config& c) {
  efg::WalkConfig w;
  w.return_p = c.return_p;
  w.in_out_q = c.in_out_q;
  w.walk_length = c.length;
  w.iterations = c.iterations;
  if (c.degree_threshold != 0) w.degree_threshold = c.degree_threshold;
  w.seed = c.seed;
  w.threads = c.threads;
  w.batch_nodes = c.batch_nodes;
  return w;
}

efg::EmbedConfig to_embed_config(const efg_walk_config* walks, const efg_train_config& c) {
  efg::EmbedConfig e;
  if (c.method < EFG_METHOD_SKIPGRAM || c.method > EFG_METHOD_TRANSE) efg::fail(efg::ErrorKind::kConfig, "unknown embedding method");
  e.method = static_cast<efg::EmbeddingMethod>(c.method);
  if (walks != nullptr) e.walks = to_walk_config(*walks);
  e.train.dim = c.dim;
  e.train.epochs = c.epochs;
  e.train.learning_rate = c.learning_rate;
  e.train.window_size = c.window_size;
  e.train.negatives = c.negatives;
  e.train.margin = c.margin;
  e.train.seed = c.seed;
  e.train.threads = c.threads;
  return e;
}

efg::HoldoutSpec to_holdout_spec(const efg_holdout_config& c) {
  efg::HoldoutSpec h;
  if (c.schema < EFG_SCHEMA_KFOLD || c.schema > EFG_SCHEMA_CONNECTED_MONTE_CARLO) {
    efg::fail(efg::ErrorKind::kConfig, "unknown holdout schema");
  }
  if (c.negative_policy != EFG_NEGATIVES_UNIFORM && c.negative_policy != EFG_NEGATIVES_SCALE_FREE) {
    efg::fail(efg::ErrorKind::kConfig, "unknown negative policy");
  }
  h.schema = static_cast<efg::HoldoutSchema>(c.schema);
  h.train_fraction = c.train_fraction;
  h.repeats = c.repeats;
  h.stratify = c.stratify != 0;
  h.negative_policy = static_cast<efg::NegativePolicy>(c.negative_policy);
  h.unbalance_ratio = c.unbalance_ratio;
  h.strict = c.strict != 0;
  h.seed = c.seed;
  return h;
}

template <class Parse>
efg_status from_name(const char* name, int* out, Parse&& parse) {
  if (name == nullptr) return null_argument("name");
  if (out == nullptr) return null_argument("out");
  return guarded([&] { *out = static_cast<int>(parse(name)); });
}

}  // namespace

extern "C" {

const char* efg_last_error(void) { return g_last_error.c_str(); }
const char* efg_last_error_stage(void) { return g_last_stage.c_str(); }

const char* efg_status_name(efg_status status) {
  switch (status) {
    case EFG_OK:
      return "ok";
    case EFG_ERR_NULL_ARGUMENT:
      return "null_argument";
    case EFG_ERR_INTERNAL:
      return "internal";
    default:
      if (status >= EFG_ERR_PARSE && status <= EFG_ERR_SHAPE) {
        return efg::to_string(static_cast<efg::ErrorKind>(static_cast<int>(status)));
      }
      return "unknown";
  }
}

void efg_string_free(char* s) { std::free(s); }
void efg_buffer_free(void* p) { std::free(p); }

void efg_load_options_default(efg_load_options* options) {
  if (options == nullptr) return;
  *options = efg_load_options{};
  options->weight_column = -1;
  options->edge_type_column = -1;
  options->dedupe_policy = EFG_DEDUPE_ERROR;
  options->allow_self_loops = 1;
}

efg_status efg_graph_load(const char* path, const efg_load_options* options, efg_graph** out) {
  if (path == nullptr) return null_argument("path");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    efg_load_options o;
    efg_load_options_default(&o);
    if (options != nullptr) o = *options;
    efg::LoadOptions lo;
    lo.directed = o.directed != 0;
    lo.has_header = o.has_header != 0;
    if (o.separator != 0) lo.separator = o.separator;
    if (o.weight_column >= 0) lo.weight_column = static_cast<std::size_t>(o.weight_column);
    if (o.edge_type_column >= 0) lo.edge_type_column = static_cast<std::size_t>(o.edge_type_column);
    if (o.dedupe_policy < EFG_DEDUPE_ERROR || o.dedupe_policy > EFG_DEDUPE_SUM_WEIGHTS) {
      efg::fail(efg::ErrorKind::kConfig, "unknown dedupe policy");
    }
    lo.dedupe_policy = static_cast<efg::DuplicatePolicy>(o.dedupe_policy);
    lo.allow_self_loops = o.allow_self_loops != 0;
    lo.sort_nodes = o.sort_nodes != 0;
    if (o.node_list != nullptr) lo.node_list = o.node_list;
    *out = new efg_graph{efg::load_edge_list(std::filesystem::path(path), lo)};
  });
}

efg_status efg_graph_from_edges(uint64_t node_count, const uint32_t* sources, const uint32_t* destinations,
                                const float* weights, uint64_t edge_count, int directed, efg_graph** out) {
  if (out == nullptr) return null_argument("out");
  if (edge_count > 0 && (sources == nullptr || destinations == nullptr)) return null_argument("sources/destinations");
  *out = nullptr;
  return guarded([&] {
    std::vector<std::pair<efg::NodeId, efg::NodeId>> edges(edge_count);
    for (uint64_t i = 0; i < edge_count; ++i) {
      if (sources[i] >= node_count || destinations[i] >= node_count) {
        efg::fail(efg::ErrorKind::kRange, "edge " + std::to_string(i) + " references a node outside the graph");
      }
      edges[i] = {sources[i], destinations[i]};
    }
    const std::span<const float> w = weights == nullptr ? std::span<const float>{} : std::span<const float>(weights, edge_count);
    *out = new efg_graph{efg::make_graph(node_count, edges, directed != 0, w)};
  });
}

efg_status efg_graph_read(const char* path, efg_graph** out) {
  if (path == nullptr) return null_argument("path");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) efg::fail(efg::ErrorKind::kIo, std::string("cannot open ") + path);
    *out = new efg_graph{efg::Graph::read(in)};
  });
}

efg_status efg_graph_write(const efg_graph* g, const char* path) {
  if (g == nullptr) return null_argument("graph");
  if (path == nullptr) return null_argument("path");
  return guarded([&] {
    std::ofstream out(path, std::ios::binary);
    if (!out) efg::fail(efg::ErrorKind::kIo, std::string("cannot write ") + path);
    g->graph.write(out);
    if (!out) efg::fail(efg::ErrorKind::kIo, std::string("failed writing ") + path);
  });
}

void efg_graph_free(efg_graph* g) { delete g; }

uint64_t efg_graph_node_count(const efg_graph* g) { return g == nullptr ? 0 : g->graph.node_count(); }
uint64_t efg_graph_edge_count(const efg_graph* g) { return g == nullptr ? 0 : g->graph.edge_count(); }
int efg_graph_directed(const efg_graph* g) { return g != nullptr && g->graph.directed() ? 1 : 0; }
int efg_graph_weighted(const efg_graph* g) { return g != nullptr && g->graph.weighted() ? 1 : 0; }

efg_status efg_graph_degree(const efg_graph* g, uint32_t node, uint64_t* out) {
  if (g == nullptr) return null_argument("graph");
  if (out == nullptr) return null_argument("out");
  return guarded([&] { *out = g->graph.degree(node); });
}

efg_status efg_graph_neighbors(const efg_graph* g, uint32_t node, uint32_t* out, uint64_t capacity, uint64_t* count) {
  if (g == nullptr) return null_argument("graph");
  if (count == nullptr) return null_argument("count");
  return guarded([&] {
    std::vector<efg::NodeId> scratch;
    const auto n = g->graph.neighbors(node, scratch);
    *count = n.size();
    if (out != nullptr) std::copy_n(n.begin(), std::min<uint64_t>(capacity, n.size()), out);
  });
}

efg_status efg_graph_has_edge(const efg_graph* g, uint32_t a, uint32_t b, int* out) {
  if (g == nullptr) return null_argument("graph");
  if (out == nullptr) return null_argument("out");
  return guarded([&] { *out = g->graph.has_edge(a, b) ? 1 : 0; });
}

efg_status efg_graph_node_name(const efg_graph* g, uint32_t node, char** out) {
  if (g == nullptr) return null_argument("graph");
  if (out == nullptr) return null_argument("out");
  return guarded([&] {
    if (node >= g->graph.node_count()) efg::fail(efg::ErrorKind::kRange, "node out of range");
    *out = copy_string(g->graph.node_name(node));
  });
}

efg_status efg_graph_enable_cache(efg_graph* g, unsigned kinds) {
  if (g == nullptr) return null_argument("graph");
  return guarded([&] {
    for (const unsigned kind : {EFG_CACHE_DESTINATIONS, EFG_CACHE_OUT_DEGREES, EFG_CACHE_SOURCES}) {
      if ((kinds & kind) != 0) g->graph.enable_cache(static_cast<efg::CacheKind>(kind));
    }
  });
}

efg_status efg_graph_report(const efg_graph* g, int format, char** out) {
  if (g == nullptr) return null_argument("graph");
  if (out == nullptr) return null_argument("out");
  return guarded([&] {
    const efg::GraphReport r = efg::report(g->graph);
    *out = copy_string(format == EFG_REPORT_KEY_VALUES ? efg::report_key_values(r) : efg::report_text(r));
  });
}

void efg_walk_config_default(efg_walk_config* cfg) {
  if (cfg == nullptr) return;
  const efg::WalkConfig w;
  *cfg = efg_walk_config{w.return_p, w.in_out_q, w.walk_length, w.iterations, 0, w.seed, w.threads, w.batch_nodes};
}

efg_status efg_walks_generate(const efg_graph* g, const efg_walk_config* cfg, efg_walk_callback callback, void* user) {
  if (g == nullptr) return null_argument("graph");
  if (cfg == nullptr) return null_argument("config");
  if (callback == nullptr) return null_argument("callback");
  return guarded([&] {
    efg::WalkStream stream(g->graph, to_walk_config(*cfg));
    efg::WalkBatch batch;
    while (stream.next(batch)) {
      if (callback(user, batch.nodes.data(), batch.offsets.data(), batch.rows(), batch.iteration) != 0) break;
    }
  });
}

efg_status efg_walks_write(const efg_graph* g, const efg_walk_config* cfg, const char* path, int names) {
  if (g == nullptr) return null_argument("graph");
  if (cfg == nullptr) return null_argument("config");
  return guarded([&] {
    std::ofstream file;
    if (path != nullptr) {
      file.open(path);
      if (!file) efg::fail(efg::ErrorKind::kIo, std::string("cannot write ") + path);
    }
    std::ostream& out = path != nullptr ? static_cast<std::ostream&>(file) : std::cout;
    std::vector<std::string> labels;
    if (names != 0) labels = efg::node_names(g->graph);
    efg::WalkStream stream(g->graph, to_walk_config(*cfg));
    efg::WalkBatch batch;
    std::string line;
    while (stream.next(batch)) {
      for (std::size_t r = 0; r < batch.rows(); ++r) {
        line.clear();
        for (const efg::NodeId v : batch.row(r)) {
          if (!line.empty()) line += ' ';
          line += names != 0 ? labels[v] : std::to_string(v);
        }
        line += '\n';
        out << line;
      }
    }
    out.flush();
    if (!out) efg::fail(efg::ErrorKind::kIo, "failed writing walks");
  });
}

efg_status efg_walks_digest(const efg_graph* g, const efg_walk_config* cfg, uint64_t* digest, uint64_t* walks,
                            uint64_t* steps) {
  if (g == nullptr) return null_argument("graph");
  if (cfg == nullptr) return null_argument("config");
  if (digest == nullptr) return null_argument("digest");
  return guarded([&] {
    efg::WalkStream stream(g->graph, to_walk_config(*cfg));
    efg::WalkBatch batch;
    uint64_t h = 0xcbf29ce484222325ULL;
    uint64_t walk_count = 0;
    uint64_t step_count = 0;
    while (stream.next(batch)) {
      for (std::size_t r = 0; r < batch.rows(); ++r) {
        const auto row = batch.row(r);
        for (const efg::NodeId v : row) h = efg::mix64(h ^ v);
        h = efg::mix64(h ^ (0xffffffff00000000ULL | row.size()));
        ++walk_count;
        step_count += row.size() - 1;
      }
    }
    *digest = h;
    if (walks != nullptr) *walks = walk_count;
    if (steps != nullptr) *steps = step_count;
  });
}

efg_status efg_walk_transition_probabilities(const efg_graph* g, const efg_walk_config* cfg, uint32_t previous,
                                             uint32_t current, double* out, uint64_t capacity, uint64_t* count) {
  if (g == nullptr) return null_argument("graph");
  if (cfg == nullptr) return null_argument("config");
  if (count == nullptr) return null_argument("count");
  return guarded([&] {
    if (previous >= g->graph.node_count()) efg::fail(efg::ErrorKind::kRange, "previous node out of range");
    const efg::Walker walker(g->graph, to_walk_config(*cfg));
    std::vector<double> probs;
    walker.transition_probabilities(previous, current, probs);
    *count = probs.size();
    if (out != nullptr) std::copy_n(probs.begin(), std::min<uint64_t>(capacity, probs.size()), out);
  });
}

void efg_train_config_default(efg_train_config* cfg) {
  if (cfg == nullptr) return;
  const efg::TrainConfig t;
  *cfg = efg_train_config{EFG_METHOD_SKIPGRAM, t.dim,    t.epochs, t.learning_rate, t.window_size,
                          t.negatives,         t.margin, t.seed,   t.threads};
}

efg_status efg_embedding_train(const efg_graph* g, const efg_walk_config* walks, const efg_train_config* cfg,
                               efg_embedding** out) {
  if (g == nullptr) return null_argument("graph");
  if (cfg == nullptr) return null_argument("config");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new efg_embedding{efg::train_embedding(g->graph, to_embed_config(walks, *cfg))}; });
}

uint64_t efg_embedding_rows(const efg_embedding* e) { return e == nullptr ? 0 : e->result.embedding.rows(); }
uint64_t efg_embedding_dim(const efg_embedding* e) { return e == nullptr ? 0 : e->result.embedding.dim(); }
const float* efg_embedding_data(const efg_embedding* e) { return e == nullptr ? nullptr : e->result.embedding.data(); }

efg_status efg_embedding_losses(const efg_embedding* e, double* out, uint64_t capacity, uint64_t* count) {
  if (e == nullptr) return null_argument("embedding");
  if (count == nullptr) return null_argument("count");
  const auto& losses = e->result.epoch_loss;
  *count = losses.size();
  if (out != nullptr) std::copy_n(losses.begin(), std::min<uint64_t>(capacity, losses.size()), out);
  return EFG_OK;
}

efg_status efg_embedding_write(const efg_embedding* e, const efg_graph* g, const char* path, int binary) {
  if (e == nullptr) return null_argument("embedding");
  if (path == nullptr) return null_argument("path");
  return guarded([&] {
    std::vector<std::string> names;
    if (g != nullptr) names = efg::node_names(g->graph);
    std::ofstream out(path, binary != 0 ? std::ios::binary : std::ios::out);
    if (!out) efg::fail(efg::ErrorKind::kIo, std::string("cannot write ") + path);
    if (binary != 0) {
      efg::write_embedding_binary(out, e->result.embedding, names);
    } else {
      efg::write_embedding_text(out, e->result.embedding, names);
    }
  });
}

void efg_embedding_free(efg_embedding* e) { delete e; }

void efg_holdout_config_default(efg_holdout_config* cfg) {
  if (cfg == nullptr) return;
  const efg::HoldoutSpec h;
  *cfg = efg_holdout_config{static_cast<int>(h.schema), h.train_fraction, h.repeats, h.stratify ? 1 : 0,
                            static_cast<int>(h.negative_policy), h.unbalance_ratio, h.strict ? 1 : 0, h.seed};
}

efg_status efg_split_edges(const efg_graph* g, const efg_holdout_config* cfg, uint64_t repeat, efg_graph** train,
                           uint32_t** test_pairs, uint64_t* test_count, int* flagged) {
  if (g == nullptr) return null_argument("graph");
  if (cfg == nullptr) return null_argument("config");
  if (train == nullptr || test_pairs == nullptr || test_count == nullptr) return null_argument("outputs");
  *train = nullptr;
  *test_pairs = nullptr;
  return guarded([&] {
    efg::EdgeSplit split = efg::split_edges(g->graph, to_holdout_spec(*cfg), repeat);
    auto* pairs = static_cast<uint32_t*>(std::malloc(std::max<std::size_t>(1, split.test_edges.size() * 2 * sizeof(uint32_t))));
    if (pairs == nullptr) throw std::bad_alloc();
    for (std::size_t i = 0; i < split.test_edges.size(); ++i) {
      pairs[2 * i] = split.test_edges[i].first;
      pairs[2 * i + 1] = split.test_edges[i].second;
    }
    *test_count = split.test_edges.size();
    if (flagged != nullptr) *flagged = split.forest_exceeds_budget ? 1 : 0;
    *test_pairs = pairs;
    *train = new efg_graph{std::move(split.train)};
  });
}

void efg_pipeline_config_default(efg_pipeline_config* cfg) {
  if (cfg == nullptr) return;
  const efg::PipelineConfig p;
  *cfg = efg_pipeline_config{};
  cfg->task = EFG_TASK_EDGE_PREDICTION;
  efg_walk_config_default(&cfg->walks);
  efg_train_config_default(&cfg->train);
  efg_holdout_config_default(&cfg->holdouts);
  cfg->edge_operator = static_cast<int>(p.edge_operator);
  cfg->classifier_epochs = p.classifier.epochs;
  cfg->classifier_learning_rate = p.classifier.optimizer.learning_rate;
  cfg->minibatch = p.classifier.minibatch;
  cfg->softmax = p.classifier.softmax ? 1 : 0;
  cfg->smoke = 0;
  cfg->cache_dir = nullptr;
  cfg->threads = p.threads;
  cfg->baseline = p.baseline ? 1 : 0;
}

efg_status efg_evaluate(const efg_graph* g, const efg_pipeline_config* cfg, efg_report** out) {
  if (g == nullptr) return null_argument("graph");
  if (cfg == nullptr) return null_argument("config");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    efg::PipelineConfig p;
    try {
      p.embed = to_embed_config(&cfg->walks, cfg->train);
      p.holdouts = to_holdout_spec(cfg->holdouts);
      if (cfg->edge_operator < EFG_OP_CONCATENATION || cfg->edge_operator > EFG_OP_COSINE) {
        efg::fail(efg::ErrorKind::kConfig, "unknown edge operator");
      }
    } catch (const efg::Error& e) {
      throw efg::StageError("config", e);
    }
    p.edge_operator = static_cast<efg::EdgeOperator>(cfg->edge_operator);
    p.classifier.epochs = cfg->classifier_epochs;
    p.classifier.optimizer.learning_rate = cfg->classifier_learning_rate;
    p.classifier.minibatch = cfg->minibatch;
    p.classifier.softmax = cfg->softmax != 0;
    p.smoke = cfg->smoke != 0;
    if (cfg->cache_dir != nullptr) p.cache_dir = cfg->cache_dir;
    p.threads = cfg->threads;
    p.baseline = cfg->baseline != 0;
    efg::EvaluationReport r = cfg->task == EFG_TASK_NODE_LABEL ? efg::run_node_label_pipeline(g->graph, p)
                                                               : efg::run_edge_prediction_pipeline(g->graph, p);
    *out = new efg_report{std::move(r)};
  });
}

uint64_t efg_report_holdouts(const efg_report* r) { return r == nullptr ? 0 : r->report.holdouts.size(); }

namespace {

efg_status summary_mean(const std::vector<efg::MetricSummary>& summary, const char* metric, double* out) {
  if (metric == nullptr) return null_argument("metric");
  if (out == nullptr) return null_argument("out");
  for (const auto& s : summary) {
    if (s.name != metric) continue;
    if (s.count == 0) return record(EFG_ERR_DEGENERATE, std::string(metric) + " is undefined on every holdout");
    *out = s.mean;
    return EFG_OK;
  }
  return record(EFG_ERR_CONFIG, std::string("unknown metric ") + metric);
}

}  // namespace

efg_status efg_report_mean(const efg_report* r, const char* metric, double* out) {
  if (r == nullptr) return null_argument("report");
  return summary_mean(r->report.summary, metric, out);
}

efg_status efg_report_baseline_mean(const efg_report* r, const char* metric, double* out) {
  if (r == nullptr) return null_argument("report");
  return summary_mean(r->report.baseline_summary, metric, out);
}

efg_status efg_report_tsv(const efg_report* r, char** out) {
  if (r == nullptr) return null_argument("report");
  if (out == nullptr) return null_argument("out");
  return guarded([&] { *out = copy_string(efg::report_tsv(r->report)); });
}

efg_status efg_report_key_values(const efg_report* r, char** out) {
  if (r == nullptr) return null_argument("report");
  if (out == nullptr) return null_argument("out");
  return guarded([&] { *out = copy_string(efg::report_key_values(r->report)); });
}

void efg_report_free(efg_report* r) { delete r; }

efg_status efg_method_from_name(const char* name, int* out) {
  return from_name(name, out, [](const char* n) { return efg::parse_embedding_method(n); });
}

efg_status efg_schema_from_name(const char* name, int* out) {
  return from_name(name, out, [](const char* n) { return efg::parse_holdout_schema(n); });
}

efg_status efg_negative_policy_from_name(const char* name, int* out) {
  return from_name(name, out, [](const char* n) { return efg::parse_negative_policy(n); });
}

efg_status efg_operator_from_name(const char* name, int* out) {
  return from_name(name, out, [](const char* n) { return efg::parse_edge_operator(n); });
}

}  // extern "C"
