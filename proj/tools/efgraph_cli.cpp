#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "allocation_counter.hpp"
#include "efgraph/efgraph.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Options {
  std::string graph;
  std::string separator;
  bool directed = false;
  bool header = false;
  int64_t weights_col = -1;
  int64_t edge_type_col = -1;
  std::string dedupe = "error";
  bool no_self_loops = false;
  bool sort_nodes = false;
  std::string node_list;

  double p = 1.0;
  double q = 1.0;
  uint64_t length = 100;
  uint64_t iterations = 1;
  uint64_t degree_threshold = 0;
  bool names = false;

  std::string method = "skipgram";
  uint64_t dim = 100;
  uint64_t epochs = 1;
  uint64_t window = 4;
  uint64_t negatives = 5;
  double learning_rate = 0.025;
  double margin = 1.0;
  bool binary = false;

  std::string task = "edge";
  std::string schema = "connected_monte_carlo";
  double train_fraction = 0.8;
  uint64_t repeats = 10;
  std::string negative_policy = "uniform";
  double unbalance_ratio = 1.0;
  bool stratify = false;
  bool strict = false;
  std::string edge_operator = "hadamard";
  uint64_t classifier_epochs = 100;
  double classifier_lr = 0.01;
  uint64_t minibatch = 32;
  bool softmax = false;
  bool no_baseline = false;
  std::string format = "tsv";

  uint64_t repetitions = 3;
  bool cache = false;

  uint64_t seed = 42;
  unsigned threads = 0;
  bool smoke = false;
  std::string cache_dir;
  std::string output;
};

struct Failure {
  efg_status status;
  std::string stage;
  std::string message;
};

void check(efg_status status, const char* stage) {
  if (status == EFG_OK) return;
  const std::string reported = efg_last_error_stage();
  throw Failure{status, reported.empty() ? stage : reported, efg_last_error()};
}

struct GraphHandle {
  efg_graph* g = nullptr;
  ~GraphHandle() { efg_graph_free(g); }
};

struct CString {
  char* s = nullptr;
  ~CString() { efg_string_free(s); }
};

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

char separator_char(const std::string& s) {
  if (s.empty()) return 0;
  if (s == "tab" || s == "\\t") return '\t';
  if (s == "space") return ' ';
  if (s == "comma") return ',';
  if (s.size() == 1) return s[0];
  throw CLI::ValidationError("--separator", "expected one character, tab, space or comma");
}

int dedupe_policy(const std::string& s) {
  if (s == "error") return EFG_DEDUPE_ERROR;
  if (s == "keep_first") return EFG_DEDUPE_KEEP_FIRST;
  if (s == "sum_weights") return EFG_DEDUPE_SUM_WEIGHTS;
  throw CLI::ValidationError("--dedupe", "expected error, keep_first or sum_weights");
}

efg_graph* load_graph(const Options& o) {
  efg_graph* g = nullptr;
  if (ends_with(o.graph, ".efg")) {
    check(efg_graph_read(o.graph.c_str(), &g), "load");
    return g;
  }
  efg_load_options lo;
  efg_load_options_default(&lo);
  lo.directed = o.directed ? 1 : 0;
  lo.has_header = o.header ? 1 : 0;
  lo.separator = separator_char(o.separator);
  lo.weight_column = o.weights_col;
  lo.edge_type_column = o.edge_type_col;
  lo.dedupe_policy = dedupe_policy(o.dedupe);
  lo.allow_self_loops = o.no_self_loops ? 0 : 1;
  lo.sort_nodes = o.sort_nodes ? 1 : 0;
  lo.node_list = o.node_list.empty() ? nullptr : o.node_list.c_str();
  check(efg_graph_load(o.graph.c_str(), &lo, &g), "load");
  return g;
}

efg_walk_config walk_config(const Options& o) {
  efg_walk_config w;
  efg_walk_config_default(&w);
  w.return_p = o.p;
  w.in_out_q = o.q;
  w.length = o.length;
  w.iterations = o.iterations;
  w.degree_threshold = o.degree_threshold;
  w.seed = o.seed;
  w.threads = o.threads;
  if (o.smoke) {
    w.length = std::min<uint64_t>(w.length, 10);
    w.iterations = 1;
  }
  return w;
}

int lookup(efg_status (*fn)(const char*, int*), const std::string& name, const char* flag) {
  int value = 0;
  if (fn(name.c_str(), &value) != EFG_OK) throw CLI::ValidationError(flag, efg_last_error());
  return value;
}

efg_train_config train_config(const Options& o, const CLI::App& app) {
  efg_train_config t;
  efg_train_config_default(&t);
  t.method = lookup(efg_method_from_name, o.method, "--method");
  t.dim = o.dim;
  t.epochs = o.epochs;
  t.learning_rate = o.learning_rate;
  t.window_size = o.window;
  t.negatives = o.negatives;
  t.margin = o.margin;
  t.seed = o.seed;
  t.threads = app.get_option("--threads")->count() > 0 ? o.threads : 1;
  if (o.smoke) {
    t.dim = std::min<uint64_t>(t.dim, 8);
    t.epochs = 1;
  }
  return t;
}

efg_holdout_config holdout_config(const Options& o) {
  efg_holdout_config h;
  efg_holdout_config_default(&h);
  h.schema = lookup(efg_schema_from_name, o.schema, "--schema");
  h.train_fraction = o.train_fraction;
  h.repeats = o.repeats;
  h.stratify = o.stratify ? 1 : 0;
  h.negative_policy = lookup(efg_negative_policy_from_name, o.negative_policy, "--negative-policy");
  h.unbalance_ratio = o.unbalance_ratio;
  h.strict = o.strict ? 1 : 0;
  h.seed = o.seed;
  if (o.smoke) h.repeats = std::min<uint64_t>(h.repeats, 2);
  return h;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file_.open(path, std::ios::binary);
    if (!file_) throw Failure{EFG_ERR_IO, "output", "cannot write " + path};
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  void finish(const std::string& stage) {
    stream().flush();
    if (!stream()) throw Failure{EFG_ERR_IO, stage, "failed writing output"};
  }

 private:
  std::ofstream file_;
};

int run_load(const Options& o) {
  GraphHandle g{load_graph(o)};
  if (!o.output.empty()) check(efg_graph_write(g.g, o.output.c_str()), "write");
  std::cout << "nodes\t" << efg_graph_node_count(g.g) << "\nedges\t" << efg_graph_edge_count(g.g) << '\n';
  return 0;
}

int run_report(const Options& o) {
  GraphHandle g{load_graph(o)};
  CString text;
  check(efg_graph_report(g.g, o.format == "kv" ? EFG_REPORT_KEY_VALUES : EFG_REPORT_TEXT, &text.s), "report");
  Output out(o.output);
  out.stream() << text.s;
  out.finish("report");
  return 0;
}

int run_walk(const Options& o) {
  GraphHandle g{load_graph(o)};
  const efg_walk_config w = walk_config(o);
  check(efg_walks_write(g.g, &w, o.output.empty() ? nullptr : o.output.c_str(), o.names ? 1 : 0), "walk");
  return 0;
}

int run_embed(const Options& o, const CLI::App& app) {
  GraphHandle g{load_graph(o)};
  const efg_walk_config w = walk_config(o);
  const efg_train_config t = train_config(o, app);
  efg_embedding* e = nullptr;
  check(efg_embedding_train(g.g, &w, &t, &e), "embed");
  std::unique_ptr<efg_embedding, void (*)(efg_embedding*)> owned(e, efg_embedding_free);
  const std::string path = o.output.empty() ? "/dev/stdout" : o.output;
  check(efg_embedding_write(e, g.g, path.c_str(), o.binary ? 1 : 0), "write");
  uint64_t epochs = 0;
  check(efg_embedding_losses(e, nullptr, 0, &epochs), "embed");
  std::vector<double> losses(epochs);
  check(efg_embedding_losses(e, losses.data(), losses.size(), &epochs), "embed");
  for (uint64_t i = 0; i < epochs; ++i) std::cerr << "epoch " << i + 1 << " loss " << losses[i] << '\n';
  return 0;
}

std::string node_name(const efg_graph* g, uint32_t node) {
  CString name;
  check(efg_graph_node_name(g, node, &name.s), "split");
  return name.s;
}

int run_split(const Options& o) {
  GraphHandle g{load_graph(o)};
  const efg_holdout_config h = holdout_config(o);
  const uint64_t repeats = h.schema == EFG_SCHEMA_KFOLD ? h.repeats : std::max<uint64_t>(h.repeats, 1);
  Output out(o.output);
  std::ostream& os = out.stream();
  os << "repeat\tset\tsource\tdestination\n";
  const bool directed = efg_graph_directed(g.g) != 0;
  std::vector<uint32_t> neighbors;
  for (uint64_t r = 0; r < repeats; ++r) {
    GraphHandle train;
    uint32_t* pairs = nullptr;
    uint64_t count = 0;
    int flagged = 0;
    check(efg_split_edges(g.g, &h, r, &train.g, &pairs, &count, &flagged), "split");
    std::unique_ptr<uint32_t, void (*)(void*)> owned(pairs, efg_buffer_free);
    if (flagged != 0) std::cerr << "repeat " << r << ": spanning forest exceeds the training budget\n";
    for (uint32_t a = 0; a < efg_graph_node_count(train.g); ++a) {
      uint64_t degree = 0;
      check(efg_graph_neighbors(train.g, a, nullptr, 0, &degree), "split");
      neighbors.resize(degree);
      check(efg_graph_neighbors(train.g, a, neighbors.data(), degree, &degree), "split");
      for (const uint32_t b : neighbors) {
        if (!directed && b < a) continue;
        os << r << "\ttrain\t" << node_name(g.g, a) << '\t' << node_name(g.g, b) << '\n';
      }
    }
    for (uint64_t i = 0; i < count; ++i) {
      os << r << "\ttest\t" << node_name(g.g, pairs[2 * i]) << '\t' << node_name(g.g, pairs[2 * i + 1]) << '\n';
    }
  }
  out.finish("split");
  return 0;
}

int run_evaluate(const Options& o, const CLI::App& app) {
  GraphHandle g{load_graph(o)};
  efg_pipeline_config p;
  efg_pipeline_config_default(&p);
  if (o.task == "edge") {
    p.task = EFG_TASK_EDGE_PREDICTION;
  } else if (o.task == "node") {
    p.task = EFG_TASK_NODE_LABEL;
  } else {
    throw CLI::ValidationError("--task", "expected edge or node");
  }
  p.walks = walk_config(o);
  p.train = train_config(o, app);
  p.holdouts = holdout_config(o);
  p.edge_operator = lookup(efg_operator_from_name, o.edge_operator, "--operator");
  p.classifier_epochs = o.classifier_epochs;
  p.classifier_learning_rate = o.classifier_lr;
  p.minibatch = o.minibatch;
  p.softmax = o.softmax ? 1 : 0;
  p.smoke = o.smoke ? 1 : 0;
  p.cache_dir = o.cache_dir.empty() ? nullptr : o.cache_dir.c_str();
  p.threads = o.threads;
  p.baseline = o.no_baseline ? 0 : 1;
  efg_report* r = nullptr;
  check(efg_evaluate(g.g, &p, &r), "evaluate");
  std::unique_ptr<efg_report, void (*)(efg_report*)> owned(r, efg_report_free);
  CString text;
  if (o.format == "kv") {
    check(efg_report_key_values(r, &text.s), "report");
  } else {
    check(efg_report_tsv(r, &text.s), "report");
  }
  Output out(o.output);
  out.stream() << text.s;
  out.finish("report");
  return 0;
}

int run_bench_walks(const Options& o) {
  GraphHandle g{load_graph(o)};
  if (o.cache) {
    check(efg_graph_enable_cache(g.g, EFG_CACHE_DESTINATIONS | EFG_CACHE_OUT_DEGREES | EFG_CACHE_SOURCES), "cache");
  }
  const efg_walk_config w = walk_config(o);
  const uint64_t runs = o.smoke ? 1 : std::max<uint64_t>(o.repetitions, 1);
  const bool second_order = o.p != 1.0 || o.q != 1.0;
  const unsigned threads = o.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : o.threads;

  Output out(o.output);
  std::ostream& os = out.stream();
  os << "run\tnodes\tedges\torder\tthreads\tlength\twalks\tsteps\tseconds\tsteps_per_second\tpeak_bytes\tdigest\n";
  for (uint64_t run = 0; run < runs; ++run) {
    const uint64_t baseline = efg::alloc::current_bytes();
    efg::alloc::reset_peak();
    uint64_t digest = 0;
    uint64_t walks = 0;
    uint64_t steps = 0;
    const auto start = std::chrono::steady_clock::now();
    check(efg_walks_digest(g.g, &w, &digest, &walks, &steps), "bench");
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const uint64_t peak = efg::alloc::peak_bytes() - baseline;
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(digest));
    os << run << '\t' << efg_graph_node_count(g.g) << '\t' << efg_graph_edge_count(g.g) << '\t'
       << (second_order ? "second" : "first") << '\t' << threads << '\t' << w.length << '\t' << walks << '\t'
       << steps << '\t' << seconds << '\t' << (seconds > 0 ? static_cast<double>(steps) / seconds : 0.0) << '\t'
       << peak << '\t' << hex << '\n';
  }
  out.finish("bench");
  return 0;
}

void add_options(CLI::App& app, Options& o) {
  app.add_option("--separator", o.separator, "Column separator: one character, tab, space or comma (default: sniff)");
  app.add_flag("--directed", o.directed, "Treat edges as directed");
  app.add_flag("--header", o.header, "Skip the first line");
  app.add_option("--weights-col", o.weights_col, "0-based weight column");
  app.add_option("--edge-type-col", o.edge_type_col, "0-based edge type column");
  app.add_option("--dedupe", o.dedupe, "Duplicate edges: error, keep_first or sum_weights");
  app.add_flag("--no-self-loops", o.no_self_loops, "Reject self loops");
  app.add_flag("--sort-nodes", o.sort_nodes, "Number nodes in name order");
  app.add_option("--node-list", o.node_list, "Node list file: name, optional label");

  app.add_option("--p", o.p, "Return parameter")->check(CLI::PositiveNumber);
  app.add_option("--q", o.q, "In-out parameter")->check(CLI::PositiveNumber);
  app.add_option("--length", o.length, "Walk length");
  app.add_option("--iterations", o.iterations, "Walks per node");
  app.add_option("--degree-threshold", o.degree_threshold, "Sub-sample neighborhoods above this degree (0: exact)");
  app.add_flag("--names", o.names, "Write node names instead of ids");

  app.add_option("--method", o.method, "skipgram, cbow, line1, line2 or transe");
  app.add_option("--dim", o.dim, "Embedding dimension");
  app.add_option("--epochs", o.epochs, "Training epochs");
  app.add_option("--window", o.window, "Context window per side");
  app.add_option("--negatives", o.negatives, "Negative samples per positive");
  app.add_option("--learning-rate", o.learning_rate, "Initial learning rate");
  app.add_option("--margin", o.margin, "TransE margin");
  app.add_flag("--binary", o.binary, "Binary embedding output");

  app.add_option("--task", o.task, "edge or node");
  app.add_option("--schema", o.schema, "kfold, monte_carlo or connected_monte_carlo");
  app.add_option("--train-fraction", o.train_fraction, "Training share of the edges");
  app.add_option("--repeats", o.repeats, "Holdouts (folds for kfold)");
  app.add_option("--negative-policy", o.negative_policy, "uniform or scale_free");
  app.add_option("--unbalance-ratio", o.unbalance_ratio, "Negatives per positive");
  app.add_flag("--stratify", o.stratify, "Stratify by edge type or node label");
  app.add_flag("--strict", o.strict, "Fail when a connected split cannot honour the train fraction");
  app.add_option("--operator", o.edge_operator, "Edge operator: hadamard, concatenation, mean, sum, ...");
  app.add_option("--classifier-epochs", o.classifier_epochs, "Perceptron epochs");
  app.add_option("--classifier-learning-rate", o.classifier_lr, "Nadam learning rate");
  app.add_option("--minibatch", o.minibatch, "Perceptron minibatch size");
  app.add_flag("--softmax", o.softmax, "Softmax head for multiclass node labels");
  app.add_flag("--no-baseline", o.no_baseline, "Skip the degree-product baseline");
  app.add_option("--format", o.format, "Report format: tsv or kv (report: text or kv)");

  app.add_option("--repetitions", o.repetitions, "Benchmark runs");
  app.add_flag("--cache", o.cache, "Enable adjacency caches before benchmarking");

  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--threads", o.threads, "Worker threads (default: hardware parallelism)");
  app.add_flag("--smoke", o.smoke, "Cap every size for quick runs");
  app.add_option("--cache-dir", o.cache_dir, "Reuse stage artifacts from this directory");
  app.add_option("--output", o.output, "Output path (default: stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph loading, random walks, embeddings and edge prediction evaluation", "efgraph"};
  app.set_config("--config", "", "Flat key=value file; flags override its values");
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  add_options(app, o);

  auto* load = app.add_subcommand("load", "Parse a graph; --output writes the binary form (.efg)");
  auto* report = app.add_subcommand("report", "Graph statistics");
  auto* walk = app.add_subcommand("walk", "Write random walks, one per line");
  auto* embed = app.add_subcommand("embed", "Train a node embedding");
  auto* split = app.add_subcommand("split", "Write holdout edge splits");
  auto* evaluate = app.add_subcommand("evaluate", "Run the evaluation pipeline");
  auto* bench = app.add_subcommand("bench", "Benchmarks");
  auto* bench_walks = bench->add_subcommand("walks", "Time full-node-set walks");
  bench->require_subcommand(1);
  for (CLI::App* sub : {load, report, walk, embed, split, evaluate, bench_walks}) {
    sub->add_option("graph", o.graph, "Edge list, or binary graph ending in .efg")->required();
    sub->fallthrough();
  }
  bench->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*load) return run_load(o);
    if (*report) return run_report(o);
    if (*walk) return run_walk(o);
    if (*embed) return run_embed(o, app);
    if (*split) return run_split(o);
    if (*evaluate) return run_evaluate(o, app);
    return run_bench_walks(o);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  } catch (const Failure& f) {
    std::cerr << "error: stage " << f.stage << ": " << efg_status_name(f.status) << ": " << f.message << '\n';
    return kExitFailure;
  }
}
