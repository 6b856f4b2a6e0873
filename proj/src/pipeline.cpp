#include "efgraph/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "efgraph/error.hpp"
#include "efgraph/parallel.hpp"

namespace efg {

namespace {

template <class Fn>
auto run_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  } catch (const std::exception& e) {
    throw StageError(stage, Error(ErrorKind::kIo, e.what()));
  }
}

std::string describe(const EmbedConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  const WalkConfig& w = cfg.walks;
  const TrainConfig& t = cfg.train;
  out << "embed|" << to_string(cfg.method) << '|' << w.return_p << '|' << w.in_out_q << '|' << w.walk_length << '|'
      << w.iterations << '|' << w.degree_threshold.value_or(0) << '|' << w.seed << '|' << t.dim << '|' << t.epochs
      << '|' << t.learning_rate << '|' << t.window_size << '|' << t.negatives << '|' << t.margin << '|' << t.seed << '|'
      << t.threads;
  return out.str();
}

std::string hex(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = kDigits[v & 15U];
  return s;
}

/// Trains (or loads from the cache) the embedding of `g`.
EmbeddingMatrix embed(const Graph& g, const EmbedConfig& cfg, const std::optional<std::filesystem::path>& cache_dir,
                      bool* cached) {
  *cached = false;
  std::filesystem::path file;
  if (cache_dir) {
    std::ostringstream bytes;
    g.write(bytes);
    const std::uint64_t key = content_hash(describe(cfg), content_hash(bytes.str()));
    file = *cache_dir / ("embed-" + hex(key) + ".bin");
    std::ifstream in(file, std::ios::binary);
    if (in) {
      *cached = true;
      return read_embedding_binary(in);
    }
  }
  EmbeddingMatrix m = train_embedding(g, cfg).embedding;
  if (cache_dir) {
    std::filesystem::create_directories(*cache_dir);
    std::filesystem::path partial = file;
    partial += "." + hex(std::hash<std::thread::id>{}(std::this_thread::get_id())) + ".tmp";
    {
      std::ofstream out(partial, std::ios::binary);
      if (!out) fail(ErrorKind::kIo, "cannot write cache file " + partial.string());
      write_embedding_binary(out, m);
    }
    std::filesystem::rename(partial, file);
  }
  return m;
}

std::uint64_t scaled_count(std::uint64_t positives, double ratio) {
  return static_cast<std::uint64_t>(std::llround(static_cast<double>(positives) * ratio));
}

MetricRow degree_product_baseline(const Graph& train, const EdgeList& pairs, std::span<const std::uint8_t> labels) {
  std::vector<double> scores(pairs.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    scores[i] = static_cast<double>(train.degree(pairs[i].first)) * static_cast<double>(train.degree(pairs[i].second));
    peak = std::max(peak, scores[i]);
  }
  if (peak > 0.0) {
    for (double& s : scores) s /= peak;
  }
  return compute_metrics(labels, scores);
}

EmbedConfig holdout_embedding(const PipelineConfig& cfg, std::uint64_t repeat) {
  EmbedConfig e = cfg.embed;
  e.walks.seed = derive_seed(cfg.embed.walks.seed, repeat);
  e.train.seed = derive_seed(cfg.embed.train.seed, repeat);
  return e;
}

HoldoutResult edge_holdout(const Graph& g, const PipelineConfig& cfg, std::uint64_t repeat) {
  HoldoutResult result;
  result.repeat = repeat;
  EdgeSplit split = run_stage("split", [&] { return split_edges(g, cfg.holdouts, repeat); });
  result.flagged = split.forest_exceeds_budget;
  result.train_positives = split.train_edges.size();
  result.test_positives = split.test_edges.size();

  const EmbeddingMatrix embedding = run_stage(
      "embed", [&] { return embed(split.train, holdout_embedding(cfg, repeat), cfg.cache_dir, &result.embedding_cached); });

  Rng rng(derive_seed(cfg.holdouts.seed, repeat + 1, 0x6e6567));
  EdgeList train_pairs = split.train_edges;
  EdgeList test_pairs = split.test_edges;
  std::vector<std::uint8_t> train_labels(train_pairs.size(), 1);
  run_stage("negatives", [&] {
    const double ratio = cfg.holdouts.unbalance_ratio;
    const std::uint64_t pool = non_edge_count(g);
    std::uint64_t train_count = scaled_count(train_pairs.size(), ratio);
    std::uint64_t test_count = scaled_count(test_pairs.size(), ratio);
    if (train_count + test_count > pool) {
      result.negatives_capped = true;
      train_count = std::min(train_count, pool);
      test_count = std::min(test_count, pool - train_count);
    }
    const EdgeList train_negatives = sample_negative_edges(g, train_count, cfg.holdouts.negative_policy, rng);
    std::vector<std::uint64_t> exclude;
    exclude.reserve(train_negatives.size());
    for (const auto& [a, b] : train_negatives) exclude.push_back(pair_key(a, b, g.directed()));
    const EdgeList test_negatives =
        sample_negative_edges(g, test_count, cfg.holdouts.negative_policy, rng, &exclude);
    train_pairs.insert(train_pairs.end(), train_negatives.begin(), train_negatives.end());
    train_labels.resize(train_pairs.size(), 0);
    test_pairs.insert(test_pairs.end(), test_negatives.begin(), test_negatives.end());
    result.test_negatives = test_negatives.size();
    return 0;
  });
  result.labels.assign(result.test_positives, 1);
  result.labels.resize(test_pairs.size(), 0);

  // interleave classes so minibatches are not single-class
  for (std::size_t i = train_pairs.size(); i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(train_pairs[i - 1], train_pairs[j]);
    std::swap(train_labels[i - 1], train_labels[j]);
  }

  Perceptron model(output_dimension(cfg.edge_operator, embedding.dim()));
  run_stage("fit", [&] {
    EdgeFeatureStream features(embedding, cfg.edge_operator, train_pairs);
    model.fit(features, train_labels, cfg.classifier);
    return 0;
  });
  result.scores = run_stage("predict", [&] {
    EdgeFeatureStream features(embedding, cfg.edge_operator, test_pairs);
    return model.predict(features);
  });
  result.metrics = run_stage("metrics", [&] { return compute_metrics(result.labels, result.scores); });
  if (cfg.baseline) {
    result.baseline = run_stage("baseline", [&] { return degree_product_baseline(split.train, test_pairs, result.labels); });
  }
  return result;
}

std::vector<MetricSummary> summarize(const std::vector<HoldoutResult>& holdouts, bool baseline) {
  std::vector<MetricSummary> out;
  for (const std::string& name : metric_names()) {
    MetricSummary s{name, 0.0, 0.0, 0};
    std::vector<double> values;
    for (const HoldoutResult& h : holdouts) {
      if (baseline && !h.baseline) continue;
      if (const auto v = metric_value(baseline ? *h.baseline : h.metrics, name)) values.push_back(*v);
    }
    s.count = values.size();
    if (!values.empty()) {
      double total = 0.0;
      for (const double v : values) total += v;
      s.mean = total / static_cast<double>(values.size());
      if (values.size() > 1) {
        double squares = 0.0;
        for (const double v : values) squares += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(squares / static_cast<double>(values.size() - 1));
      }
    }
    out.push_back(s);
  }
  return out;
}

void validate_pipeline(const PipelineConfig& cfg) {
  run_stage("config", [&] {
    cfg.holdouts.validate();
    cfg.embed.walks.validate();
    cfg.embed.train.validate();
    if (cfg.classifier.epochs == 0 || cfg.classifier.minibatch == 0) {
      fail(ErrorKind::kConfig, "classifier epochs and minibatch must be positive");
    }
    return 0;
  });
}

/// One-vs-rest macro average for more than two classes.
MetricRow multiclass_metrics(std::span<const std::int32_t> truth, const std::vector<std::vector<double>>& probs,
                             std::uint64_t classes) {
  const std::size_t n = truth.size();
  std::vector<bool> present(classes, false);
  for (const auto t : truth) present[static_cast<std::size_t>(t)] = true;
  const auto present_count = static_cast<std::uint64_t>(std::count(present.begin(), present.end(), true));

  MetricRow macro;
  std::uint64_t correct = 0;
  std::vector<std::uint64_t> hits(classes, 0);
  std::vector<std::uint64_t> totals(classes, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto predicted = static_cast<std::int32_t>(std::max_element(probs[i].begin(), probs[i].end()) - probs[i].begin());
    ++totals[static_cast<std::size_t>(truth[i])];
    if (predicted == truth[i]) {
      ++correct;
      ++hits[static_cast<std::size_t>(truth[i])];
    }
  }
  double auroc_sum = 0.0;
  double auprc_sum = 0.0;
  std::uint64_t ranked = 0;
  std::vector<std::uint8_t> labels(n);
  std::vector<double> scores(n);
  for (std::uint64_t k = 0; k < classes; ++k) {
    if (!present[k]) continue;
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = truth[i] == static_cast<std::int32_t>(k) ? 1 : 0;
      double total = 0.0;
      for (const double p : probs[i]) total += p;
      scores[i] = total > 0.0 ? probs[i][k] / total : 0.0;
    }
    const MetricRow r = compute_metrics(labels, scores);
    macro.f1 += r.f1;
    macro.precision += r.precision;
    macro.recall += r.recall;
    macro.miss_rate += r.miss_rate;
    macro.markedness += r.markedness;
    macro.diagnostic_odds_ratio += r.diagnostic_odds_ratio;
    macro.mcc += r.mcc;
    macro.true_positives += r.true_positives;
    macro.false_positives += r.false_positives;
    macro.true_negatives += r.true_negatives;
    macro.false_negatives += r.false_negatives;
    if (r.auroc) {
      auroc_sum += *r.auroc;
      auprc_sum += *r.auprc;
      ++ranked;
    }
  }
  const auto k = static_cast<double>(std::max<std::uint64_t>(present_count, 1));
  macro.f1 /= k;
  macro.precision /= k;
  macro.recall /= k;
  macro.miss_rate /= k;
  macro.markedness /= k;
  macro.diagnostic_odds_ratio /= k;
  macro.mcc /= k;
  macro.accuracy = n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n);
  double recall_sum = 0.0;
  for (std::uint64_t c = 0; c < classes; ++c) {
    if (totals[c] > 0) recall_sum += static_cast<double>(hits[c]) / static_cast<double>(totals[c]);
  }
  macro.balanced_accuracy = recall_sum / k;
  macro.degenerate = present_count < 2;
  if (ranked > 0 && !macro.degenerate) {
    macro.auroc = auroc_sum / static_cast<double>(ranked);
    macro.auprc = auprc_sum / static_cast<double>(ranked);
  }
  return macro;
}

}  // namespace

PipelineConfig smoke_config(PipelineConfig cfg) {
  cfg.smoke = true;
  cfg.embed.train.dim = std::min<std::uint64_t>(cfg.embed.train.dim, 8);
  cfg.embed.train.epochs = 1;
  cfg.embed.walks.walk_length = std::min<std::uint64_t>(cfg.embed.walks.walk_length, 10);
  cfg.embed.walks.iterations = 1;
  cfg.classifier.epochs = std::min<std::uint64_t>(cfg.classifier.epochs, 5);
  cfg.holdouts.repeats = std::min<std::uint64_t>(cfg.holdouts.repeats, 2);
  return cfg;
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> kNames = {
      "auroc",     "auprc",  "accuracy",   "balanced_accuracy",     "f1",  "precision",
      "recall",    "miss_rate", "markedness", "diagnostic_odds_ratio", "mcc",
  };
  return kNames;
}

std::optional<double> metric_value(const MetricRow& row, const std::string& name) {
  if (name == "auroc") return row.auroc;
  if (name == "auprc") return row.auprc;
  if (name == "accuracy") return row.accuracy;
  if (name == "balanced_accuracy") return row.balanced_accuracy;
  if (name == "f1") return row.f1;
  if (name == "precision") return row.precision;
  if (name == "recall") return row.recall;
  if (name == "miss_rate") return row.miss_rate;
  if (name == "markedness") return row.markedness;
  if (name == "diagnostic_odds_ratio") return row.diagnostic_odds_ratio;
  if (name == "mcc") return row.mcc;
  fail(ErrorKind::kConfig, "unknown metric '" + name + "'");
}

EvaluationReport run_edge_prediction_pipeline(const Graph& g, const PipelineConfig& input) {
  const PipelineConfig cfg = input.smoke ? smoke_config(input) : input;
  validate_pipeline(cfg);
  if (g.edge_count() == 0) throw StageError("split", Error(ErrorKind::kConfig, "graph has no edges"));
  PipelineConfig inner = cfg;
  const unsigned workers = resolve_threads(cfg.threads);
  if (workers > 1) inner.embed.walks.threads = 1;

  EvaluationReport report;
  report.task = "edge_prediction";
  report.holdouts.resize(cfg.holdouts.repeats);
  parallel_for(cfg.holdouts.repeats, workers,
               [&](std::uint64_t r) { report.holdouts[r] = edge_holdout(g, inner, r); });
  report.summary = summarize(report.holdouts, false);
  if (cfg.baseline) report.baseline_summary = summarize(report.holdouts, true);
  return report;
}

EvaluationReport run_node_label_pipeline(const Graph& g, const PipelineConfig& input) {
  const PipelineConfig cfg = input.smoke ? smoke_config(input) : input;
  validate_pipeline(cfg);
  if (!g.has_node_labels()) throw StageError("config", Error(ErrorKind::kConfig, "graph has no node labels"));
  const auto labels = g.node_labels();
  std::uint64_t classes = g.label_names().size();
  for (const auto l : labels) {
    if (l != kNoLabel) classes = std::max<std::uint64_t>(classes, static_cast<std::uint64_t>(l) + 1);
  }

  EvaluationReport report;
  report.task = "node_label";
  bool cached = false;
  const EmbeddingMatrix embedding = run_stage("embed", [&] { return embed(g, cfg.embed, cfg.cache_dir, &cached); });
  report.holdouts.resize(cfg.holdouts.repeats);
  parallel_for(cfg.holdouts.repeats, cfg.threads, [&](std::uint64_t r) {
    HoldoutResult& result = report.holdouts[r];
    result.repeat = r;
    result.embedding_cached = cached;
    const NodeSplit split = run_stage("split", [&] { return split_nodes(labels, cfg.holdouts, r); });
    std::vector<NodeId> train_nodes = split.train;
    Rng rng(derive_seed(cfg.holdouts.seed, r + 1, 0x6e6f6465));
    for (std::size_t i = train_nodes.size(); i > 1; --i) std::swap(train_nodes[i - 1], train_nodes[rng.below(i)]);
    std::vector<std::int32_t> train_labels(train_nodes.size());
    for (std::size_t i = 0; i < train_nodes.size(); ++i) train_labels[i] = labels[train_nodes[i]];
    result.train_positives = train_nodes.size();
    result.test_positives = split.test.size();

    MulticlassPerceptron model(embedding.dim(), classes, cfg.classifier.softmax);
    run_stage("fit", [&] {
      RowFeatureSource features(embedding, train_nodes);
      model.fit(features, train_labels, cfg.classifier);
      return 0;
    });
    std::vector<std::vector<double>> probs(split.test.size(), std::vector<double>(classes));
    std::vector<std::int32_t> truth(split.test.size());
    run_stage("predict", [&] {
      for (std::size_t i = 0; i < split.test.size(); ++i) {
        model.predict(embedding.row(split.test[i]), probs[i]);
        truth[i] = labels[split.test[i]];
      }
      return 0;
    });
    result.metrics = run_stage("metrics", [&] {
      if (classes == 2) {
        result.labels.resize(truth.size());
        result.scores.resize(truth.size());
        for (std::size_t i = 0; i < truth.size(); ++i) {
          result.labels[i] = truth[i] == 1 ? 1 : 0;
          const double total = probs[i][0] + probs[i][1];
          result.scores[i] = total > 0.0 ? probs[i][1] / total : 0.5;
        }
        return compute_metrics(result.labels, result.scores);
      }
      return multiclass_metrics(truth, probs, classes);
    });
  });
  report.summary = summarize(report.holdouts, false);
  return report;
}

namespace {

void put(std::ostream& out, std::optional<double> v) {
  if (v) {
    out << *v;
  } else {
    out << "nan";
  }
}

}  // namespace

std::string report_tsv(const EvaluationReport& report) {
  std::ostringstream out;
  out.precision(10);
  const bool baseline = !report.baseline_summary.empty();
  out << "holdout";
  for (const auto& name : metric_names()) out << '\t' << name;
  out << "\ttrain_positives\ttest_positives\ttest_negatives\tflagged";
  if (baseline) out << "\tbaseline_auroc";
  out << '\n';
  for (const HoldoutResult& h : report.holdouts) {
    out << h.repeat;
    for (const auto& name : metric_names()) {
      out << '\t';
      put(out, metric_value(h.metrics, name));
    }
    out << '\t' << h.train_positives << '\t' << h.test_positives << '\t' << h.test_negatives << '\t'
        << (h.flagged ? 1 : 0);
    if (baseline) {
      out << '\t';
      put(out, h.baseline ? h.baseline->auroc : std::nullopt);
    }
    out << '\n';
  }
  const auto aggregate_row = [&](const char* label, bool use_std) {
    out << label;
    for (const MetricSummary& s : report.summary) {
      out << '\t';
      put(out, s.count == 0 ? std::nullopt : std::optional<double>(use_std ? s.std : s.mean));
    }
    out << "\t\t\t\t";
    if (baseline) {
      out << '\t';
      const MetricSummary& b = report.baseline_summary.front();
      put(out, b.count == 0 ? std::nullopt : std::optional<double>(use_std ? b.std : b.mean));
    }
    out << '\n';
  };
  aggregate_row("mean", false);
  aggregate_row("std", true);
  return out.str();
}

std::string report_key_values(const EvaluationReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "task=" << report.task << '\n' << "holdouts=" << report.holdouts.size() << '\n';
  for (const HoldoutResult& h : report.holdouts) {
    const std::string prefix = "holdout." + std::to_string(h.repeat) + '.';
    for (const auto& name : metric_names()) {
      out << prefix << name << '=';
      put(out, metric_value(h.metrics, name));
      out << '\n';
    }
    out << prefix << "degenerate=" << (h.metrics.degenerate ? "true" : "false") << '\n'
        << prefix << "flagged=" << (h.flagged ? "true" : "false") << '\n'
        << prefix << "train_positives=" << h.train_positives << '\n'
        << prefix << "test_positives=" << h.test_positives << '\n'
        << prefix << "test_negatives=" << h.test_negatives << '\n';
    if (h.baseline) {
      out << prefix << "baseline_auroc=";
      put(out, h.baseline->auroc);
      out << '\n';
    }
  }
  for (const MetricSummary& s : report.summary) {
    out << "mean." << s.name << '=';
    put(out, s.count == 0 ? std::nullopt : std::optional<double>(s.mean));
    out << '\n' << "std." << s.name << '=';
    put(out, s.count == 0 ? std::nullopt : std::optional<double>(s.std));
    out << '\n';
  }
  for (const MetricSummary& s : report.baseline_summary) {
    out << "baseline.mean." << s.name << '=';
    put(out, s.count == 0 ? std::nullopt : std::optional<double>(s.mean));
    out << '\n';
  }
  return out.str();
}

std::uint64_t content_hash(std::string_view bytes, std::uint64_t seed) noexcept {
  std::uint64_t h = seed;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace efg
