#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "efgraph/edge_features.hpp"
#include "efgraph/embedding.hpp"
#include "efgraph/evaluation.hpp"
#include "efgraph/graph.hpp"

namespace efg {

struct PipelineConfig {
  EmbedConfig embed;
  ClassifierConfig classifier;
  EdgeOperator edge_operator = EdgeOperator::kHadamard;
  HoldoutSpec holdouts;
  /// Tiny dimensions, epochs, walks and at most two holdouts.
  bool smoke = false;
  /// Stage artifacts are reused from here when set.
  std::optional<std::filesystem::path> cache_dir;
  /// Holdouts evaluated concurrently (0 = hardware parallelism).
  unsigned threads = 0;
  /// Also score the degree-product heuristic on every holdout.
  bool baseline = true;
};

/// Caps every size for quick end-to-end runs.
PipelineConfig smoke_config(PipelineConfig cfg);

struct HoldoutResult {
  std::uint64_t repeat = 0;
  MetricRow metrics;
  std::optional<MetricRow> baseline;
  std::uint64_t train_positives = 0;
  std::uint64_t test_positives = 0;
  std::uint64_t test_negatives = 0;
  /// Connected split could not honour the train fraction.
  bool flagged = false;
  /// The graph had fewer non-edges than the unbalance ratio asks for.
  bool negatives_capped = false;
  bool embedding_cached = false;
  std::vector<std::uint8_t> labels;
  std::vector<double> scores;
};

struct MetricSummary {
  std::string name;
  double mean = 0.0;
  double std = 0.0;
  /// Holdouts that defined the metric.
  std::uint64_t count = 0;
};

struct EvaluationReport {
  std::string task;
  std::vector<HoldoutResult> holdouts;
  std::vector<MetricSummary> summary;
  std::vector<MetricSummary> baseline_summary;
};

/// Metric names in report column order.
const std::vector<std::string>& metric_names();
/// Named metric of a row; nullopt for an undefined ranking metric.
std::optional<double> metric_value(const MetricRow& row, const std::string& name);

/// Per holdout: split, embed the training graph only, sample negatives
/// against the full graph, fit the perceptron on edge features and score
/// the test edges. Stage failures are rethrown as StageError.
EvaluationReport run_edge_prediction_pipeline(const Graph& g, const PipelineConfig& cfg);

/// Node classification over labeled nodes; the embedding is trained once on
/// the whole graph because it never sees the labels. kConfig without labels.
EvaluationReport run_node_label_pipeline(const Graph& g, const PipelineConfig& cfg);

/// Tab-separated: one row per holdout, then mean and std rows.
std::string report_tsv(const EvaluationReport& report);
/// key=value lines.
std::string report_key_values(const EvaluationReport& report);

/// 64-bit FNV-1a.
std::uint64_t content_hash(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

}  // namespace efg
