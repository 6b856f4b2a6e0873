#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "efgraph/edge_features.hpp"
#include "efgraph/graph.hpp"
#include "efgraph/random.hpp"

namespace efg {

enum class HoldoutSchema : std::uint8_t { kKFold, kMonteCarlo, kConnectedMonteCarlo };
enum class NegativePolicy : std::uint8_t { kUniform, kScaleFree };

std::string_view to_string(HoldoutSchema schema) noexcept;
/// Accepts kfold, monte_carlo, connected_monte_carlo.
HoldoutSchema parse_holdout_schema(std::string_view name);
std::string_view to_string(NegativePolicy policy) noexcept;
/// Accepts uniform, scale_free.
NegativePolicy parse_negative_policy(std::string_view name);

struct HoldoutSpec {
  HoldoutSchema schema = HoldoutSchema::kConnectedMonteCarlo;
  /// Ignored by kfold, whose test share is 1 / repeats.
  double train_fraction = 0.8;
  /// Holdouts, or folds for kfold.
  std::uint64_t repeats = 10;
  /// Keep per-label proportions: edge types for edge splits, node labels for
  /// node splits. Applies to monte_carlo and kfold.
  bool stratify = false;
  NegativePolicy negative_policy = NegativePolicy::kUniform;
  /// Negatives per positive.
  double unbalance_ratio = 1.0;
  /// Raise kInfeasible instead of flagging when a spanning forest does not
  /// fit into the training share.
  bool strict = false;
  std::uint64_t seed = 42;

  void validate() const;
};

/// Unique edges: each undirected edge once with source <= destination.
struct EdgeTable {
  EdgeList edges;
  std::vector<float> weights;
  std::vector<std::uint32_t> types;
};
EdgeTable unique_edges(const Graph& g);

struct EdgeSplit {
  Graph train;
  EdgeList train_edges;
  EdgeList test_edges;
  /// The spanning forest left fewer test edges than the train fraction asks for.
  bool forest_exceeds_budget = false;
  std::uint64_t repeat = 0;
};

/// Holdout number `repeat` (fold index for kfold). Deterministic in
/// (spec.seed, repeat). Throws kInfeasible under spec.strict when the forest
/// does not fit, kRange for a fold index >= repeats.
EdgeSplit split_edges(const Graph& g, const HoldoutSpec& spec, std::uint64_t repeat);

struct NodeSplit {
  std::vector<NodeId> train;
  std::vector<NodeId> test;
};

/// Splits the nodes with a label (kNoLabel entries are skipped). Always
/// stratified by label; connected_monte_carlo behaves like monte_carlo.
NodeSplit split_nodes(std::span<const std::int32_t> labels, const HoldoutSpec& spec, std::uint64_t repeat);

/// Canonical 64-bit key of a node pair (ordered for directed graphs).
std::uint64_t pair_key(NodeId a, NodeId b, bool directed) noexcept;

/// Node pairs that are neither edges nor self pairs.
std::uint64_t non_edge_count(const Graph& g) noexcept;

/// `count` distinct non-edges of g, without self pairs and without pairs in
/// `exclude` (keys from pair_key). Throws kInfeasible when fewer exist.
EdgeList sample_negative_edges(const Graph& g, std::uint64_t count, NegativePolicy policy, Rng& rng,
                               const std::vector<std::uint64_t>* exclude = nullptr);

struct MetricRow {
  std::optional<double> auroc;
  std::optional<double> auprc;
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double miss_rate = 0.0;
  double markedness = 0.0;
  double diagnostic_odds_ratio = 0.0;
  double mcc = 0.0;
  std::uint64_t true_positives = 0;
  std::uint64_t false_positives = 0;
  std::uint64_t true_negatives = 0;
  std::uint64_t false_negatives = 0;
  /// Only one class present: ranking metrics are absent and balanced
  /// accuracy averages the classes that exist.
  bool degenerate = false;
};

inline constexpr double kDecisionThreshold = 0.5;

/// Labels are 0 or 1. Throws kShape on a length mismatch.
MetricRow compute_metrics(std::span<const std::uint8_t> labels, std::span<const double> scores);

/// Mann-Whitney rank statistic with mid-ranks for ties; kDegenerate on one class.
double auroc(std::span<const std::uint8_t> labels, std::span<const double> scores);
/// Trapezoidal area under the ROC curve; kDegenerate on one class.
double auroc_trapezoid(std::span<const std::uint8_t> labels, std::span<const double> scores);
/// Step-wise precision-recall integration; kDegenerate on one class.
double auprc(std::span<const std::uint8_t> labels, std::span<const double> scores);

struct NadamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

/// Nadam state for one parameter vector.
class Nadam {
 public:
  Nadam(std::size_t size, const NadamConfig& cfg);
  void step(std::span<double> params, std::span<const double> grad);
  std::uint64_t steps() const noexcept { return t_; }

 private:
  NadamConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t t_ = 0;
};

struct ClassifierConfig {
  NadamConfig optimizer;
  std::uint64_t epochs = 100;
  std::uint64_t minibatch = 32;
  /// Multiclass mode: softmax rows instead of independent one-vs-rest sigmoids.
  bool softmax = false;
};

/// Single-layer sigmoid classifier trained on streamed feature batches.
class Perceptron {
 public:
  explicit Perceptron(std::uint64_t dim);

  /// Labels are indexed by stream row. Throws kDivergence naming the epoch.
  void fit(FeatureSource& features, std::span<const std::uint8_t> labels, const ClassifierConfig& cfg);
  double predict(std::span<const float> x) const noexcept;
  std::vector<double> predict(FeatureSource& features) const;

  std::span<const double> weights() const noexcept { return weights_; }
  double bias() const noexcept { return weights_.back(); }

 private:
  std::vector<double> weights_;  // dim weights followed by the bias
};

/// One weight row per class; one-vs-rest sigmoids or a softmax.
class MulticlassPerceptron {
 public:
  MulticlassPerceptron(std::uint64_t dim, std::uint64_t classes, bool softmax);

  /// Labels in [0, classes). Throws kDivergence naming the epoch.
  void fit(FeatureSource& features, std::span<const std::int32_t> labels, const ClassifierConfig& cfg);
  /// Class probabilities (softmax) or independent one-vs-rest scores.
  void predict(std::span<const float> x, std::span<double> out) const noexcept;
  std::uint64_t classes() const noexcept { return classes_; }

 private:
  std::uint64_t dim_;
  std::uint64_t classes_;
  bool softmax_;
  std::vector<double> weights_;  // classes x (dim + 1)
};

}  // namespace efg
