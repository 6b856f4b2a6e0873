#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "efgraph/graph.hpp"
#include "efgraph/random.hpp"

namespace efg {

struct WalkConfig {
  double return_p = 1.0;
  double in_out_q = 1.0;
  /// Nodes per walk, including the start node.
  std::uint64_t walk_length = 100;
  std::uint64_t iterations = 1;
  /// Neighborhoods larger than this are sub-sampled to this many candidates.
  std::optional<std::uint64_t> degree_threshold;
  std::uint64_t seed = 42;
  unsigned threads = 0;
  /// Source nodes per generated batch.
  std::uint64_t batch_nodes = 1024;

  /// Throws kConfig on p <= 0, q <= 0, walk_length == 0 or threshold < 2.
  void validate() const;
};

/// Below this length the cumulative distribution is scanned linearly.
inline constexpr std::size_t kLinearScanThreshold = 128;

/// Index i with probability weights[i] / sum(weights). Throws kDistribution
/// on empty, negative, non-finite or all-zero weights.
std::size_t sample_from_weights(std::span<const double> weights, Rng& rng);

/// Locates a uniform draw in an un-normalized cumulative sum. No validation.
std::size_t sample_cumulative(std::span<const double> cumulative, Rng& rng) noexcept;

/// Sorted unique sub-sampling: k strictly increasing indices from [0, n),
/// one uniform draw per bucket [floor(j n / k), floor((j + 1) n / k)).
/// Returns [0, n) when k >= n.
std::vector<std::uint64_t> suss_subsample(std::uint64_t n, std::uint64_t k, Rng& rng);
void suss_subsample(std::uint64_t n, std::uint64_t k, Rng& rng, std::vector<std::uint64_t>& out);

/// One of the eight specialized second-order walkers. Bit 0: return bias
/// (p != 1), bit 1: in-out bias (q != 1), bit 2: weighted graph.
enum class WalkerKind : std::uint8_t {
  kUniform = 0,
  kReturn = 1,
  kInOut = 2,
  kReturnInOut = 3,
  kWeighted = 4,
  kReturnWeighted = 5,
  kInOutWeighted = 6,
  kReturnInOutWeighted = 7,
};

std::string_view to_string(WalkerKind kind) noexcept;
WalkerKind select_walker_kind(bool weighted, double return_p, double in_out_q) noexcept;

/// Reusable per-thread buffers; sized by the largest neighborhood visited.
struct WalkScratch {
  std::vector<NodeId> neighbors;
  std::vector<NodeId> previous_neighbors;
  std::vector<NodeId> candidates;
  std::vector<float> candidate_weights;
  std::vector<std::uint64_t> subsample;
  std::vector<double> cumulative;

  std::size_t capacity_entries() const noexcept;
};

/// Walker bound to a graph and a parameter set.
class Walker {
 public:
  Walker(const Graph& g, const WalkConfig& cfg);
  /// Forces a specialization; used to compare every path with the general one.
  Walker(const Graph& g, const WalkConfig& cfg, WalkerKind kind);

  WalkerKind kind() const noexcept { return kind_; }
  const Graph& graph() const noexcept { return *graph_; }

  /// Next node after `current`, reached from `previous` (nullopt on the
  /// first step). `current` must have out-degree >= 1.
  NodeId step(std::optional<NodeId> previous, NodeId current, Rng& rng, WalkScratch& scratch) const;

  /// Exact (never sub-sampled) normalized next-step distribution over
  /// neighbors(current), computed by this walker's bias code.
  void transition_probabilities(NodeId previous, NodeId current, std::vector<double>& out) const;

  /// Fills `out` (capacity >= walk_length) and returns the walk length.
  std::size_t walk(NodeId start, Rng& rng, WalkScratch& scratch, NodeId* out) const;

  struct Params {
    const Graph* graph;
    double inv_p;
    double inv_q;
    std::uint64_t degree_threshold;  // 0 = exact
  };

 private:
  using StepFn = NodeId (*)(const Params&, std::optional<NodeId>, NodeId, Rng&, WalkScratch&);
  using ProbFn = void (*)(const Params&, NodeId, NodeId, WalkScratch&, std::vector<double>&);

  const Graph* graph_;
  WalkConfig cfg_;
  WalkerKind kind_;
  Params params_;
  StepFn step_;
  ProbFn probabilities_;
};

/// Reference path: evaluates every bias for every candidate regardless of p, q
/// and weightedness.
void general_transition_probabilities(const Graph& g, NodeId previous, NodeId current, double return_p,
                                      double in_out_q, std::vector<double>& out);

/// One second-order step; throws kContract unless (previous, current) is an edge
/// and current has a successor.
NodeId second_order_step(const Graph& g, NodeId previous, NodeId current, const WalkConfig& cfg, Rng& rng);

/// Uniform (or weight-proportional) walk ignoring p and q; stops at sinks.
std::vector<NodeId> first_order_walk(const Graph& g, NodeId start, const WalkConfig& cfg, Rng& rng);
std::vector<NodeId> second_order_walk(const Graph& g, NodeId start, const WalkConfig& cfg, Rng& rng);
/// Requires cfg.degree_threshold.
std::vector<NodeId> approximated_walk(const Graph& g, NodeId start, const WalkConfig& cfg, Rng& rng);

/// Walks as rows of a flat array. Rows are truncated at sink nodes.
struct WalkBatch {
  std::vector<NodeId> nodes;
  std::vector<std::uint64_t> offsets{0};
  std::uint64_t iteration = 0;

  std::size_t rows() const noexcept { return offsets.size() - 1; }
  std::span<const NodeId> row(std::size_t i) const noexcept {
    return {nodes.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }
  void clear() {
    nodes.clear();
    offsets.assign(1, 0);
  }
};

/// Seed of the walk from `source` in `iteration`; independent of scheduling.
constexpr std::uint64_t walk_seed(std::uint64_t seed, NodeId source, std::uint64_t iteration) noexcept {
  return derive_seed(seed, source, iteration + 1);
}

/// Lazily yields iterations x |V| walks, one batch of source nodes at a time,
/// iteration-major. Within a batch walks are generated in parallel; row order
/// is always source order.
class WalkStream {
 public:
  WalkStream(const Graph& g, const WalkConfig& cfg);

  bool next(WalkBatch& batch);
  void reset() noexcept { cursor_ = 0; }
  std::uint64_t total_walks() const noexcept { return cfg_.iterations * graph_->node_count(); }
  const WalkConfig& config() const noexcept { return cfg_; }

 private:
  const Graph* graph_;
  WalkConfig cfg_;
  Walker walker_;
  std::uint64_t cursor_ = 0;  // global walk index
  std::vector<NodeId> slots_;
  std::vector<std::uint64_t> lengths_;
};

}  // namespace efg
