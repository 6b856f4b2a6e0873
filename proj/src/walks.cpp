#include "efgraph/walks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "efgraph/error.hpp"
#include "efgraph/parallel.hpp"

namespace efg {

void WalkConfig::validate() const {
  if (!(return_p > 0.0) || !std::isfinite(return_p)) fail(ErrorKind::kConfig, "return parameter p must be positive");
  if (!(in_out_q > 0.0) || !std::isfinite(in_out_q)) fail(ErrorKind::kConfig, "in-out parameter q must be positive");
  if (walk_length == 0) fail(ErrorKind::kConfig, "walk length must be at least 1");
  if (degree_threshold && *degree_threshold < 2) fail(ErrorKind::kConfig, "degree threshold must be at least 2");
  if (batch_nodes == 0) fail(ErrorKind::kConfig, "batch size must be positive");
}

std::size_t sample_cumulative(std::span<const double> cumulative, Rng& rng) noexcept {
  const std::size_t n = cumulative.size();
  const double target = rng.uniform() * cumulative.back();
  std::size_t idx = n;
  if (n < kLinearScanThreshold) {
    for (std::size_t i = 0; i < n; ++i) {
      if (cumulative[i] > target) {
        idx = i;
        break;
      }
    }
  } else {
    idx = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), target) - cumulative.begin());
  }
  if (idx == n) {
    // rounding put the draw on the total; take the last positive entry
    idx = n - 1;
    while (idx > 0 && cumulative[idx - 1] == cumulative[idx]) --idx;
  }
  return idx;
}

std::size_t sample_from_weights(std::span<const double> weights, Rng& rng) {
  if (weights.empty()) fail(ErrorKind::kDistribution, "cannot sample from an empty distribution");
  std::vector<double> cumulative(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i]) || weights[i] < 0.0) {
      fail(ErrorKind::kDistribution, "weight " + std::to_string(i) + " is negative or not finite");
    }
    total += weights[i];
    cumulative[i] = total;
  }
  if (!(total > 0.0)) fail(ErrorKind::kDistribution, "all weights are zero");
  return sample_cumulative(cumulative, rng);
}

void suss_subsample(std::uint64_t n, std::uint64_t k, Rng& rng, std::vector<std::uint64_t>& out) {
  out.clear();
  if (k >= n) {
    out.resize(n);
    std::iota(out.begin(), out.end(), std::uint64_t{0});
    return;
  }
  out.resize(k);
  for (std::uint64_t j = 0; j < k; ++j) {
    const auto lo = static_cast<std::uint64_t>(static_cast<__uint128_t>(j) * n / k);
    const auto hi = static_cast<std::uint64_t>(static_cast<__uint128_t>(j + 1) * n / k);
    out[j] = lo + rng.below(hi - lo);
  }
}

std::vector<std::uint64_t> suss_subsample(std::uint64_t n, std::uint64_t k, Rng& rng) {
  std::vector<std::uint64_t> out;
  suss_subsample(n, k, rng, out);
  return out;
}

std::string_view to_string(WalkerKind kind) noexcept {
  static constexpr std::array<std::string_view, 8> kNames = {
      "uniform",        "return",          "in_out",          "return_in_out",
      "weighted",       "return_weighted", "in_out_weighted", "return_in_out_weighted",
  };
  return kNames[static_cast<std::size_t>(kind)];
}

WalkerKind select_walker_kind(bool weighted, double return_p, double in_out_q) noexcept {
  unsigned bits = 0;
  if (return_p != 1.0) bits |= 1U;
  if (in_out_q != 1.0) bits |= 2U;
  if (weighted) bits |= 4U;
  return static_cast<WalkerKind>(bits);
}

std::size_t WalkScratch::capacity_entries() const noexcept {
  return neighbors.capacity() + previous_neighbors.capacity() + candidates.capacity() + candidate_weights.capacity() +
         subsample.capacity() + cumulative.capacity();
}

namespace {

using Params = Walker::Params;

struct Candidates {
  std::span<const NodeId> nodes;
  std::span<const float> weights;
};

/// Multiplies by 1/q every candidate outside N(t) and different from t.
void apply_in_out(const Graph& g, NodeId t, std::span<const NodeId> candidates, double inv_q, double* probs,
                  WalkScratch& scratch) {
  const std::uint64_t t_degree = g.degree(t);
  if (t_degree <= 8 * candidates.size() + 64) {
    // sorted difference N(v) \ N(t)
    const auto t_neighbors = g.neighbors(t, scratch.previous_neighbors);
    std::size_t j = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const NodeId x = candidates[i];
      while (j < t_neighbors.size() && t_neighbors[j] < x) ++j;
      const bool adjacent = x == t || (j < t_neighbors.size() && t_neighbors[j] == x);
      if (!adjacent) probs[i] *= inv_q;
    }
  } else {
    // N(t) much larger than the candidate set: probe it per candidate
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const NodeId x = candidates[i];
      if (x != t && !g.has_edge(t, x)) probs[i] *= inv_q;
    }
  }
}

/// Multiplies by 1/p the candidate equal to t, found by binary search.
void apply_return(NodeId t, std::span<const NodeId> candidates, double inv_p, double* probs) {
  const auto it = std::lower_bound(candidates.begin(), candidates.end(), t);
  if (it != candidates.end() && *it == t) probs[it - candidates.begin()] *= inv_p;
}

Candidates subsampled_candidates(const Graph& g, std::uint64_t begin, std::uint64_t degree, std::uint64_t k,
                                 bool with_weights, Rng& rng, WalkScratch& scratch) {
  suss_subsample(degree, k, rng, scratch.subsample);
  scratch.candidates.resize(k);
  for (std::uint64_t j = 0; j < k; ++j) scratch.candidates[j] = g.destination(begin + scratch.subsample[j]);
  Candidates c{scratch.candidates, {}};
  if (with_weights) {
    scratch.candidate_weights.resize(k);
    for (std::uint64_t j = 0; j < k; ++j) scratch.candidate_weights[j] = g.weight(begin + scratch.subsample[j]);
    c.weights = scratch.candidate_weights;
  }
  return c;
}

std::size_t sample_weights(std::span<const float> weights, Rng& rng, WalkScratch& scratch) {
  scratch.cumulative.resize(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    total += static_cast<double>(weights[i]);
    scratch.cumulative[i] = total;
  }
  return sample_cumulative(scratch.cumulative, rng);
}

template <bool kReturn, bool kInOut, bool kWeighted>
NodeId step_impl(const Params& params, std::optional<NodeId> previous, NodeId current, Rng& rng,
                 WalkScratch& scratch) {
  const Graph& g = *params.graph;
  const auto [begin, end] = g.edge_range(current);
  const std::uint64_t degree = end - begin;
  const bool approximate = params.degree_threshold != 0 && degree > params.degree_threshold;
  constexpr bool kBiased = kReturn || kInOut;
  const bool second_order = kBiased && previous.has_value();

  if (!approximate && !second_order) {
    if constexpr (kWeighted) {
      return g.destination(begin + sample_weights(g.weights().subspan(begin, degree), rng, scratch));
    } else {
      return g.destination(begin + rng.below(degree));
    }
  }

  Candidates c;
  if (approximate) {
    c = subsampled_candidates(g, begin, degree, params.degree_threshold, kWeighted, rng, scratch);
  } else {
    c.nodes = g.neighbors(current, scratch.neighbors);
    if constexpr (kWeighted) c.weights = g.weights().subspan(begin, degree);
  }

  if (!second_order) {
    if constexpr (kWeighted) {
      return c.nodes[sample_weights(c.weights, rng, scratch)];
    } else {
      return c.nodes[rng.below(c.nodes.size())];
    }
  }

  const std::size_t n = c.nodes.size();
  scratch.cumulative.resize(n);
  double* probs = scratch.cumulative.data();
  for (std::size_t i = 0; i < n; ++i) probs[i] = kWeighted ? static_cast<double>(c.weights[i]) : 1.0;
  if constexpr (kInOut) apply_in_out(g, *previous, c.nodes, params.inv_q, probs, scratch);
  if constexpr (kReturn) apply_return(*previous, c.nodes, params.inv_p, probs);
  for (std::size_t i = 1; i < n; ++i) probs[i] += probs[i - 1];
  return c.nodes[sample_cumulative(scratch.cumulative, rng)];
}

void normalize(std::vector<double>& values) {
  double total = 0.0;
  for (double v : values) total += v;
  for (double& v : values) v /= total;
}

template <bool kReturn, bool kInOut, bool kWeighted>
void probabilities_impl(const Params& params, NodeId previous, NodeId current, WalkScratch& scratch,
                        std::vector<double>& out) {
  const Graph& g = *params.graph;
  const auto nodes = g.neighbors(current, scratch.neighbors);
  out.resize(nodes.size());
  if constexpr (kWeighted) {
    const auto weights = g.weights_from(current);
    for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = static_cast<double>(weights[i]);
  } else {
    std::fill(out.begin(), out.end(), 1.0);
  }
  if constexpr (kInOut) apply_in_out(g, previous, nodes, params.inv_q, out.data(), scratch);
  if constexpr (kReturn) apply_return(previous, nodes, params.inv_p, out.data());
  normalize(out);
}

using StepFn = NodeId (*)(const Params&, std::optional<NodeId>, NodeId, Rng&, WalkScratch&);
using ProbFn = void (*)(const Params&, NodeId, NodeId, WalkScratch&, std::vector<double>&);

template <unsigned K>
constexpr StepFn kStep = &step_impl<(K & 1U) != 0, (K & 2U) != 0, (K & 4U) != 0>;
template <unsigned K>
constexpr ProbFn kProb = &probabilities_impl<(K & 1U) != 0, (K & 2U) != 0, (K & 4U) != 0>;

constexpr std::array<StepFn, 8> kStepTable = {kStep<0>, kStep<1>, kStep<2>, kStep<3>,
                                              kStep<4>, kStep<5>, kStep<6>, kStep<7>};
constexpr std::array<ProbFn, 8> kProbTable = {kProb<0>, kProb<1>, kProb<2>, kProb<3>,
                                              kProb<4>, kProb<5>, kProb<6>, kProb<7>};

}  // namespace

Walker::Walker(const Graph& g, const WalkConfig& cfg)
    : Walker(g, cfg, select_walker_kind(g.weighted(), cfg.return_p, cfg.in_out_q)) {}

Walker::Walker(const Graph& g, const WalkConfig& cfg, WalkerKind kind) : graph_(&g), cfg_(cfg), kind_(kind) {
  cfg.validate();
  if ((static_cast<unsigned>(kind) & 4U) != 0 && !g.weighted()) {
    fail(ErrorKind::kConfig, "weighted walker requested on an unweighted graph");
  }
  params_ = {&g, 1.0 / cfg.return_p, 1.0 / cfg.in_out_q, cfg.degree_threshold.value_or(0)};
  step_ = kStepTable[static_cast<std::size_t>(kind)];
  probabilities_ = kProbTable[static_cast<std::size_t>(kind)];
}

NodeId Walker::step(std::optional<NodeId> previous, NodeId current, Rng& rng, WalkScratch& scratch) const {
  if (graph_->degree(current) == 0) {
    fail(ErrorKind::kContract, "node " + std::to_string(current) + " has no successor");
  }
  return step_(params_, previous, current, rng, scratch);
}

void Walker::transition_probabilities(NodeId previous, NodeId current, std::vector<double>& out) const {
  if (graph_->degree(current) == 0) {
    fail(ErrorKind::kContract, "node " + std::to_string(current) + " has no successor");
  }
  WalkScratch scratch;
  probabilities_(params_, previous, current, scratch, out);
}

std::size_t Walker::walk(NodeId start, Rng& rng, WalkScratch& scratch, NodeId* out) const {
  const std::uint64_t length = cfg_.walk_length;
  out[0] = start;
  std::size_t written = 1;
  std::optional<NodeId> previous;
  NodeId current = start;
  while (written < length) {
    if (graph_->degree(current) == 0) break;
    const NodeId next = step_(params_, previous, current, rng, scratch);
    out[written++] = next;
    previous = current;
    current = next;
  }
  return written;
}

void general_transition_probabilities(const Graph& g, NodeId previous, NodeId current, double return_p,
                                      double in_out_q, std::vector<double>& out) {
  const std::vector<NodeId> current_neighbors = g.neighbors(current);
  const std::vector<NodeId> previous_neighbors = g.neighbors(previous);
  const auto weights = g.weights_from(current);
  out.resize(current_neighbors.size());
  for (std::size_t i = 0; i < current_neighbors.size(); ++i) {
    const NodeId x = current_neighbors[i];
    const bool near_previous =
        x == previous || std::binary_search(previous_neighbors.begin(), previous_neighbors.end(), x);
    const double in_out = near_previous ? 1.0 : 1.0 / in_out_q;
    const double ret = x == previous ? 1.0 / return_p : 1.0;
    out[i] = g.weighted() ? static_cast<double>(weights[i]) : 1.0;
    out[i] *= in_out;
    out[i] *= ret;
  }
  normalize(out);
}

NodeId second_order_step(const Graph& g, NodeId previous, NodeId current, const WalkConfig& cfg, Rng& rng) {
  if (!g.has_edge(previous, current)) {
    fail(ErrorKind::kContract,
         "(" + std::to_string(previous) + ", " + std::to_string(current) + ") is not an edge of the graph");
  }
  const Walker walker(g, cfg);
  WalkScratch scratch;
  return walker.step(previous, current, rng, scratch);
}

namespace {

std::vector<NodeId> run_walk(const Graph& g, NodeId start, const WalkConfig& cfg, Rng& rng) {
  if (start >= g.node_count()) fail(ErrorKind::kRange, "start node " + std::to_string(start) + " out of range");
  const Walker walker(g, cfg);
  WalkScratch scratch;
  std::vector<NodeId> out(cfg.walk_length);
  out.resize(walker.walk(start, rng, scratch, out.data()));
  return out;
}

}  // namespace

std::vector<NodeId> first_order_walk(const Graph& g, NodeId start, const WalkConfig& cfg, Rng& rng) {
  WalkConfig first = cfg;
  first.return_p = 1.0;
  first.in_out_q = 1.0;
  first.degree_threshold.reset();
  return run_walk(g, start, first, rng);
}

std::vector<NodeId> second_order_walk(const Graph& g, NodeId start, const WalkConfig& cfg, Rng& rng) {
  WalkConfig exact = cfg;
  exact.degree_threshold.reset();
  return run_walk(g, start, exact, rng);
}

std::vector<NodeId> approximated_walk(const Graph& g, NodeId start, const WalkConfig& cfg, Rng& rng) {
  if (!cfg.degree_threshold) fail(ErrorKind::kConfig, "approximated walks need a degree threshold");
  return run_walk(g, start, cfg, rng);
}

WalkStream::WalkStream(const Graph& g, const WalkConfig& cfg) : graph_(&g), cfg_(cfg), walker_(g, cfg) {}

bool WalkStream::next(WalkBatch& batch) {
  const std::uint64_t nodes = graph_->node_count();
  if (nodes == 0 || cursor_ >= total_walks()) return false;
  const std::uint64_t iteration = cursor_ / nodes;
  const std::uint64_t first = cursor_ % nodes;
  const std::uint64_t count = std::min(cfg_.batch_nodes, nodes - first);
  const std::uint64_t length = cfg_.walk_length;
  slots_.resize(count * length);
  lengths_.resize(count);
  parallel_chunks(count, cfg_.threads, [&](std::uint64_t begin, std::uint64_t end) {
    WalkScratch scratch;
    for (std::uint64_t i = begin; i < end; ++i) {
      const auto source = static_cast<NodeId>(first + i);
      Rng rng(walk_seed(cfg_.seed, source, iteration));
      lengths_[i] = walker_.walk(source, rng, scratch, slots_.data() + i * length);
    }
  });
  batch.clear();
  batch.iteration = iteration;
  batch.nodes.reserve(count * length);
  for (std::uint64_t i = 0; i < count; ++i) {
    const NodeId* row = slots_.data() + i * length;
    batch.nodes.insert(batch.nodes.end(), row, row + lengths_[i]);
    batch.offsets.push_back(batch.nodes.size());
  }
  cursor_ += count;
  return true;
}

}  // namespace efg
