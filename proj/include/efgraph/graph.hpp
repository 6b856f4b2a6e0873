#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "efgraph/elias_fano.hpp"

namespace efg {

using NodeId = std::uint32_t;
using EdgeCode = std::uint64_t;

inline constexpr std::uint32_t kNoEdgeType = 0xffffffffU;
inline constexpr std::int32_t kNoLabel = -1;

/// ceil(log2 |V|), at least 1 so a single node still encodes.
unsigned encoding_shift(std::uint64_t node_count) noexcept;

constexpr EdgeCode encode_edge(NodeId a, NodeId b, unsigned shift) noexcept {
  return (static_cast<EdgeCode>(a) << shift) | b;
}

constexpr std::pair<NodeId, NodeId> decode_edge(EdgeCode code, unsigned shift) noexcept {
  return {static_cast<NodeId>(code >> shift), static_cast<NodeId>(code & ((EdgeCode{1} << shift) - 1))};
}

enum class DuplicatePolicy : std::uint8_t { kError, kKeepFirst, kSumWeights };

enum class CacheKind : std::uint8_t {
  kDestinations = 1,
  kOutDegrees = 2,
  kSources = 4,
};

/// Immutable adjacency over dense node IDs.
///
/// Edge (a, b) is stored as the code a << k | b inside an EliasFano
/// sequence, so the out-edges of a are the contiguous code range
/// [a << k, (a + 1) << k). Weights and edge types live in parallel arrays
/// in code order. Optional caches trade memory for speed and never change
/// query results.
class Graph {
 public:
  Graph() = default;

  std::uint64_t node_count() const noexcept { return node_count_; }
  /// Directed edge entries; undirected edges count twice, self-loops once.
  std::uint64_t edge_count() const noexcept { return codes_.size(); }
  bool directed() const noexcept { return directed_; }
  bool weighted() const noexcept { return !weights_.empty(); }
  bool has_edge_types() const noexcept { return !edge_types_.empty(); }
  bool has_node_labels() const noexcept { return !node_labels_.empty(); }
  unsigned shift() const noexcept { return shift_; }

  /// Throws kRange on an invalid node.
  EdgeCode encode(NodeId a, NodeId b) const;
  std::pair<NodeId, NodeId> decode(EdgeCode code) const noexcept { return decode_edge(code, shift_); }

  std::uint64_t degree(NodeId a) const;
  /// Index of the first out-edge of `a` in code order.
  std::uint64_t offset(NodeId a) const;
  /// [first, last) out-edge indexes of `a`.
  std::pair<std::uint64_t, std::uint64_t> edge_range(NodeId a) const;

  /// Sorted successors of `a`. Points into the destinations cache when it is
  /// enabled, otherwise decodes into `scratch`.
  std::span<const NodeId> neighbors(NodeId a, std::vector<NodeId>& scratch) const;
  std::vector<NodeId> neighbors(NodeId a) const;

  /// Destination of edge number `edge` (code order).
  NodeId destination(std::uint64_t edge) const noexcept;
  NodeId source(std::uint64_t edge) const noexcept;
  std::pair<NodeId, NodeId> edge(std::uint64_t edge) const noexcept;

  /// Weights of the out-edges of `a`, aligned with neighbors(a); empty when unweighted.
  std::span<const float> weights_from(NodeId a) const;
  float weight(std::uint64_t edge) const noexcept { return weights_.empty() ? 1.0F : weights_[edge]; }
  std::span<const float> weights() const noexcept { return weights_; }

  bool has_edge(NodeId a, NodeId b) const;
  std::optional<std::uint64_t> find_edge(NodeId a, NodeId b) const;

  std::uint32_t edge_type(std::uint64_t edge) const noexcept {
    return edge_types_.empty() ? kNoEdgeType : edge_types_[edge];
  }
  std::span<const std::string> edge_type_names() const noexcept { return edge_type_names_; }

  Graph& enable_cache(CacheKind kind);
  bool has_cache(CacheKind kind) const noexcept;

  const EliasFano& codes() const noexcept { return codes_; }

  bool has_node_names() const noexcept { return !node_names_.empty(); }
  /// Stored name, or the decimal ID when the graph has no names.
  std::string node_name(NodeId id) const;
  std::optional<NodeId> node_id(std::string_view name) const;

  std::int32_t node_label(NodeId id) const noexcept {
    return node_labels_.empty() ? kNoLabel : node_labels_[id];
  }
  std::span<const std::int32_t> node_labels() const noexcept { return node_labels_; }
  std::span<const std::string> label_names() const noexcept { return label_names_; }

  /// Inbound degrees from one pass over the edge codes.
  std::vector<std::uint64_t> in_degrees() const;

  std::uint64_t self_loop_count() const;

  /// Copy of this graph's node table (names, labels) with a new edge set.
  Graph with_edges(std::span<const std::pair<NodeId, NodeId>> edges, std::span<const float> weights,
                   std::span<const std::uint32_t> types) const;

  void write(std::ostream& out) const;
  static Graph read(std::istream& in);

  /// Identical content (ignores caches).
  bool same_content(const Graph& other) const;

 private:
  friend class GraphBuilder;

  void check_node(NodeId a) const;

  std::uint64_t node_count_ = 0;
  unsigned shift_ = 1;
  bool directed_ = false;
  EliasFano codes_;
  std::vector<float> weights_;
  std::vector<std::uint32_t> edge_types_;
  std::vector<std::string> edge_type_names_;
  std::vector<std::string> node_names_;
  std::unordered_map<std::string, NodeId> name_index_;
  std::vector<std::int32_t> node_labels_;
  std::vector<std::string> label_names_;

  std::vector<NodeId> destinations_cache_;
  std::vector<std::uint64_t> offsets_cache_;  // |V| + 1 prefix sums of out-degrees
  std::vector<NodeId> sources_cache_;
};

/// Collects nodes and edges, then encodes them into a Graph.
class GraphBuilder {
 public:
  explicit GraphBuilder(bool directed) : directed_(directed) {}

  /// Named node; returns the existing ID if the name is known.
  NodeId add_node(std::string_view name);
  /// Anonymous nodes 0..count-1 (names become decimal IDs on output).
  void set_node_count(std::uint64_t count);
  std::optional<NodeId> find_node(std::string_view name) const;
  std::uint64_t node_count() const noexcept { return node_count_; }

  void set_weighted(bool weighted) { weighted_ = weighted; }
  std::uint32_t add_edge_type(std::string_view name);
  std::int32_t add_label(std::string_view name);
  void set_node_label(NodeId id, std::int32_t label);

  /// Undirected graphs get both orientations; a self-loop is stored once.
  void add_edge(NodeId a, NodeId b, float weight = 1.0F, std::uint32_t type = kNoEdgeType);

  /// Sorts node names lexicographically and renumbers (canonical order).
  void sort_nodes_by_name();

  Graph build(DuplicatePolicy policy = DuplicatePolicy::kError,
              std::uint64_t quantum = EliasFano::kDefaultQuantum) &&;

 private:
  struct Entry {
    NodeId src;
    NodeId dst;
    float weight;
    std::uint32_t type;
  };

  bool directed_;
  bool weighted_ = false;
  bool named_ = false;
  std::uint64_t node_count_ = 0;
  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId> index_;
  std::vector<std::string> edge_type_names_;
  std::unordered_map<std::string, std::uint32_t> edge_type_index_;
  std::vector<std::string> label_names_;
  std::unordered_map<std::string, std::int32_t> label_index_;
  std::vector<std::int32_t> labels_;
  std::vector<Entry> entries_;
};

/// Convenience for tests and generators: anonymous nodes, unit or given weights.
Graph make_graph(std::uint64_t node_count, std::span<const std::pair<NodeId, NodeId>> edges, bool directed,
                 std::span<const float> weights = {});

}  // namespace efg
