#include "efgraph/graph.hpp"

#include <algorithm>
#include <bit>
#include <istream>
#include <numeric>
#include <ostream>

#include "efgraph/error.hpp"
#include "serialize.hpp"

namespace efg {

namespace {

constexpr std::uint64_t kGraphMagic = 0x3148505247464545ULL;  // "EEFGRPH1"

enum GraphFlags : std::uint64_t {
  kFlagDirected = 1,
  kFlagWeighted = 2,
  kFlagTypes = 4,
  kFlagNames = 8,
  kFlagLabels = 16,
};

}  // namespace

unsigned encoding_shift(std::uint64_t node_count) noexcept {
  if (node_count <= 2) return 1;
  return static_cast<unsigned>(std::bit_width(node_count - 1));
}

void Graph::check_node(NodeId a) const {
  if (a >= node_count_) {
    fail(ErrorKind::kRange, "node " + std::to_string(a) + " out of range for " + std::to_string(node_count_) + " nodes");
  }
}

EdgeCode Graph::encode(NodeId a, NodeId b) const {
  check_node(a);
  check_node(b);
  return encode_edge(a, b, shift_);
}

std::uint64_t Graph::offset(NodeId a) const {
  check_node(a);
  if (!offsets_cache_.empty()) return offsets_cache_[a];
  return codes_.rank(encode_edge(a, 0, shift_));
}

std::uint64_t Graph::degree(NodeId a) const {
  check_node(a);
  if (!offsets_cache_.empty()) return offsets_cache_[a + 1] - offsets_cache_[a];
  const EdgeCode start = static_cast<EdgeCode>(a) << shift_;
  const EdgeCode end = static_cast<EdgeCode>(a + 1ULL) << shift_;
  return codes_.rank(end) - codes_.rank(start);
}

std::pair<std::uint64_t, std::uint64_t> Graph::edge_range(NodeId a) const {
  check_node(a);
  if (!offsets_cache_.empty()) return {offsets_cache_[a], offsets_cache_[a + 1]};
  return {codes_.rank(static_cast<EdgeCode>(a) << shift_), codes_.rank(static_cast<EdgeCode>(a + 1ULL) << shift_)};
}

std::span<const NodeId> Graph::neighbors(NodeId a, std::vector<NodeId>& scratch) const {
  const auto [begin, end] = edge_range(a);
  const std::uint64_t count = end - begin;
  if (!destinations_cache_.empty()) return {destinations_cache_.data() + begin, count};
  scratch.resize(count);
  const EdgeCode mask = (EdgeCode{1} << shift_) - 1;
  NodeId* out = scratch.data();
  codes_.for_each(begin, begin + count,
                  [&](std::uint64_t i, std::uint64_t code) { out[i - begin] = static_cast<NodeId>(code & mask); });
  return {scratch.data(), count};
}

std::vector<NodeId> Graph::neighbors(NodeId a) const {
  std::vector<NodeId> scratch;
  auto view = neighbors(a, scratch);
  if (view.data() == scratch.data()) return scratch;
  return {view.begin(), view.end()};
}

NodeId Graph::destination(std::uint64_t edge) const noexcept {
  if (!destinations_cache_.empty()) return destinations_cache_[edge];
  return static_cast<NodeId>(codes_.select_unchecked(edge) & ((EdgeCode{1} << shift_) - 1));
}

NodeId Graph::source(std::uint64_t edge) const noexcept {
  if (!sources_cache_.empty()) return sources_cache_[edge];
  return static_cast<NodeId>(codes_.select_unchecked(edge) >> shift_);
}

std::pair<NodeId, NodeId> Graph::edge(std::uint64_t edge) const noexcept {
  if (!sources_cache_.empty() && !destinations_cache_.empty()) {
    return {sources_cache_[edge], destinations_cache_[edge]};
  }
  return decode_edge(codes_.select_unchecked(edge), shift_);
}

std::span<const float> Graph::weights_from(NodeId a) const {
  if (weights_.empty()) return {};
  const auto [begin, end] = edge_range(a);
  return {weights_.data() + begin, end - begin};
}

std::optional<std::uint64_t> Graph::find_edge(NodeId a, NodeId b) const {
  const EdgeCode code = encode(a, b);
  const std::uint64_t lo = codes_.rank(code);
  if (lo < codes_.size() && codes_.rank(code + 1) > lo) return lo;
  return std::nullopt;
}

bool Graph::has_edge(NodeId a, NodeId b) const {
  if (!destinations_cache_.empty() && !offsets_cache_.empty()) {
    check_node(a);
    check_node(b);
    const auto* first = destinations_cache_.data() + offsets_cache_[a];
    const auto* last = destinations_cache_.data() + offsets_cache_[a + 1];
    return std::binary_search(first, last, b);
  }
  return find_edge(a, b).has_value();
}

Graph& Graph::enable_cache(CacheKind kind) {
  const std::uint64_t m = codes_.size();
  switch (kind) {
    case CacheKind::kDestinations:
      if (destinations_cache_.empty() && m > 0) {
        destinations_cache_.resize(m);
        const EdgeCode mask = (EdgeCode{1} << shift_) - 1;
        codes_.for_each(0, m, [&](std::uint64_t i, std::uint64_t code) {
          destinations_cache_[i] = static_cast<NodeId>(code & mask);
        });
      }
      break;
    case CacheKind::kOutDegrees:
      if (offsets_cache_.empty()) {
        offsets_cache_.assign(node_count_ + 1, 0);
        codes_.for_each(0, m, [&](std::uint64_t, std::uint64_t code) { ++offsets_cache_[(code >> shift_) + 1]; });
        std::partial_sum(offsets_cache_.begin(), offsets_cache_.end(), offsets_cache_.begin());
      }
      break;
    case CacheKind::kSources:
      if (sources_cache_.empty() && m > 0) {
        sources_cache_.resize(m);
        codes_.for_each(0, m, [&](std::uint64_t i, std::uint64_t code) {
          sources_cache_[i] = static_cast<NodeId>(code >> shift_);
        });
      }
      break;
  }
  return *this;
}

bool Graph::has_cache(CacheKind kind) const noexcept {
  switch (kind) {
    case CacheKind::kDestinations:
      return !destinations_cache_.empty() || codes_.empty();
    case CacheKind::kOutDegrees:
      return !offsets_cache_.empty();
    case CacheKind::kSources:
      return !sources_cache_.empty() || codes_.empty();
  }
  return false;
}

std::string Graph::node_name(NodeId id) const {
  check_node(id);
  if (node_names_.empty()) return std::to_string(id);
  return node_names_[id];
}

std::optional<NodeId> Graph::node_id(std::string_view name) const {
  if (node_names_.empty()) {
    std::uint64_t value = 0;
    if (name.empty()) return std::nullopt;
    for (char c : name) {
      if (c < '0' || c > '9') return std::nullopt;
      value = value * 10 + static_cast<std::uint64_t>(c - '0');
      if (value >= node_count_) return std::nullopt;
    }
    return static_cast<NodeId>(value);
  }
  auto it = name_index_.find(std::string(name));
  if (it == name_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::uint64_t> Graph::in_degrees() const {
  std::vector<std::uint64_t> in(node_count_, 0);
  const EdgeCode mask = (EdgeCode{1} << shift_) - 1;
  codes_.for_each(0, codes_.size(), [&](std::uint64_t, std::uint64_t code) { ++in[code & mask]; });
  return in;
}

std::uint64_t Graph::self_loop_count() const {
  std::uint64_t loops = 0;
  codes_.for_each(0, codes_.size(), [&](std::uint64_t, std::uint64_t code) {
    auto [a, b] = decode_edge(code, shift_);
    loops += a == b ? 1 : 0;
  });
  return loops;
}

Graph Graph::with_edges(std::span<const std::pair<NodeId, NodeId>> edges, std::span<const float> weights,
                        std::span<const std::uint32_t> types) const {
  GraphBuilder builder(directed_);
  builder.set_node_count(node_count_);
  builder.set_weighted(weighted());
  if (!types.empty()) {
    for (const auto& name : edge_type_names_) builder.add_edge_type(name);
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    check_node(edges[i].first);
    check_node(edges[i].second);
    builder.add_edge(edges[i].first, edges[i].second, weights.empty() ? 1.0F : weights[i],
                     types.empty() ? kNoEdgeType : types[i]);
  }
  Graph g = std::move(builder).build(DuplicatePolicy::kError, codes_.quantum());
  g.node_names_ = node_names_;
  g.name_index_ = name_index_;
  g.node_labels_ = node_labels_;
  g.label_names_ = label_names_;
  g.edge_type_names_ = edge_type_names_;
  return g;
}

bool Graph::same_content(const Graph& other) const {
  return node_count_ == other.node_count_ && shift_ == other.shift_ && directed_ == other.directed_ &&
         codes_ == other.codes_ && weights_ == other.weights_ && edge_types_ == other.edge_types_ &&
         edge_type_names_ == other.edge_type_names_ && node_names_ == other.node_names_ &&
         node_labels_ == other.node_labels_ && label_names_ == other.label_names_;
}

void Graph::write(std::ostream& out) const {
  std::uint64_t flags = 0;
  if (directed_) flags |= kFlagDirected;
  if (weighted()) flags |= kFlagWeighted;
  if (has_edge_types()) flags |= kFlagTypes;
  if (has_node_names()) flags |= kFlagNames;
  if (has_node_labels()) flags |= kFlagLabels;
  io::write_u64(out, kGraphMagic);
  io::write_u64(out, flags);
  io::write_u64(out, node_count_);
  io::write_u64(out, shift_);
  codes_.write(out);
  if (flags & kFlagWeighted) io::write_pod_array(out, weights_);
  if (flags & kFlagTypes) {
    io::write_pod_array(out, edge_types_);
    io::write_u64(out, edge_type_names_.size());
    for (const auto& name : edge_type_names_) io::write_string(out, name);
  }
  if (flags & kFlagNames) {
    for (const auto& name : node_names_) io::write_string(out, name);
  }
  if (flags & kFlagLabels) {
    io::write_pod_array(out, node_labels_);
    io::write_u64(out, label_names_.size());
    for (const auto& name : label_names_) io::write_string(out, name);
  }
  if (!out) fail(ErrorKind::kIo, "failed writing graph");
}

Graph Graph::read(std::istream& in) {
  if (io::read_u64(in) != kGraphMagic) fail(ErrorKind::kIo, "not a graph binary file");
  Graph g;
  const std::uint64_t flags = io::read_u64(in);
  g.directed_ = (flags & kFlagDirected) != 0;
  g.node_count_ = io::read_u64(in);
  g.shift_ = static_cast<unsigned>(io::read_u64(in));
  if (g.shift_ != encoding_shift(g.node_count_)) fail(ErrorKind::kIo, "corrupt graph header");
  g.codes_ = EliasFano::read(in);
  if (flags & kFlagWeighted) g.weights_ = io::read_pod_array<float>(in);
  if (flags & kFlagTypes) {
    g.edge_types_ = io::read_pod_array<std::uint32_t>(in);
    const std::uint64_t count = io::read_u64(in);
    for (std::uint64_t i = 0; i < count; ++i) g.edge_type_names_.push_back(io::read_string(in));
  }
  if (flags & kFlagNames) {
    g.node_names_.reserve(g.node_count_);
    for (std::uint64_t i = 0; i < g.node_count_; ++i) {
      g.node_names_.push_back(io::read_string(in));
      g.name_index_.emplace(g.node_names_.back(), static_cast<NodeId>(i));
    }
  }
  if (flags & kFlagLabels) {
    g.node_labels_ = io::read_pod_array<std::int32_t>(in);
    const std::uint64_t count = io::read_u64(in);
    for (std::uint64_t i = 0; i < count; ++i) g.label_names_.push_back(io::read_string(in));
  }
  if ((g.weighted() && g.weights_.size() != g.codes_.size()) ||
      (g.has_edge_types() && g.edge_types_.size() != g.codes_.size()) ||
      (g.has_node_labels() && g.node_labels_.size() != g.node_count_)) {
    fail(ErrorKind::kIo, "graph arrays do not match edge count");
  }
  return g;
}

// ---------------------------------------------------------------------------

NodeId GraphBuilder::add_node(std::string_view name) {
  named_ = true;
  auto [it, inserted] = index_.try_emplace(std::string(name), static_cast<NodeId>(node_count_));
  if (inserted) {
    if (node_count_ >= (1ULL << 32) - 1) fail(ErrorKind::kRange, "graphs are limited to 2^32 - 1 nodes");
    names_.emplace_back(name);
    labels_.push_back(kNoLabel);
    ++node_count_;
  }
  return it->second;
}

void GraphBuilder::set_node_count(std::uint64_t count) {
  if (named_) fail(ErrorKind::kConfig, "cannot mix named and anonymous nodes");
  if (count >= (1ULL << 32)) fail(ErrorKind::kRange, "graphs are limited to 2^32 - 1 nodes");
  node_count_ = count;
  labels_.assign(count, kNoLabel);
}

std::optional<NodeId> GraphBuilder::find_node(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t GraphBuilder::add_edge_type(std::string_view name) {
  auto [it, inserted] =
      edge_type_index_.try_emplace(std::string(name), static_cast<std::uint32_t>(edge_type_names_.size()));
  if (inserted) edge_type_names_.emplace_back(name);
  return it->second;
}

std::int32_t GraphBuilder::add_label(std::string_view name) {
  auto [it, inserted] = label_index_.try_emplace(std::string(name), static_cast<std::int32_t>(label_names_.size()));
  if (inserted) label_names_.emplace_back(name);
  return it->second;
}

void GraphBuilder::set_node_label(NodeId id, std::int32_t label) {
  if (id >= node_count_) fail(ErrorKind::kRange, "node " + std::to_string(id) + " out of range");
  labels_[id] = label;
}

void GraphBuilder::add_edge(NodeId a, NodeId b, float weight, std::uint32_t type) {
  if (a >= node_count_ || b >= node_count_) {
    fail(ErrorKind::kRange, "edge (" + std::to_string(a) + ", " + std::to_string(b) + ") references an unknown node");
  }
  entries_.push_back({a, b, weight, type});
  if (!directed_ && a != b) entries_.push_back({b, a, weight, type});
}

void GraphBuilder::sort_nodes_by_name() {
  if (!named_) return;
  std::vector<NodeId> order(node_count_);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](NodeId x, NodeId y) { return names_[x] < names_[y]; });
  std::vector<NodeId> remap(node_count_);
  for (std::uint64_t i = 0; i < node_count_; ++i) remap[order[i]] = static_cast<NodeId>(i);
  std::vector<std::string> names(node_count_);
  std::vector<std::int32_t> labels(node_count_);
  for (std::uint64_t i = 0; i < node_count_; ++i) {
    names[remap[i]] = std::move(names_[i]);
    labels[remap[i]] = labels_[i];
  }
  names_ = std::move(names);
  labels_ = std::move(labels);
  for (auto& [name, id] : index_) id = remap[id];
  for (auto& e : entries_) {
    e.src = remap[e.src];
    e.dst = remap[e.dst];
  }
}

Graph GraphBuilder::build(DuplicatePolicy policy, std::uint64_t quantum) && {
  Graph g;
  g.node_count_ = node_count_;
  g.shift_ = encoding_shift(node_count_);
  g.directed_ = directed_;
  const unsigned k = g.shift_;
  std::stable_sort(entries_.begin(), entries_.end(), [k](const Entry& x, const Entry& y) {
    return encode_edge(x.src, x.dst, k) < encode_edge(y.src, y.dst, k);
  });

  std::vector<EdgeCode> codes;
  codes.reserve(entries_.size());
  std::vector<float> weights;
  std::vector<std::uint32_t> types;
  const bool typed = !edge_type_names_.empty();
  for (const Entry& e : entries_) {
    const EdgeCode code = encode_edge(e.src, e.dst, k);
    if (!codes.empty() && codes.back() == code) {
      switch (policy) {
        case DuplicatePolicy::kError: {
          const std::string a = named_ ? names_[e.src] : std::to_string(e.src);
          const std::string b = named_ ? names_[e.dst] : std::to_string(e.dst);
          fail(ErrorKind::kDuplicate, "duplicate edge " + a + " -> " + b);
        }
        case DuplicatePolicy::kKeepFirst:
          continue;
        case DuplicatePolicy::kSumWeights:
          if (weighted_) weights.back() += e.weight;
          continue;
      }
    }
    codes.push_back(code);
    if (weighted_) weights.push_back(e.weight);
    if (typed) types.push_back(e.type);
  }
  entries_.clear();
  entries_.shrink_to_fit();

  g.codes_ = EliasFano::build(codes, codes.empty() ? 0 : codes.back(), quantum);
  g.weights_ = std::move(weights);
  g.edge_types_ = std::move(types);
  g.edge_type_names_ = std::move(edge_type_names_);
  if (named_) {
    g.node_names_ = std::move(names_);
    g.name_index_ = std::move(index_);
  }
  const bool any_label = std::any_of(labels_.begin(), labels_.end(), [](std::int32_t l) { return l != kNoLabel; });
  if (any_label || !label_names_.empty()) {
    g.node_labels_ = std::move(labels_);
    g.label_names_ = std::move(label_names_);
  }
  return g;
}

Graph make_graph(std::uint64_t node_count, std::span<const std::pair<NodeId, NodeId>> edges, bool directed,
                 std::span<const float> weights) {
  GraphBuilder builder(directed);
  builder.set_node_count(node_count);
  builder.set_weighted(!weights.empty());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    builder.add_edge(edges[i].first, edges[i].second, weights.empty() ? 1.0F : weights[i]);
  }
  return std::move(builder).build();
}

}  // namespace efg
