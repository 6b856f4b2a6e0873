#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "efgraph/graph.hpp"

namespace efg {

struct EdgeRecord {
  std::string source_name;
  std::string destination_name;
  std::optional<double> weight;
  std::optional<std::string> edge_type;
};

struct LoadOptions {
  bool directed = false;
  bool has_header = false;
  /// Column separator; unset means sniff the first data line (tab, then
  /// comma, then space).
  std::optional<char> separator;
  std::optional<std::size_t> weight_column;
  std::optional<std::size_t> edge_type_column;
  DuplicatePolicy dedupe_policy = DuplicatePolicy::kError;
  bool allow_self_loops = true;
  /// Renumber nodes in lexicographic name order instead of first appearance.
  bool sort_nodes = false;
  /// Optional node list: node_name[, node_type]. Node types become labels.
  std::optional<std::filesystem::path> node_list;
  std::uint64_t quantum = EliasFano::kDefaultQuantum;
};

/// Parses an edge list. Errors carry the 1-based line number:
/// kParse for a wrong column count, kValue for a bad weight, kDuplicate for a
/// repeated edge under DuplicatePolicy::kError.
Graph load_edge_list(const std::filesystem::path& path, const LoadOptions& options = {});
Graph load_edge_list(std::istream& in, const LoadOptions& options = {});

/// Splits one line; exposed for the parser tests.
EdgeRecord parse_edge_line(std::string_view line, char separator, const LoadOptions& options, std::uint64_t line_no,
                           std::size_t expected_columns);

char sniff_separator(std::string_view line) noexcept;

struct GraphReport {
  std::uint64_t node_count = 0;
  std::uint64_t edge_count = 0;
  std::uint64_t undirected_edge_count = 0;
  std::uint64_t min_degree = 0;
  std::uint64_t max_degree = 0;
  double mean_degree = 0.0;
  std::uint64_t connected_component_count = 0;
  bool directed = false;
  bool weighted = false;
  std::uint64_t self_loop_count = 0;
  std::uint64_t singleton_count = 0;

  friend bool operator==(const GraphReport&, const GraphReport&) = default;
};

/// Components are weakly connected for directed graphs.
GraphReport report(const Graph& g);

/// Connected component index of every node (union-find).
std::vector<std::uint32_t> component_labels(const Graph& g, std::uint64_t* component_count = nullptr);

/// Natural-language summary.
std::string report_text(const GraphReport& r);
/// key=value lines, one field per line.
std::string report_key_values(const GraphReport& r);

}  // namespace efg
