#include "efgraph/loader.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "efgraph/error.hpp"
#include "union_find.hpp"

namespace efg {

namespace {

std::string_view trim_line_end(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
  return line;
}

bool skippable(std::string_view line) {
  return line.empty() || line.front() == '#' ||
         std::all_of(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\t'; });
}

std::vector<std::string_view> split(std::string_view line, char separator) {
  std::vector<std::string_view> fields;
  if (separator == ' ') {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      if (i == line.size()) break;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      fields.push_back(line.substr(i, j - i));
      i = j;
    }
    return fields;
  }
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(separator, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::size_t required_columns(const LoadOptions& options) {
  std::size_t required = 2;
  if (options.weight_column) required = std::max(required, *options.weight_column + 1);
  if (options.edge_type_column) required = std::max(required, *options.edge_type_column + 1);
  return required;
}

void check_options(const LoadOptions& options) {
  if (options.separator && (*options.separator == '\n' || *options.separator == '\r')) {
    fail(ErrorKind::kConfig, "separator must not be a line terminator");
  }
  if ((options.weight_column && *options.weight_column < 2) ||
      (options.edge_type_column && *options.edge_type_column < 2)) {
    fail(ErrorKind::kConfig, "weight and edge type columns must come after source and destination");
  }
  if (options.weight_column && options.edge_type_column && *options.weight_column == *options.edge_type_column) {
    fail(ErrorKind::kConfig, "weight and edge type columns must differ");
  }
}

void load_node_list(const std::filesystem::path& path, char separator_hint, const LoadOptions& options,
                    GraphBuilder& builder) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open node list " + path.string());
  std::string line;
  std::uint64_t line_no = 0;
  std::optional<char> separator = options.separator;
  if (!separator && separator_hint != 0) separator = separator_hint;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim_line_end(line);
    if (skippable(view)) continue;
    if (!separator) separator = sniff_separator(view);
    const auto fields = split(view, *separator);
    if (fields.empty() || fields.size() > 2 || fields[0].empty()) {
      throw ParseError(ErrorKind::kParse, line_no, "expected node_name[" + std::string(1, *separator) + "node_type]");
    }
    if (builder.find_node(fields[0])) {
      throw ParseError(ErrorKind::kDuplicate, line_no, "duplicate node " + std::string(fields[0]));
    }
    const NodeId id = builder.add_node(fields[0]);
    if (fields.size() == 2 && !fields[1].empty()) builder.set_node_label(id, builder.add_label(fields[1]));
  }
}

}  // namespace

char sniff_separator(std::string_view line) noexcept {
  if (line.find('\t') != std::string_view::npos) return '\t';
  if (line.find(',') != std::string_view::npos) return ',';
  return ' ';
}

EdgeRecord parse_edge_line(std::string_view line, char separator, const LoadOptions& options, std::uint64_t line_no,
                           std::size_t expected_columns) {
  const auto fields = split(line, separator);
  if (fields.size() != expected_columns) {
    throw ParseError(ErrorKind::kParse, line_no,
                     "expected " + std::to_string(expected_columns) + " columns, found " + std::to_string(fields.size()));
  }
  if (fields[0].empty() || fields[1].empty()) throw ParseError(ErrorKind::kParse, line_no, "empty node name");
  EdgeRecord record{std::string(fields[0]), std::string(fields[1]), std::nullopt, std::nullopt};
  if (options.weight_column) {
    const std::string_view text = fields[*options.weight_column];
    double weight = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), weight);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
      throw ParseError(ErrorKind::kValue, line_no, "non-numeric weight '" + std::string(text) + "'");
    }
    if (!std::isfinite(weight) || weight <= 0.0) {
      throw ParseError(ErrorKind::kValue, line_no, "weight must be finite and positive, got '" + std::string(text) + "'");
    }
    record.weight = weight;
  }
  if (options.edge_type_column) record.edge_type = std::string(fields[*options.edge_type_column]);
  return record;
}

Graph load_edge_list(std::istream& in, const LoadOptions& options) {
  check_options(options);
  GraphBuilder builder(options.directed);
  builder.set_weighted(options.weight_column.has_value());
  const bool closed_node_set = options.node_list.has_value();
  if (closed_node_set) load_node_list(*options.node_list, options.separator.value_or(0), options, builder);

  std::optional<char> separator = options.separator;
  std::size_t columns = 0;
  const std::size_t required = required_columns(options);
  bool header_pending = options.has_header;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim_line_end(line);
    if (skippable(view)) continue;
    if (!separator) separator = sniff_separator(view);
    if (header_pending) {
      header_pending = false;
      continue;
    }
    if (columns == 0) {
      columns = split(view, *separator).size();
      if (columns < required) {
        throw ParseError(ErrorKind::kParse, line_no,
                         "expected at least " + std::to_string(required) + " columns, found " + std::to_string(columns));
      }
    }
    EdgeRecord record = parse_edge_line(view, *separator, options, line_no, columns);
    NodeId a = 0;
    NodeId b = 0;
    if (closed_node_set) {
      const auto sa = builder.find_node(record.source_name);
      const auto sb = builder.find_node(record.destination_name);
      if (!sa || !sb) {
        throw ParseError(ErrorKind::kValue, line_no,
                         "unknown node '" + (sa ? record.destination_name : record.source_name) + "'");
      }
      a = *sa;
      b = *sb;
    } else {
      a = builder.add_node(record.source_name);
      b = builder.add_node(record.destination_name);
    }
    if (a == b && !options.allow_self_loops) {
      throw ParseError(ErrorKind::kValue, line_no, "self-loop on '" + record.source_name + "' not allowed");
    }
    const std::uint32_t type = record.edge_type ? builder.add_edge_type(*record.edge_type) : kNoEdgeType;
    builder.add_edge(a, b, static_cast<float>(record.weight.value_or(1.0)), type);
  }
  if (in.bad()) fail(ErrorKind::kIo, "read error");
  if (options.sort_nodes) builder.sort_nodes_by_name();
  return std::move(builder).build(options.dedupe_policy, options.quantum);
}

Graph load_edge_list(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open edge list " + path.string());
  return load_edge_list(in, options);
}

std::vector<std::uint32_t> component_labels(const Graph& g, std::uint64_t* component_count) {
  detail::DisjointSets sets(g.node_count());
  g.codes().for_each(0, g.edge_count(), [&](std::uint64_t, std::uint64_t code) {
    auto [a, b] = g.decode(code);
    sets.unite(a, b);
  });
  std::vector<std::uint32_t> labels(g.node_count());
  std::vector<std::uint32_t> root_label(g.node_count(), 0xffffffffU);
  std::uint32_t next = 0;
  for (std::uint64_t v = 0; v < g.node_count(); ++v) {
    const std::uint32_t root = sets.find(static_cast<std::uint32_t>(v));
    if (root_label[root] == 0xffffffffU) root_label[root] = next++;
    labels[v] = root_label[root];
  }
  if (component_count != nullptr) *component_count = next;
  return labels;
}

GraphReport report(const Graph& g) {
  GraphReport r;
  r.node_count = g.node_count();
  r.edge_count = g.edge_count();
  r.directed = g.directed();
  r.weighted = g.weighted();
  r.self_loop_count = g.self_loop_count();
  r.undirected_edge_count = g.directed() ? r.edge_count : (r.edge_count - r.self_loop_count) / 2 + r.self_loop_count;

  std::vector<std::uint64_t> out_degree(g.node_count(), 0);
  std::vector<bool> touched(g.node_count(), false);
  g.codes().for_each(0, g.edge_count(), [&](std::uint64_t, std::uint64_t code) {
    auto [a, b] = g.decode(code);
    ++out_degree[a];
    if (a != b) {
      touched[a] = true;
      touched[b] = true;
    }
  });
  if (!out_degree.empty()) {
    const auto [lo, hi] = std::minmax_element(out_degree.begin(), out_degree.end());
    r.min_degree = *lo;
    r.max_degree = *hi;
    r.mean_degree = static_cast<double>(r.edge_count) / static_cast<double>(r.node_count);
  }
  r.singleton_count = static_cast<std::uint64_t>(std::count(touched.begin(), touched.end(), false));
  component_labels(g, &r.connected_component_count);
  return r;
}

std::string report_text(const GraphReport& r) {
  std::ostringstream out;
  out << "The " << (r.directed ? "directed" : "undirected") << (r.weighted ? " weighted" : " unweighted")
      << " graph has " << r.node_count << " nodes and " << r.undirected_edge_count
      << (r.directed ? " directed" : " undirected") << " edges (" << r.edge_count << " stored entries).\n";
  out << "It has " << r.connected_component_count << " connected component"
      << (r.connected_component_count == 1 ? "" : "s") << ", " << r.singleton_count << " singleton node"
      << (r.singleton_count == 1 ? "" : "s") << " and " << r.self_loop_count << " self-loop"
      << (r.self_loop_count == 1 ? "" : "s") << ".\n";
  out << "Node degrees range from " << r.min_degree << " to " << r.max_degree << ", with mean " << r.mean_degree
      << ".\n";
  return out.str();
}

std::string report_key_values(const GraphReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "node_count=" << r.node_count << '\n'
      << "edge_count=" << r.edge_count << '\n'
      << "undirected_edge_count=" << r.undirected_edge_count << '\n'
      << "min_degree=" << r.min_degree << '\n'
      << "max_degree=" << r.max_degree << '\n'
      << "mean_degree=" << r.mean_degree << '\n'
      << "connected_component_count=" << r.connected_component_count << '\n'
      << "directed=" << (r.directed ? "true" : "false") << '\n'
      << "weighted=" << (r.weighted ? "true" : "false") << '\n'
      << "self_loop_count=" << r.self_loop_count << '\n'
      << "singleton_count=" << r.singleton_count << '\n';
  return out.str();
}

}  // namespace efg
