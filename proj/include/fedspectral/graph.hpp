#pragma once

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstdint>
#include <fstream>
#include <istream>
#include <tuple>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedspectral/errors.hpp"

namespace fedspectral {

using NodeId = std::uint32_t;

/// Undirected edge, stored once with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge& a, const Edge& b) {
    return std::tie(a.u, a.v) <=> std::tie(b.u, b.v);
  }
};

/// Undirected weighted graph over the node universe 0..num_nodes-1.
///
/// Edges are kept sorted by (u, v), so two graphs with the same edge set compare equal
/// and everything downstream is independent of input order.
class Graph {
 public:
  Graph() = default;

  /// Validating constructor: rejects self-loops, duplicates, out-of-range endpoints and
  /// non-positive weights. Endpoint order within an edge is normalized.
  Graph(std::size_t num_nodes, std::vector<Edge> edges) : num_nodes_(num_nodes), edges_(std::move(edges)) {
    for (Edge& e : edges_) {
      if (e.u > e.v) std::swap(e.u, e.v);
      if (e.u == e.v) throw ContractError("Graph: self-loop on node " + std::to_string(e.u));
      if (e.v >= num_nodes_)
        throw ContractError("Graph: endpoint " + std::to_string(e.v) + " outside node universe of size " +
                            std::to_string(num_nodes_));
      if (!(e.weight > 0.0)) throw ContractError("Graph: edge weight must be positive");
    }
    std::sort(edges_.begin(), edges_.end());
    auto dup = std::adjacent_find(edges_.begin(), edges_.end(),
                                  [](const Edge& a, const Edge& b) { return a.u == b.u && a.v == b.v; });
    if (dup != edges_.end())
      throw ContractError("Graph: duplicate edge (" + std::to_string(dup->u) + "," + std::to_string(dup->v) + ")");
  }

  /// Builds a graph from raw pairs, dropping self-loops and repeated pairs (first weight wins).
  static Graph from_pairs(std::size_t num_nodes, std::vector<Edge> raw) {
    std::vector<Edge> kept;
    kept.reserve(raw.size());
    for (Edge e : raw) {
      if (e.u == e.v) continue;
      if (e.u > e.v) std::swap(e.u, e.v);
      kept.push_back(e);
    }
    std::stable_sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end(),
                           [](const Edge& a, const Edge& b) { return a.u == b.u && a.v == b.v; }),
               kept.end());
    return Graph(num_nodes, std::move(kept));
  }

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  /// Weighted degree of every node.
  std::vector<double> degrees() const {
    std::vector<double> d(num_nodes_, 0.0);
    for (const Edge& e : edges_) {
      d[e.u] += e.weight;
      d[e.v] += e.weight;
    }
    return d;
  }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
};

/// Counters collected while reading an edge list.
struct ParseStats {
  std::size_t data_lines = 0;  ///< non-comment, non-blank lines (arcs for directed input)
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_dropped = 0;
  bool directed = false;  ///< input was read as arcs and symmetrized
};

/// A parsed graph plus the map from remapped id back to the id used in the file.
struct ParsedGraph {
  Graph graph;
  std::vector<std::int64_t> original_ids;  ///< original_ids[new_id]
  ParseStats stats;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::int64_t parse_node_token(std::string_view tok, std::size_t line_no) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError("expected integer node id, got '" + std::string(tok) + "'", line_no);
  return value;
}

inline double parse_weight_token(std::string_view tok, std::size_t line_no) {
  // from_chars for double is unavailable on some older standard libraries.
  std::string s(tok);
  std::size_t used = 0;
  double w = 0.0;
  try {
    w = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !(w > 0.0))
    throw ParseError("expected positive edge weight, got '" + s + "'", line_no);
  return w;
}

}  // namespace detail

/// Reads a SNAP-style edge list: one "u v [weight]" per line, '#' starts a comment line.
///
/// Node ids are remapped to 0..N-1 in ascending order of original id. Every id that appears
/// on a data line is part of the node universe, including ids seen only in self-loops.
/// With `directed` set, arcs (u,v) and (v,u) collapse to one undirected edge.
inline ParsedGraph parse_edge_list(std::istream& in, bool directed) {
  struct RawArc {
    std::int64_t a, b;
    double w;
  };
  std::vector<RawArc> arcs;
  ParseStats stats;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    auto first = view.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || view[first] == '#' || view[first] == '%') continue;
    auto tokens = detail::split_ws(view);
    if (tokens.size() < 2 || tokens.size() > 3)
      throw ParseError("expected 'u v' or 'u v weight', got " + std::to_string(tokens.size()) + " fields", line_no);
    RawArc arc{detail::parse_node_token(tokens[0], line_no), detail::parse_node_token(tokens[1], line_no), 1.0};
    if (tokens.size() == 3) arc.w = detail::parse_weight_token(tokens[2], line_no);
    arcs.push_back(arc);
    ++stats.data_lines;
  }
  if (arcs.empty()) throw ParseError("edge list contains no edges", 0);

  std::vector<std::int64_t> ids;
  ids.reserve(arcs.size() * 2);
  for (const auto& a : arcs) {
    ids.push_back(a.a);
    ids.push_back(a.b);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  auto remap = [&ids](std::int64_t id) {
    return static_cast<NodeId>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };

  std::vector<Edge> raw;
  raw.reserve(arcs.size());
  for (const auto& a : arcs) {
    NodeId u = remap(a.a), v = remap(a.b);
    if (u == v) {
      ++stats.self_loops_dropped;
      continue;
    }
    raw.push_back(Edge{std::min(u, v), std::max(u, v), a.w});
  }
  std::size_t before = raw.size();
  Graph g = Graph::from_pairs(ids.size(), std::move(raw));
  stats.duplicates_dropped = before - g.num_edges();
  stats.directed = directed;
  return ParsedGraph{std::move(g), std::move(ids), stats};
}

inline ParsedGraph parse_edge_list(std::string_view text, bool directed) {
  std::istringstream in{std::string(text)};
  return parse_edge_list(in, directed);
}

inline ParsedGraph load_edge_list(const std::string& path, bool directed) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open edge list '" + path + "'");
  return parse_edge_list(in, directed);
}

/// Writes the graph in the same text format. Nodes without edges are written as a
/// self-loop line so that re-parsing reproduces the node universe.
inline void write_edge_list(std::ostream& out, const Graph& g, std::string_view header = {}) {
  if (!header.empty()) {
    std::istringstream lines{std::string(header)};
    std::string l;
    while (std::getline(lines, l)) out << "# " << l << '\n';
  }
  std::vector<bool> touched(g.num_nodes(), false);
  for (const Edge& e : g.edges()) touched[e.u] = touched[e.v] = true;
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    if (!touched[i]) out << i << ' ' << i << '\n';
  std::ostringstream w;
  w.precision(17);
  for (const Edge& e : g.edges()) {
    out << e.u << ' ' << e.v;
    if (e.weight != 1.0) {
      w.str({});
      w << e.weight;
      out << ' ' << w.str();
    }
    out << '\n';
  }
}

inline std::string serialize_edge_list(const Graph& g) {
  std::ostringstream out;
  write_edge_list(out, g);
  return out.str();
}

}  // namespace fedspectral
