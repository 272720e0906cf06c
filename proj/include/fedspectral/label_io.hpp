#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fedspectral/errors.hpp"
#include "fedspectral/graph.hpp"
#include "fedspectral/kmeans.hpp"

namespace fedspectral {

/// Writes "node_id,label" rows. `node_ids` maps position to the id printed (original dataset
/// ids); when empty, positions are printed.
inline void write_labels_csv(std::ostream& out, const Labeling& labels, std::span<const std::int64_t> node_ids = {}) {
  if (!node_ids.empty() && node_ids.size() != labels.size())
    throw ContractError("write_labels_csv: node id table does not match labeling length");
  out << "node_id,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
    out << (node_ids.empty() ? static_cast<std::int64_t>(i) : node_ids[i]) << ',' << labels[i] << '\n';
}

/// Node id -> label, sorted by node id. A header line is optional.
inline std::map<std::int64_t, int> read_labels_csv(std::istream& in) {
  std::map<std::int64_t, int> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("expected 'node_id,label'", line_no);
    const std::string a = line.substr(0, comma);
    const std::string b = line.substr(comma + 1);
    if (line_no == 1 && a == "node_id") continue;
    const std::int64_t id = detail::parse_node_token(a, line_no);
    const auto label = static_cast<int>(detail::parse_node_token(b, line_no));
    if (!out.emplace(id, label).second) throw ParseError("duplicate node id " + a, line_no);
  }
  if (out.empty()) throw ParseError("label file contains no rows", 0);
  return out;
}

inline std::map<std::int64_t, int> load_labels_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open label file '" + path + "'");
  return read_labels_csv(in);
}

/// Lines up two label tables on their node ids; both must cover the same ids.
inline std::pair<Labeling, Labeling> align_labels(const std::map<std::int64_t, int>& a,
                                                  const std::map<std::int64_t, int>& b) {
  if (a.size() != b.size()) throw ContractError("label files cover different numbers of nodes");
  std::pair<Labeling, Labeling> out;
  out.first.reserve(a.size());
  out.second.reserve(b.size());
  auto it = b.begin();
  for (const auto& [id, label] : a) {
    if (it->first != id) throw ContractError("label files disagree on node id " + std::to_string(id));
    out.first.push_back(label);
    out.second.push_back(it->second);
    ++it;
  }
  return out;
}

/// Remapped index -> original id table.
inline void write_node_map_csv(std::ostream& out, std::span<const std::int64_t> original_ids) {
  out << "node_index,original_id\n";
  for (std::size_t i = 0; i < original_ids.size(); ++i) out << i << ',' << original_ids[i] << '\n';
}

}  // namespace fedspectral
