#pragma once

#include <algorithm>
#include <iterator>
#include <string>
#include <vector>

namespace cbn {

/// Sorted, duplicate-free list of node indices.
using NodeSet = std::vector<int>;

inline NodeSet make_set(std::vector<int> nodes) {
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

inline bool contains(const NodeSet& s, int v) { return std::binary_search(s.begin(), s.end(), v); }

inline NodeSet set_union(const NodeSet& a, const NodeSet& b) {
  NodeSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline NodeSet set_intersection(const NodeSet& a, const NodeSet& b) {
  NodeSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline NodeSet set_difference(const NodeSet& a, const NodeSet& b) {
  NodeSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline bool is_subset(const NodeSet& a, const NodeSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline std::string to_string(const NodeSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "}";
}

}  // namespace cbn
