#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sgp {

// Hard cap: everything downstream does dense spectral analysis.
inline constexpr int kMaxNodes = 256;

enum class TopologyKind {
  FullyConnected,
  DiExp,
  Bipartite,
  BTree,
  DiRing,
  SubRing,
  Star,
};

inline const char* to_string(TopologyKind k) {
  switch (k) {
    case TopologyKind::FullyConnected: return "FullyConnected";
    case TopologyKind::DiExp: return "DiExp";
    case TopologyKind::Bipartite: return "Bipartite";
    case TopologyKind::BTree: return "BTree";
    case TopologyKind::DiRing: return "DiRing";
    case TopologyKind::SubRing: return "SubRing";
    case TopologyKind::Star: return "Star";
  }
  throw std::logic_error("unknown TopologyKind");
}

inline TopologyKind topology_kind_from_string(const std::string& s) {
  if (s == "FullyConnected") return TopologyKind::FullyConnected;
  if (s == "DiExp") return TopologyKind::DiExp;
  if (s == "Bipartite") return TopologyKind::Bipartite;
  if (s == "BTree") return TopologyKind::BTree;
  if (s == "DiRing") return TopologyKind::DiRing;
  if (s == "SubRing") return TopologyKind::SubRing;
  if (s == "Star") return TopologyKind::Star;
  throw std::invalid_argument("unknown topology kind: " + s);
}

// Directed communication graph. An edge (j, i) means "i receives from j".
// Self-loops are never stored; every neighbor set is self-inclusive by
// definition, which is what guarantees aperiodicity of the mixing matrix.
struct DirectedGraph {
  int m = 0;
  std::set<std::pair<int, int>> edges;  // (from j, to i)

  void add_edge(int j, int i) {
    if (j < 0 || j >= m || i < 0 || i >= m)
      throw std::out_of_range("edge endpoint out of range");
    if (j == i) return;  // implied, never stored
    edges.emplace(j, i);
  }

  bool has_edge(int j, int i) const { return edges.count({j, i}) > 0; }
};

// In-neighbors of i (senders to i), self-inclusive, sorted.
inline std::vector<int> in_neighbors(const DirectedGraph& g, int i) {
  if (i < 0 || i >= g.m) throw std::out_of_range("node index out of range");
  std::vector<int> out{i};
  for (const auto& [j, k] : g.edges)
    if (k == i) out.push_back(j);
  std::sort(out.begin(), out.end());
  return out;
}

// Out-neighbors of i (receivers from i), self-inclusive, sorted.
inline std::vector<int> out_neighbors(const DirectedGraph& g, int i) {
  if (i < 0 || i >= g.m) throw std::out_of_range("node index out of range");
  std::vector<int> out{i};
  for (const auto& [j, k] : g.edges)
    if (j == i) out.push_back(k);
  std::sort(out.begin(), out.end());
  return out;
}

inline bool is_balanced(const DirectedGraph& g) {
  std::vector<int> indeg(g.m, 0), outdeg(g.m, 0);
  for (const auto& [j, i] : g.edges) {
    ++outdeg[j];
    ++indeg[i];
  }
  for (int i = 0; i < g.m; ++i)
    if (indeg[i] != outdeg[i]) return false;
  return true;
}

namespace detail {

inline std::vector<std::vector<int>> adjacency(const DirectedGraph& g, bool reversed) {
  std::vector<std::vector<int>> adj(g.m);
  for (const auto& [j, i] : g.edges) {
    if (reversed)
      adj[i].push_back(j);
    else
      adj[j].push_back(i);
  }
  return adj;
}

inline int bfs_reach_count(const std::vector<std::vector<int>>& adj, int start) {
  std::vector<char> seen(adj.size(), 0);
  std::vector<int> stack{start};
  seen[start] = 1;
  int count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
  }
  return count;
}

}  // namespace detail

// Strong connectivity: node 0 reaches everyone forward and backward.
inline bool is_strongly_connected(const DirectedGraph& g) {
  if (g.m <= 1) return true;
  return detail::bfs_reach_count(detail::adjacency(g, false), 0) == g.m &&
         detail::bfs_reach_count(detail::adjacency(g, true), 0) == g.m;
}

inline DirectedGraph build_topology(TopologyKind kind, int m) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (m > kMaxNodes) throw std::invalid_argument("m exceeds supported maximum (256)");
  if (kind == TopologyKind::Bipartite && m % 2 != 0)
    throw std::invalid_argument("Bipartite requires even m");

  DirectedGraph g;
  g.m = m;
  switch (kind) {
    case TopologyKind::FullyConnected:
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          if (i != j) g.add_edge(i, j);
      break;
    case TopologyKind::DiExp: {
      // i -> (i + 2^k) mod m for 0 <= k < ceil(log2 m), deduplicated.
      int kmax = 0;
      while ((1 << kmax) < m) ++kmax;  // kmax = ceil(log2 m)
      for (int i = 0; i < m; ++i)
        for (int k = 0; k < kmax; ++k) {
          int j = (i + (1 << k)) % m;
          if (j != i) g.add_edge(i, j);
        }
      break;
    }
    case TopologyKind::Bipartite: {
      int half = m / 2;
      for (int i = 0; i < half; ++i)
        for (int j = half; j < m; ++j) {
          g.add_edge(i, j);
          g.add_edge(j, i);
        }
      break;
    }
    case TopologyKind::BTree:
      // Complete binary tree on 0..m-1 (children of i are 2i+1, 2i+2),
      // parent<->child edges in both directions.
      for (int i = 0; i < m; ++i)
        for (int c = 2 * i + 1; c <= 2 * i + 2 && c < m; ++c) {
          g.add_edge(i, c);
          g.add_edge(c, i);
        }
      break;
    case TopologyKind::DiRing:
      for (int i = 0; i < m; ++i)
        if ((i + 1) % m != i) g.add_edge(i, (i + 1) % m);
      break;
    case TopologyKind::SubRing:
      for (int i = 0; i < m; ++i)
        if ((i + 1) % m != i) g.add_edge(i, (i + 1) % m);
      if (m / 2 != 0) g.add_edge(0, m / 2);  // single chord: the minimal imbalance
      break;
    case TopologyKind::Star:
      for (int i = 1; i < m; ++i) {
        g.add_edge(0, i);
        g.add_edge(i, 0);
      }
      break;
  }

  if (!is_strongly_connected(g))
    throw std::logic_error("catalog construction produced a non-strongly-connected graph");
  return g;
}

// Edge-list text format: first line m, then one "j i" pair per line.
inline std::string to_edge_list(const DirectedGraph& g) {
  std::ostringstream os;
  os << g.m << '\n';
  for (const auto& [j, i] : g.edges) os << j << ' ' << i << '\n';
  return os.str();
}

inline DirectedGraph from_edge_list(std::istream& is) {
  DirectedGraph g;
  if (!(is >> g.m) || g.m < 1 || g.m > kMaxNodes)
    throw std::runtime_error("edge list: bad node count");
  int j, i;
  while (is >> j >> i) g.add_edge(j, i);
  return g;
}

inline DirectedGraph from_edge_list(const std::string& text) {
  std::istringstream is(text);
  return from_edge_list(is);
}

}  // namespace sgp
