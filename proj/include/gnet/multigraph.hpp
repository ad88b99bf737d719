#pragma once

// Weighted multigraphs: the combinatorial domain of every net.

#include "gnet/common.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace gnet {

struct EdgeSpec {
  std::string id;
  std::string v0;
  std::string v1;
  int multiplicity = 1;
};

struct Edge {
  std::string id;
  int v0 = -1;  // -1: endpoint names an unknown vertex (reported by validate)
  int v1 = -1;
  int multiplicity = 1;

  int endpoint(int i) const { return i == 0 ? v0 : v1; }
};

/// An incident edge-end (E, i) with pi_E(i) = v.
struct IncidentPair {
  int edge = 0;
  int end = 0;
  friend bool operator==(const IncidentPair&, const IncidentPair&) = default;
  friend auto operator<=>(const IncidentPair&, const IncidentPair&) = default;
};

struct VertexStar {
  int vertex = 0;
  std::vector<IncidentPair> pairs;
  IncidentPair preferred;
  int m() const { return static_cast<int>(pairs.size()); }
};

enum class GraphClass { GoodStar, LoopWithMultiplicity, NotGood };

inline const char* to_string(GraphClass c) {
  switch (c) {
    case GraphClass::GoodStar: return "GoodStar";
    case GraphClass::LoopWithMultiplicity: return "LoopWithMultiplicity";
    case GraphClass::NotGood: return "NotGood";
  }
  return "?";
}

class WeightedMultigraph {
 public:
  WeightedMultigraph() = default;

  WeightedMultigraph(std::vector<std::string> vertex_ids, const std::vector<EdgeSpec>& edges)
      : vertices_(std::move(vertex_ids)) {
    edges_.reserve(edges.size());
    for (const auto& e : edges) {
      edges_.push_back(Edge{e.id, find_vertex(e.v0).value_or(-1), find_vertex(e.v1).value_or(-1),
                            e.multiplicity});
    }
  }

  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<std::string>& vertex_ids() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_.at(e); }
  const std::string& vertex_id(int v) const { return vertices_.at(v); }

  std::optional<int> find_vertex(const std::string& id) const {
    auto it = std::find(vertices_.begin(), vertices_.end(), id);
    if (it == vertices_.end()) return std::nullopt;
    return static_cast<int>(it - vertices_.begin());
  }

  std::optional<int> find_edge(const std::string& id) const {
    for (int e = 0; e < edge_count(); ++e)
      if (edges_[e].id == id) return e;
    return std::nullopt;
  }

  /// Incident pairs of v in (edge index, end) order.
  std::vector<IncidentPair> incident(int v) const {
    std::vector<IncidentPair> out;
    for (int e = 0; e < edge_count(); ++e)
      for (int i = 0; i < 2; ++i)
        if (edges_[e].endpoint(i) == v) out.push_back({e, i});
    return out;
  }

  /// Same graph with every multiplicity replaced by `n`.
  WeightedMultigraph with_multiplicity(int n) const {
    WeightedMultigraph g = *this;
    for (auto& e : g.edges_) e.multiplicity = n;
    return g;
  }

 private:
  std::vector<std::string> vertices_;
  std::vector<Edge> edges_;
};

/// Invariant violations, one human-readable line each; empty when valid.
inline std::vector<std::string> validate(const WeightedMultigraph& g) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& id : g.vertex_ids())
    if (!seen.insert(id).second) out.push_back("duplicate vertex id '" + id + "'");
  seen.clear();
  for (const auto& e : g.edges()) {
    if (!seen.insert(e.id).second) out.push_back("duplicate edge id '" + e.id + "'");
    if (e.multiplicity < 1)
      out.push_back("edge '" + e.id + "' has multiplicity " + std::to_string(e.multiplicity) + " < 1");
    if (e.v0 < 0 || e.v1 < 0) out.push_back("edge '" + e.id + "' references an unknown vertex");
  }
  for (int v = 0; v < g.vertex_count(); ++v) {
    const auto m = g.incident(v).size();
    if (m < 2) {
      out.push_back("vertex '" + g.vertex_id(v) + "' has " + std::to_string(m) +
                    " incident edge-end(s); at least 2 required");
    }
  }
  if (g.edge_count() == 0) out.push_back("graph has no edges");
  return out;
}

inline bool is_connected(const WeightedMultigraph& g) {
  if (g.vertex_count() == 0) return false;
  std::vector<int> parent(g.vertex_count());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : g.edges()) parent[find(e.v0)] = find(e.v1);
  const int root = find(0);
  for (int v = 1; v < g.vertex_count(); ++v)
    if (find(v) != root) return false;
  return true;
}

inline GraphClass classify(const WeightedMultigraph& g) {
  if (auto errs = validate(g); !errs.empty()) throw ValidationError("classify: invalid graph: " + errs.front());
  if (g.vertex_count() == 1 && g.edge_count() == 1) return GraphClass::LoopWithMultiplicity;
  if (!is_connected(g)) return GraphClass::NotGood;
  for (int v = 0; v < g.vertex_count(); ++v) {
    std::set<int> distinct;
    for (const auto& p : g.incident(v)) distinct.insert(p.edge);
    if (distinct.size() < 3) return GraphClass::NotGood;
  }
  return GraphClass::GoodStar;
}

/// Star of v; the preferred pair is the lowest (edge index, end).
inline VertexStar star(const WeightedMultigraph& g, int v) {
  if (v < 0 || v >= g.vertex_count()) throw ValidationError("star: unknown vertex index " + std::to_string(v));
  VertexStar s;
  s.vertex = v;
  s.pairs = g.incident(v);
  if (s.pairs.empty()) throw ValidationError("star: vertex '" + g.vertex_id(v) + "' has no incident edges");
  s.preferred = s.pairs.front();
  return s;
}

inline VertexStar star(const WeightedMultigraph& g, const std::string& id) {
  auto v = g.find_vertex(id);
  if (!v) throw ValidationError("star: unknown vertex '" + id + "'");
  return star(g, *v);
}

}  // namespace gnet
