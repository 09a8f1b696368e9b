#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cablekit/error.hpp"

namespace cablekit {

using Index = std::size_t;
using VertexId = std::string;

/// Function on the vertex set, indexed like the owning graph's vertices.
using VertexFunction = std::vector<double>;

// ---------------------------------------------------------------------------
// Validation reports
// ---------------------------------------------------------------------------

enum class Violation {
  EmptyVertexSet,
  DuplicateVertexId,
  NonPositiveMeasure,
  NegativeWeight,
  NonFiniteWeight,
  NonzeroDiagonal,
  Asymmetry,
  ConflictingEntry,
  Disconnected,
  NonPositiveLength,
  NonPositiveMu,
  NonPositiveNu,
  DuplicateEdgeId,
  UnknownEndpoint,
};

inline const char* to_string(Violation v) {
  switch (v) {
    case Violation::EmptyVertexSet: return "empty-vertex-set";
    case Violation::DuplicateVertexId: return "duplicate-vertex-id";
    case Violation::NonPositiveMeasure: return "non-positive-measure";
    case Violation::NegativeWeight: return "negative-weight";
    case Violation::NonFiniteWeight: return "non-finite-weight";
    case Violation::NonzeroDiagonal: return "nonzero-diagonal";
    case Violation::Asymmetry: return "asymmetry";
    case Violation::ConflictingEntry: return "conflicting-entry";
    case Violation::Disconnected: return "disconnected";
    case Violation::NonPositiveLength: return "non-positive-length";
    case Violation::NonPositiveMu: return "non-positive-mu";
    case Violation::NonPositiveNu: return "non-positive-nu";
    case Violation::DuplicateEdgeId: return "duplicate-edge-id";
    case Violation::UnknownEndpoint: return "unknown-endpoint";
  }
  return "unknown";
}

struct Issue {
  Violation kind;
  std::string where;  // offending vertex, pair "(u,v)" or edge id
  std::string detail;

  bool operator==(const Issue&) const = default;
};

struct ValidationReport {
  std::vector<Issue> issues;

  bool ok() const { return issues.empty(); }
  bool has(Violation v) const {
    return std::any_of(issues.begin(), issues.end(),
                       [v](const Issue& i) { return i.kind == v; });
  }
  std::string summary() const {
    std::ostringstream os;
    for (const auto& i : issues) os << to_string(i.kind) << " at " << i.where << ": " << i.detail << '\n';
    return os.str();
  }
  bool operator==(const ValidationReport&) const = default;
};

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), Index{0}); }
  Index find(Index x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(Index a, Index b) { parent_[find(a)] = find(b); }
  std::size_t components() {
    std::size_t c = 0;
    for (Index i = 0; i < parent_.size(); ++i) c += (find(i) == i);
    return c;
  }

 private:
  std::vector<Index> parent_;
};

inline std::string pair_label(const std::string& u, const std::string& v) { return "(" + u + "," + v + ")"; }

inline std::unordered_map<VertexId, Index> index_ids(const std::vector<VertexId>& ids,
                                                     std::vector<VertexId>* duplicates = nullptr) {
  std::unordered_map<VertexId, Index> map;
  map.reserve(ids.size());
  for (Index i = 0; i < ids.size(); ++i) {
    if (!map.emplace(ids[i], i).second && duplicates) duplicates->push_back(ids[i]);
  }
  return map;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Discrete weighted graphs (V, m; b)
// ---------------------------------------------------------------------------

/// One stored value of the edge weight b(u, v) for an ordered pair.
struct WeightEntry {
  Index u;
  Index v;
  double b;
};

/// A vertex set with measure m and edge weight b.
///
/// The weight is stored as given. Each input entry (u, v, b) defines b(u, v)
/// and, unless the reverse pair is also listed, the mirrored value b(v, u).
/// Listing both directions with different values yields an asymmetric graph,
/// which validate_discrete() reports. Algorithms that need a valid graph
/// call require_valid() first.
class DiscreteGraph {
 public:
  struct Neighbor {
    Index vertex;
    double weight;
  };

  DiscreteGraph() = default;

  DiscreteGraph(std::vector<VertexId> ids, std::vector<double> measure, std::span<const WeightEntry> entries)
      : ids_(std::move(ids)), measure_(std::move(measure)) {
    if (ids_.size() != measure_.size()) throw FormatError("vertex id and measure counts differ");
    index_ = detail::index_ids(ids_, &duplicate_ids_);
    std::map<std::pair<Index, Index>, double> directed;
    for (const auto& e : entries) {
      if (e.u >= ids_.size() || e.v >= ids_.size()) throw FormatError("weight entry refers to unknown vertex");
      auto [it, inserted] = directed.emplace(std::pair{e.u, e.v}, e.b);
      if (!inserted && !(it->second == e.b)) conflicts_.push_back({e.u, e.v});
    }
    rows_.assign(ids_.size(), {});
    for (const auto& [key, b] : directed) {
      rows_[key.first].push_back({key.second, b});
      const std::pair<Index, Index> rev{key.second, key.first};
      if (key.first != key.second && !directed.contains(rev)) rows_[key.second].push_back({key.first, b});
    }
    for (auto& row : rows_) {
      std::sort(row.begin(), row.end(), [](const Neighbor& a, const Neighbor& b) { return a.vertex < b.vertex; });
    }
  }

  std::size_t size() const { return ids_.size(); }
  const std::vector<VertexId>& ids() const { return ids_; }
  const VertexId& id(Index v) const { return ids_.at(v); }
  std::optional<Index> find(const VertexId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  Index index(const VertexId& id) const {
    if (auto i = find(id)) return *i;
    throw DomainError("unknown vertex '" + id + "'");
  }

  std::span<const double> measure() const { return measure_; }
  double m(Index v) const { return measure_.at(v); }

  /// Stored row of v: every recorded b(v, u), including zero entries.
  std::span<const Neighbor> row(Index v) const { return rows_.at(v); }

  double b(Index u, Index v) const {
    const auto& row = rows_.at(u);
    auto it = std::lower_bound(row.begin(), row.end(), v,
                               [](const Neighbor& n, Index x) { return n.vertex < x; });
    return (it != row.end() && it->vertex == v) ? it->weight : 0.0;
  }

  /// Neighbors u with b(v, u) > 0, u != v.
  std::vector<Neighbor> neighbors(Index v) const {
    std::vector<Neighbor> out;
    for (const auto& n : rows_.at(v))
      if (n.vertex != v && n.weight > 0.0) out.push_back(n);
    return out;
  }

  /// Unordered pairs u < v with b(u, v) > 0 and their weight.
  std::vector<WeightEntry> edges() const {
    std::vector<WeightEntry> out;
    for (Index u = 0; u < rows_.size(); ++u)
      for (const auto& n : rows_[u])
        if (u < n.vertex && n.weight > 0.0) out.push_back({u, n.vertex, n.weight});
    return out;
  }

  /// Σ_u b(u, v); equals Σ_u b(v, u) on symmetric graphs.
  double weight_sum(Index v) const {
    double s = 0.0;
    for (const auto& n : rows_.at(v))
      if (n.vertex != v) s += n.weight;
    return s;
  }

  const std::vector<VertexId>& duplicate_ids() const { return duplicate_ids_; }
  const std::vector<std::pair<Index, Index>>& conflicts() const { return conflicts_; }

  /// Incremental construction by vertex id.
  class Builder {
   public:
    Builder& vertex(VertexId id, double m) {
      ids_.push_back(std::move(id));
      measure_.push_back(m);
      return *this;
    }
    Builder& edge(const VertexId& u, const VertexId& v, double b) {
      entries_.push_back({lookup(u), lookup(v), b});
      return *this;
    }
    Builder& edge(Index u, Index v, double b) {
      entries_.push_back({u, v, b});
      return *this;
    }
    DiscreteGraph build() const { return DiscreteGraph(ids_, measure_, entries_); }

   private:
    Index lookup(const VertexId& id) const {
      auto it = std::find(ids_.begin(), ids_.end(), id);
      if (it == ids_.end()) throw DomainError("unknown vertex '" + id + "'");
      return static_cast<Index>(it - ids_.begin());
    }
    std::vector<VertexId> ids_;
    std::vector<double> measure_;
    std::vector<WeightEntry> entries_;
  };

 private:
  std::vector<VertexId> ids_;
  std::vector<double> measure_;
  std::unordered_map<VertexId, Index> index_;
  std::vector<std::vector<Neighbor>> rows_;
  std::vector<VertexId> duplicate_ids_;
  std::vector<std::pair<Index, Index>> conflicts_;
};

/// Checks conditions (symmetry, zero diagonal, nonnegativity, connectivity,
/// positive measure). Finite graphs are trivially locally finite.
inline ValidationReport validate_discrete(const DiscreteGraph& g) {
  ValidationReport rep;
  auto add = [&rep](Violation k, std::string where, std::string detail) {
    rep.issues.push_back({k, std::move(where), std::move(detail)});
  };
  if (g.size() == 0) {
    add(Violation::EmptyVertexSet, "", "graph has no vertices");
    return rep;
  }
  for (const auto& id : g.duplicate_ids()) add(Violation::DuplicateVertexId, id, "vertex id listed twice");
  for (Index v = 0; v < g.size(); ++v) {
    const double m = g.m(v);
    if (!(m > 0.0) || !std::isfinite(m)) add(Violation::NonPositiveMeasure, g.id(v), "m = " + std::to_string(m));
  }
  for (const auto& [u, v] : g.conflicts())
    add(Violation::ConflictingEntry, detail::pair_label(g.id(u), g.id(v)), "pair listed twice with different weights");
  for (Index u = 0; u < g.size(); ++u) {
    for (const auto& n : g.row(u)) {
      const auto label = detail::pair_label(g.id(u), g.id(n.vertex));
      if (!std::isfinite(n.weight)) {
        add(Violation::NonFiniteWeight, label, "b is not finite");
        continue;
      }
      if (n.weight < 0.0) add(Violation::NegativeWeight, label, "b = " + std::to_string(n.weight));
      if (n.vertex == u) {
        if (n.weight != 0.0) add(Violation::NonzeroDiagonal, label, "b(v,v) = " + std::to_string(n.weight));
      } else if (u < n.vertex) {
        const double back = g.b(n.vertex, u);
        if (!(back == n.weight))
          add(Violation::Asymmetry, label,
              "b(u,v) = " + std::to_string(n.weight) + " but b(v,u) = " + std::to_string(back));
      }
    }
  }
  detail::DisjointSets sets(g.size());
  for (Index u = 0; u < g.size(); ++u)
    for (const auto& n : g.row(u))
      if (n.vertex != u && n.weight > 0.0) sets.unite(u, n.vertex);
  if (const auto c = sets.components(); c > 1)
    add(Violation::Disconnected, "", "support graph has " + std::to_string(c) + " components");
  return rep;
}

inline void require_valid(const DiscreteGraph& g) {
  if (auto rep = validate_discrete(g); !rep.ok()) throw InvalidGraph("invalid discrete graph:\n" + rep.summary());
}

// ---------------------------------------------------------------------------
// Simple combinatorial graphs
// ---------------------------------------------------------------------------

/// Loop-free graph without parallel edges; neighbor lists are sorted.
class SimpleGraph {
 public:
  SimpleGraph() = default;

  /// Throws InvalidGraph on loops or repeated pairs.
  SimpleGraph(std::vector<VertexId> ids, std::span<const std::pair<Index, Index>> edges)
      : ids_(std::move(ids)), adjacency_(ids_.size()) {
    for (const auto& [u, v] : edges) {
      if (u >= ids_.size() || v >= ids_.size()) throw InvalidGraph("edge refers to unknown vertex");
      if (u == v) throw InvalidGraph("loop at vertex '" + ids_[u] + "' in a simple graph");
      if (std::find(adjacency_[u].begin(), adjacency_[u].end(), v) != adjacency_[u].end())
        throw InvalidGraph("parallel edges between '" + ids_[u] + "' and '" + ids_[v] + "'");
      adjacency_[u].push_back(v);
      adjacency_[v].push_back(u);
    }
    for (auto& a : adjacency_) std::sort(a.begin(), a.end());
  }

  std::size_t size() const { return ids_.size(); }
  const std::vector<VertexId>& ids() const { return ids_; }
  std::span<const Index> neighbors(Index v) const { return adjacency_.at(v); }
  std::size_t degree(Index v) const { return adjacency_.at(v).size(); }
  std::size_t edge_count() const {
    std::size_t s = 0;
    for (const auto& a : adjacency_) s += a.size();
    return s / 2;
  }
  std::vector<std::pair<Index, Index>> edges() const {
    std::vector<std::pair<Index, Index>> out;
    for (Index u = 0; u < adjacency_.size(); ++u)
      for (Index v : adjacency_[u])
        if (u < v) out.emplace_back(u, v);
    return out;
  }
  bool connected() const {
    detail::DisjointSets sets(size());
    for (const auto& [u, v] : edges()) sets.unite(u, v);
    return size() == 0 || sets.components() == 1;
  }

 private:
  std::vector<VertexId> ids_;
  std::vector<std::vector<Index>> adjacency_;
};

/// The simple graph with u ~ v exactly when b(u, v) > 0. No thresholding.
inline SimpleGraph support_graph(const DiscreteGraph& g) {
  std::vector<std::pair<Index, Index>> pairs;
  for (const auto& e : g.edges()) pairs.emplace_back(e.u, e.v);
  return SimpleGraph(g.ids(), pairs);
}

// ---------------------------------------------------------------------------
// Metric graph models (V, E, |.|, mu, nu)
// ---------------------------------------------------------------------------

/// An edge identified with [0, length]; `initial` sits at 0.
struct MetricEdge {
  std::string id;
  Index initial = 0;
  Index terminal = 0;
  double length = 1.0;
  double mu = 1.0;
  double nu = 1.0;

  bool is_loop() const { return initial == terminal; }
  Index other(Index v) const { return v == initial ? terminal : initial; }
};

/// One element of the oriented star of a vertex. A loop contributes two.
struct Incidence {
  Index edge;
  bool at_initial;  // the vertex is the edge's initial endpoint for this incidence
};

class MetricGraphModel {
 public:
  MetricGraphModel() = default;

  MetricGraphModel(std::vector<VertexId> ids, std::vector<MetricEdge> edges)
      : ids_(std::move(ids)), edges_(std::move(edges)) {
    index_ = detail::index_ids(ids_, &duplicate_ids_);
    star_.assign(ids_.size(), {});
    for (Index e = 0; e < edges_.size(); ++e) {
      const auto& edge = edges_[e];
      if (edge.initial >= ids_.size() || edge.terminal >= ids_.size()) {
        dangling_.push_back(e);
        continue;
      }
      star_[edge.initial].push_back({e, true});
      star_[edge.terminal].push_back({e, false});
    }
  }

  std::size_t vertex_count() const { return ids_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<VertexId>& ids() const { return ids_; }
  const VertexId& id(Index v) const { return ids_.at(v); }
  std::optional<Index> find(const VertexId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  Index index(const VertexId& id) const {
    if (auto i = find(id)) return *i;
    throw DomainError("unknown vertex '" + id + "'");
  }
  const std::vector<MetricEdge>& edges() const { return edges_; }
  const MetricEdge& edge(Index e) const { return edges_.at(e); }
  std::span<const Incidence> star(Index v) const { return star_.at(v); }

  const std::vector<VertexId>& duplicate_ids() const { return duplicate_ids_; }
  const std::vector<Index>& dangling_edges() const { return dangling_; }

  class Builder {
   public:
    Builder& vertex(VertexId id) {
      ids_.push_back(std::move(id));
      return *this;
    }
    Builder& edge(std::string id, const VertexId& u, const VertexId& v, double length, double mu = 1.0,
                  double nu = 1.0) {
      edges_.push_back({std::move(id), lookup(u), lookup(v), length, mu, nu});
      return *this;
    }
    Builder& edge(MetricEdge e) {
      edges_.push_back(std::move(e));
      return *this;
    }
    MetricGraphModel build() const { return MetricGraphModel(ids_, edges_); }

   private:
    Index lookup(const VertexId& id) const {
      auto it = std::find(ids_.begin(), ids_.end(), id);
      if (it == ids_.end()) throw DomainError("unknown vertex '" + id + "'");
      return static_cast<Index>(it - ids_.begin());
    }
    std::vector<VertexId> ids_;
    std::vector<MetricEdge> edges_;
  };

 private:
  std::vector<VertexId> ids_;
  std::vector<MetricEdge> edges_;
  std::unordered_map<VertexId, Index> index_;
  std::vector<std::vector<Incidence>> star_;
  std::vector<VertexId> duplicate_ids_;
  std::vector<Index> dangling_;
};

/// Loops and parallel edges are accepted.
inline ValidationReport validate_model(const MetricGraphModel& g) {
  ValidationReport rep;
  auto add = [&rep](Violation k, std::string where, std::string detail) {
    rep.issues.push_back({k, std::move(where), std::move(detail)});
  };
  if (g.vertex_count() == 0) {
    add(Violation::EmptyVertexSet, "", "model has no vertices");
    return rep;
  }
  for (const auto& id : g.duplicate_ids()) add(Violation::DuplicateVertexId, id, "vertex id listed twice");
  std::unordered_map<std::string, int> seen;
  for (const auto& e : g.edges())
    if (++seen[e.id] == 2) add(Violation::DuplicateEdgeId, e.id, "edge id listed twice");
  for (Index e : g.dangling_edges()) add(Violation::UnknownEndpoint, g.edge(e).id, "endpoint outside vertex set");
  auto positive = [](double x) { return x > 0.0 && std::isfinite(x); };
  for (const auto& e : g.edges()) {
    if (!positive(e.length)) add(Violation::NonPositiveLength, e.id, "length = " + std::to_string(e.length));
    if (!positive(e.mu)) add(Violation::NonPositiveMu, e.id, "mu = " + std::to_string(e.mu));
    if (!positive(e.nu)) add(Violation::NonPositiveNu, e.id, "nu = " + std::to_string(e.nu));
  }
  detail::DisjointSets sets(g.vertex_count());
  for (const auto& e : g.edges())
    if (e.initial < g.vertex_count() && e.terminal < g.vertex_count()) sets.unite(e.initial, e.terminal);
  if (const auto c = sets.components(); c > 1)
    add(Violation::Disconnected, "", "model has " + std::to_string(c) + " components");
  return rep;
}

inline void require_valid(const MetricGraphModel& g) {
  if (auto rep = validate_model(g); !rep.ok()) throw InvalidGraph("invalid metric model:\n" + rep.summary());
}

/// Size of the oriented star: non-loop incidences plus twice the loops.
inline std::size_t degree(const MetricGraphModel& g, Index v) {
  if (v >= g.vertex_count()) throw DomainError("unknown vertex index " + std::to_string(v));
  return g.star(v).size();
}

inline std::size_t degree(const MetricGraphModel& g, const VertexId& v) { return degree(g, g.index(v)); }

// ---------------------------------------------------------------------------
// Functions on metric graphs
// ---------------------------------------------------------------------------

/// A function on a metric graph stored by node values.
///
/// `edge_nodes[e]` samples the function at `k + 1` equally spaced points of
/// edge e (k >= 1 elements), from the initial endpoint to the terminal one,
/// and the function is linear in between. k = 1 is an edgewise affine
/// function.
struct EdgewiseFunction {
  VertexFunction vertex_values;
  std::vector<std::vector<double>> edge_nodes;
};

/// True when every edge trace agrees with the vertex value, up to `tol`
/// relative to max(1, |value|).
inline bool is_continuous(const MetricGraphModel& g, const EdgewiseFunction& f, double tol = 1e-12) {
  if (f.vertex_values.size() != g.vertex_count() || f.edge_nodes.size() != g.edge_count()) return false;
  auto close = [tol](double a, double b) { return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)}); };
  for (Index e = 0; e < g.edge_count(); ++e) {
    const auto& nodes = f.edge_nodes[e];
    if (nodes.size() < 2) return false;
    const auto& edge = g.edge(e);
    if (!close(nodes.front(), f.vertex_values[edge.initial]) || !close(nodes.back(), f.vertex_values[edge.terminal]))
      return false;
  }
  return true;
}

}  // namespace cablekit
