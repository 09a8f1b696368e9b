#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cablekit/graph.hpp"

namespace cablekit {

/// Symmetric function on unordered vertex pairs, stored sparsely.
class WeightFunction {
 public:
  using Key = std::pair<Index, Index>;

  void set(Index u, Index v, double w) { values_[key(u, v)] = w; }
  double operator()(Index u, Index v) const {
    auto it = values_.find(key(u, v));
    return it == values_.end() ? 0.0 : it->second;
  }
  bool contains(Index u, Index v) const { return values_.contains(key(u, v)); }
  const std::map<Key, double>& entries() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double max() const {
    double s = 0.0;
    for (const auto& [k, w] : values_) s = std::max(s, w);
    return s;
  }

  /// p ≡ c on the support of b.
  static WeightFunction constant(const DiscreteGraph& g, double c) {
    WeightFunction p;
    for (const auto& e : g.edges()) p.set(e.u, e.v, c);
    return p;
  }

 private:
  static Key key(Index u, Index v) { return u < v ? Key{u, v} : Key{v, u}; }
  std::map<Key, double> values_;
};

/// Per-vertex result of testing Σ_u b(u,v) w(u,v)² ≤ m(v).
struct IntrinsicCheck {
  bool ok = true;
  Index worst_vertex = 0;
  double slack = 0.0;  // min over v of m(v) - Σ_u b(u,v) w(u,v)²
  std::vector<double> sums;
};

namespace detail {

template <class Distance>
IntrinsicCheck check_intrinsic_sums(const DiscreteGraph& g, Distance&& dist, double rel_tol) {
  IntrinsicCheck out;
  out.sums.assign(g.size(), 0.0);
  out.slack = std::numeric_limits<double>::infinity();
  for (Index v = 0; v < g.size(); ++v) {
    double s = 0.0;
    for (const auto& n : g.neighbors(v)) {
      const double d = dist(n.vertex, v);
      s += n.weight * d * d;
    }
    out.sums[v] = s;
    const double slack = g.m(v) - s;
    if (slack < out.slack) {
      out.slack = slack;
      out.worst_vertex = v;
    }
    if (slack < -rel_tol * g.m(v)) out.ok = false;
  }
  if (g.size() == 0) out.slack = 0.0;
  return out;
}

}  // namespace detail

/// Checks that p is a weight function for g (p > 0 exactly where b > 0).
inline void require_weight_function(const DiscreteGraph& g, const WeightFunction& p) {
  const auto edges = g.edges();
  if (p.size() != edges.size()) throw DomainError("weight function support differs from the support of b");
  for (const auto& e : edges) {
    const double w = p(e.u, e.v);
    if (!p.contains(e.u, e.v) || !(w > 0.0) || !std::isfinite(w))
      throw DomainError("weight function must be positive on " + detail::pair_label(g.id(e.u), g.id(e.v)));
  }
}

/// Σ_u b(u,v) p(u,v)² ≤ m(v) at every vertex, tolerance 1e-12·m(v).
inline IntrinsicCheck check_intrinsic_weight(const DiscreteGraph& g, const WeightFunction& p) {
  return detail::check_intrinsic_sums(g, [&p](Index u, Index v) { return p(u, v); }, 1e-12);
}

// ---------------------------------------------------------------------------
// Metric model -> discrete graph
// ---------------------------------------------------------------------------

/// Boundary graph of a model: b(u,v) = Σ ν(e)/|e| over edges joining u ≠ v,
/// m(v) = Σ |e| μ(e) over the oriented star (loops count twice).
inline DiscreteGraph discretize(const MetricGraphModel& g) {
  require_valid(g);
  std::vector<double> m(g.vertex_count(), 0.0);
  std::map<std::pair<Index, Index>, double> b;
  for (const auto& e : g.edges()) {
    const double mass = e.length * e.mu;
    m[e.initial] += mass;
    m[e.terminal] += mass;
    if (e.is_loop()) continue;
    const auto key = std::minmax(e.initial, e.terminal);
    b[{key.first, key.second}] += e.nu / e.length;
  }
  std::vector<WeightEntry> entries;
  entries.reserve(b.size());
  for (const auto& [k, w] : b) entries.push_back({k.first, k.second, w});
  return DiscreteGraph(g.ids(), std::move(m), entries);
}

/// η(e) = |e| √(μ(e)/ν(e)).
inline double intrinsic_length(const MetricEdge& e) { return e.length * std::sqrt(e.mu / e.nu); }

/// η*(E) = sup_e η(e); zero for an edgeless model.
inline double intrinsic_size(const MetricGraphModel& g) {
  double s = 0.0;
  for (const auto& e : g.edges()) s = std::max(s, intrinsic_length(e));
  return s;
}

// ---------------------------------------------------------------------------
// Discrete graph -> cable system
// ---------------------------------------------------------------------------

/// p(u,v) = min(m(u)/W(u), m(v)/W(v))^{1/2} with W(v) = Σ_u b(u,v).
inline WeightFunction default_intrinsic_weight(const DiscreteGraph& g) {
  require_valid(g);
  std::vector<double> ratio(g.size());
  for (Index v = 0; v < g.size(); ++v) ratio[v] = g.m(v) / g.weight_sum(v);
  WeightFunction p;
  for (const auto& e : g.edges()) p.set(e.u, e.v, std::sqrt(std::min(ratio[e.u], ratio[e.v])));
  return p;
}

/// A model whose boundary graph is a prescribed (V, m; b).
struct CableSystem {
  MetricGraphModel model;
  WeightFunction weight;             // intrinsic weight used for the edge lengths
  std::vector<Index> loop_vertices;  // vertices that received a deficit loop
  std::vector<double> deficits;      // m(v) - Σ_u b(u,v) p(u,v)², per vertex
  static constexpr const char* scheme = "intrinsic-weight-with-deficit-loops";
  static constexpr double loop_length = 0.5;
};

/// Builds a cable system from an intrinsic weight p.
///
/// Each pair with b(u,v) > 0 becomes one edge of length p(u,v) and
/// μ = ν = b(u,v) p(u,v). A vertex whose mass is not exhausted by its edges
/// gets a loop of length 1/2 with μ = ν equal to the deficit. Deficits within
/// 1e-12·m(v) of zero are dropped; more negative ones throw.
inline CableSystem realize(const DiscreteGraph& g, const WeightFunction& p) {
  require_valid(g);
  require_weight_function(g, p);
  CableSystem cs;
  cs.weight = p;
  std::vector<MetricEdge> edges;
  for (const auto& e : g.edges()) {
    const double w = p(e.u, e.v);
    edges.push_back({g.id(e.u) + "--" + g.id(e.v), e.u, e.v, w, e.b * w, e.b * w});
  }
  const auto check = check_intrinsic_weight(g, p);
  cs.deficits.resize(g.size());
  for (Index v = 0; v < g.size(); ++v) {
    const double deficit = g.m(v) - check.sums[v];
    cs.deficits[v] = deficit;
    const double tol = 1e-12 * g.m(v);
    if (deficit < -tol)
      throw DomainError("weight violates the intrinsic inequality at vertex '" + g.id(v) +
                        "' (deficit " + std::to_string(deficit) + ")");
    if (deficit > tol) {
      edges.push_back({"loop:" + g.id(v), v, v, CableSystem::loop_length, deficit, deficit});
      cs.loop_vertices.push_back(v);
    }
  }
  cs.model = MetricGraphModel(g.ids(), std::move(edges));
  return cs;
}

inline CableSystem realize(const DiscreteGraph& g) { return realize(g, default_intrinsic_weight(g)); }

// ---------------------------------------------------------------------------
// Harmonic correspondence
// ---------------------------------------------------------------------------

/// Vertex trace f|_V.
inline VertexFunction restrict_to_vertices(const EdgewiseFunction& f) { return f.vertex_values; }

/// The continuous edgewise affine function with vertex trace fv. On a loop
/// it is the constant fv(v).
inline EdgewiseFunction extend_affine(const MetricGraphModel& g, const VertexFunction& fv) {
  if (fv.size() != g.vertex_count())
    throw DomainError("vertex function has " + std::to_string(fv.size()) + " values, model has " +
                      std::to_string(g.vertex_count()) + " vertices");
  EdgewiseFunction f;
  f.vertex_values = fv;
  f.edge_nodes.reserve(g.edge_count());
  for (const auto& e : g.edges()) f.edge_nodes.push_back({fv[e.initial], fv[e.terminal]});
  return f;
}

/// Σ over the oriented star of v of ν(e)·∂f, with ∂ the derivative pointing
/// into the edge. Vanishes everywhere iff f satisfies the Kirchhoff
/// conditions at every vertex.
inline VertexFunction kirchhoff_defect(const MetricGraphModel& g, const EdgewiseFunction& f) {
  if (!is_continuous(g, f)) throw DomainError("function is not continuous at the vertices");
  VertexFunction defect(g.vertex_count(), 0.0);
  for (Index e = 0; e < g.edge_count(); ++e) {
    const auto& edge = g.edge(e);
    const auto& nodes = f.edge_nodes[e];
    const double step = edge.length / static_cast<double>(nodes.size() - 1);
    defect[edge.initial] += edge.nu * (nodes[1] - nodes[0]) / step;
    defect[edge.terminal] += edge.nu * (nodes[nodes.size() - 2] - nodes.back()) / step;
  }
  return defect;
}

}  // namespace cablekit
