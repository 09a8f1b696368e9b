#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cablekit/correspondence.hpp"
#include "cablekit/graph.hpp"

namespace cablekit {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Shortest paths
// ---------------------------------------------------------------------------

/// Weighted adjacency lists with nonnegative costs.
using CostGraph = std::vector<std::vector<std::pair<Index, double>>>;

inline std::vector<double> dijkstra(const CostGraph& graph, Index source) {
  std::vector<double> dist(graph.size(), kInfinity);
  using Item = std::pair<double, Index>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist.at(source) = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    for (const auto& [v, cost] : graph[u]) {
      const double nd = d + cost;
      if (nd < dist[v]) {
        dist[v] = nd;
        queue.emplace(nd, v);
      }
    }
  }
  return dist;
}

/// Skeleton of a model with η-costs. Loops are dropped: they never shorten a
/// vertex-to-vertex path.
inline CostGraph eta_skeleton(const MetricGraphModel& g) {
  CostGraph graph(g.vertex_count());
  for (const auto& e : g.edges()) {
    if (e.is_loop()) continue;
    const double eta = intrinsic_length(e);
    graph[e.initial].emplace_back(e.terminal, eta);
    graph[e.terminal].emplace_back(e.initial, eta);
  }
  return graph;
}

// ---------------------------------------------------------------------------
// Metrics on the vertex set
// ---------------------------------------------------------------------------

enum class MetricSource { Combinatorial, PathMetric, RestrictionOfEta, Custom };

inline const char* to_string(MetricSource s) {
  switch (s) {
    case MetricSource::Combinatorial: return "combinatorial";
    case MetricSource::PathMetric: return "path-metric";
    case MetricSource::RestrictionOfEta: return "restriction-of-eta";
    case MetricSource::Custom: return "custom";
  }
  return "unknown";
}

/// Dense symmetric distance table over a finite vertex set.
class MetricOnVertices {
 public:
  MetricOnVertices() = default;
  MetricOnVertices(MetricSource source, std::size_t n) : source_(source), n_(n), table_(n * n, kInfinity) {
    for (Index i = 0; i < n; ++i) table_[i * n + i] = 0.0;
  }

  MetricSource source() const { return source_; }
  std::size_t size() const { return n_; }
  double operator()(Index u, Index v) const { return table_.at(u * n_ + v); }
  void set(Index u, Index v, double d) {
    table_.at(u * n_ + v) = d;
    table_.at(v * n_ + u) = d;
  }
  void set_row(Index u, const std::vector<double>& row) {
    for (Index v = 0; v < n_; ++v) table_.at(u * n_ + v) = row[v];
  }

 private:
  MetricSource source_ = MetricSource::Custom;
  std::size_t n_ = 0;
  std::vector<double> table_;
};

/// η(e) for every edge, in edge order.
inline std::vector<double> eta_lengths(const MetricGraphModel& g) {
  std::vector<double> out;
  out.reserve(g.edge_count());
  for (const auto& e : g.edges()) out.push_back(intrinsic_length(e));
  return out;
}

/// ϱ_η(source, ·) on the vertices. Dijkstra on the skeleton is exact for
/// vertex pairs because path infima are attained along edge sequences.
inline std::vector<double> intrinsic_metric_vertices(const MetricGraphModel& g, Index source) {
  require_valid(g);
  if (source >= g.vertex_count()) throw DomainError("unknown source vertex");
  return dijkstra(eta_skeleton(g), source);
}

/// ϱ_η restricted to V × V, tagged restriction-of-eta.
inline MetricOnVertices restrict_metric(const MetricGraphModel& g) {
  require_valid(g);
  const auto skeleton = eta_skeleton(g);
  MetricOnVertices d(MetricSource::RestrictionOfEta, g.vertex_count());
  for (Index s = 0; s < g.vertex_count(); ++s) d.set_row(s, dijkstra(skeleton, s));
  return d;
}

/// Path metric ϱ_p(u,v) = inf over b-paths of Σ p(v_{k-1}, v_k).
inline MetricOnVertices path_metric(const DiscreteGraph& g, const WeightFunction& p,
                                    MetricSource tag = MetricSource::PathMetric) {
  require_valid(g);
  require_weight_function(g, p);
  CostGraph graph(g.size());
  for (const auto& e : g.edges()) {
    graph[e.u].emplace_back(e.v, p(e.u, e.v));
    graph[e.v].emplace_back(e.u, p(e.u, e.v));
  }
  MetricOnVertices d(tag, g.size());
  for (Index s = 0; s < g.size(); ++s) d.set_row(s, dijkstra(graph, s));
  return d;
}

/// Combinatorial (word) distance: the path metric of p ≡ 1.
inline MetricOnVertices combinatorial_metric(const DiscreteGraph& g) {
  return path_metric(g, WeightFunction::constant(g, 1.0), MetricSource::Combinatorial);
}

/// Checks Σ_u b(u,v) d(u,v)² ≤ m(v) with tolerance 1e-12·m(v).
inline IntrinsicCheck is_intrinsic(const DiscreteGraph& g, const MetricOnVertices& d) {
  require_valid(g);
  if (d.size() != g.size()) throw DomainError("metric and graph sizes differ");
  return detail::check_intrinsic_sums(g, [&d](Index u, Index v) { return d(u, v); }, 1e-12);
}

/// s(ϱ) = sup { d(u,v) : b(u,v) > 0 }.
inline double jump_size(const DiscreteGraph& g, const MetricOnVertices& d) {
  double s = 0.0;
  for (const auto& e : g.edges()) s = std::max(s, d(e.u, e.v));
  return s;
}

// ---------------------------------------------------------------------------
// Points on edges
// ---------------------------------------------------------------------------

/// Point at fraction t ∈ [0, 1] along edge `edge`, measured from its initial
/// endpoint.
struct EdgePoint {
  Index edge = 0;
  double t = 0.0;
};

/// ϱ_η between arbitrary points, computed by splitting the carrying edges at
/// the query points and running Dijkstra on the refined skeleton.
inline std::vector<double> point_distances(const MetricGraphModel& g, const EdgePoint& from,
                                           const std::vector<EdgePoint>& to) {
  std::vector<EdgePoint> points{from};
  points.insert(points.end(), to.begin(), to.end());
  for (const auto& p : points) {
    if (p.edge >= g.edge_count()) throw DomainError("edge index out of range");
    if (!(p.t >= 0.0 && p.t <= 1.0)) throw DomainError("edge position must lie in [0, 1]");
  }
  const std::size_t nv = g.vertex_count();
  CostGraph graph(nv + points.size());
  std::vector<std::vector<Index>> on_edge(g.edge_count());
  for (Index i = 0; i < points.size(); ++i) on_edge[points[i].edge].push_back(i);
  auto link = [&graph](Index a, Index b, double c) {
    graph[a].emplace_back(b, c);
    graph[b].emplace_back(a, c);
  };
  for (Index e = 0; e < g.edge_count(); ++e) {
    const auto& edge = g.edge(e);
    const double eta = intrinsic_length(edge);
    auto& ids = on_edge[e];
    std::sort(ids.begin(), ids.end(), [&points](Index a, Index b) { return points[a].t < points[b].t; });
    Index prev = edge.initial;
    double prev_t = 0.0;
    for (Index i : ids) {
      link(prev, nv + i, (points[i].t - prev_t) * eta);
      prev = nv + i;
      prev_t = points[i].t;
    }
    if (!(ids.empty() && edge.is_loop())) link(prev, edge.terminal, (1.0 - prev_t) * eta);
  }
  const auto dist = dijkstra(graph, nv);
  std::vector<double> out;
  out.reserve(to.size());
  for (Index i = 0; i < to.size(); ++i) out.push_back(dist[nv + 1 + i]);
  return out;
}

/// A vertex as a point: the initial end of an incident edge when it exists.
inline EdgePoint vertex_point(const MetricGraphModel& g, Index v) {
  const auto star = g.star(v);
  if (star.empty()) throw DomainError("vertex '" + g.id(v) + "' has no incident edge");
  return {star.front().edge, star.front().at_initial ? 0.0 : 1.0};
}

// ---------------------------------------------------------------------------
// Quasi-isometry
// ---------------------------------------------------------------------------

struct QuasiIsometryReport {
  bool ok = true;
  double scale_a = 1.0;
  double offset_b = 0.0;
  double net_radius = 0.0;         // R = η*(E)
  std::size_t pairs_checked = 0;
  double max_pair_discrepancy = 0.0;  // |ϱ_V(u,v) - ϱ_η(u,v)|
  std::size_t points_checked = 0;
  double max_net_distance = 0.0;  // sup over sampled x of ϱ_η(x, V)
  std::vector<std::string> violations;
};

/// Checks that the identity V → G is a quasi-isometry with a = 1, b = 0 and
/// R = η*(E) on sampled vertex pairs and sampled edge points.
inline QuasiIsometryReport quasi_isometry_check(const MetricGraphModel& g, std::size_t samples, std::uint64_t seed) {
  require_valid(g);
  QuasiIsometryReport rep;
  rep.net_radius = intrinsic_size(g);
  const auto restricted = restrict_metric(g);
  std::mt19937_64 rng(seed);
  const std::size_t n = g.vertex_count();
  auto uniform_index = [&rng](std::size_t bound) { return static_cast<Index>(rng() % bound); };
  auto uniform_unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  if (g.edge_count() > 0) {
    for (std::size_t s = 0; s < samples; ++s) {
      const Index u = uniform_index(n);
      const Index v = uniform_index(n);
      const double direct = point_distances(g, vertex_point(g, u), {vertex_point(g, v)}).front();
      const double diff = std::abs(direct - restricted(u, v));
      rep.max_pair_discrepancy = std::max(rep.max_pair_discrepancy, diff);
      ++rep.pairs_checked;
      if (diff > 1e-12 * std::max(1.0, direct))
        rep.violations.push_back("distance mismatch for " + detail::pair_label(g.id(u), g.id(v)));
    }
  }
  // Net property: ϱ_η(x, V) = min over the carrying edge's endpoints.
  for (Index e = 0; e < g.edge_count(); ++e) {
    const auto& edge = g.edge(e);
    const double eta = intrinsic_length(edge);
    std::vector<double> ts{0.5};
    for (std::size_t s = 0; s < samples; ++s) ts.push_back(uniform_unit());
    for (double t : ts) {
      const double to_vertex = std::min(t, 1.0 - t) * eta;
      rep.max_net_distance = std::max(rep.max_net_distance, to_vertex);
      ++rep.points_checked;
      if (!(to_vertex < rep.net_radius))
        rep.violations.push_back("point on edge " + edge.id + " is not within R of a vertex");
    }
  }
  rep.ok = rep.violations.empty();
  return rep;
}

// ---------------------------------------------------------------------------
// Balls
// ---------------------------------------------------------------------------

struct BallReport {
  Index center = 0;
  double radius = 0.0;
  std::vector<Index> vertices;  // vertices within distance ≤ radius
  double measure = 0.0;
};

/// Discrete ball {v : d(center, v) ≤ r} with measure Σ m(v).
inline BallReport ball(const DiscreteGraph& g, const MetricOnVertices& d, Index center, double r) {
  if (!(r >= 0.0)) throw DomainError("ball radius must be nonnegative");
  if (center >= g.size()) throw DomainError("unknown center vertex");
  BallReport rep{center, r, {}, 0.0};
  for (Index v = 0; v < g.size(); ++v) {
    if (d(center, v) <= r) {
      rep.vertices.push_back(v);
      rep.measure += g.m(v);
    }
  }
  return rep;
}

/// μ-measure of {x : ϱ_η(x, center) ≤ r} given vertex distances from the
/// center. Each edge is covered from both ends; the covered intrinsic length
/// is clipped at η(e) and converted back to Lebesgue length.
inline double ball_measure(const MetricGraphModel& g, const std::vector<double>& dist, double r) {
  double measure = 0.0;
  for (const auto& e : g.edges()) {
    const double eta = intrinsic_length(e);
    const double from_initial = std::clamp(r - dist[e.initial], 0.0, eta);
    const double from_terminal = std::clamp(r - dist[e.terminal], 0.0, eta);
    const double covered = std::min(eta, from_initial + from_terminal);
    measure += e.mu * e.length * (covered / eta);
  }
  return measure;
}

inline BallReport ball(const MetricGraphModel& g, Index center, double r) {
  if (!(r >= 0.0)) throw DomainError("ball radius must be nonnegative");
  const auto dist = intrinsic_metric_vertices(g, center);
  BallReport rep{center, r, {}, ball_measure(g, dist, r)};
  for (Index v = 0; v < g.vertex_count(); ++v)
    if (dist[v] <= r) rep.vertices.push_back(v);
  return rep;
}

}  // namespace cablekit
