#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cablekit/correspondence.hpp"
#include "cablekit/graph.hpp"

namespace cablekit {

// ---------------------------------------------------------------------------
// Discrete Laplacians
// ---------------------------------------------------------------------------

/// (Lf)(v) = (1/m(v)) Σ_u b(v,u) (f(v) - f(u)).
inline VertexFunction apply_discrete_laplacian(const DiscreteGraph& g, const VertexFunction& f) {
  if (f.size() != g.size()) throw DomainError("function has the wrong number of vertex values");
  VertexFunction out(g.size(), 0.0);
  for (Index v = 0; v < g.size(); ++v) {
    double s = 0.0;
    for (const auto& n : g.neighbors(v)) s += n.weight * (f[v] - f[n.vertex]);
    out[v] = s / g.m(v);
  }
  return out;
}

/// ⟨f, h⟩ in ℓ²(V; m).
inline double inner_product(const DiscreteGraph& g, const VertexFunction& f, const VertexFunction& h) {
  double s = 0.0;
  for (Index v = 0; v < g.size(); ++v) s += g.m(v) * f.at(v) * h.at(v);
  return s;
}

/// Deg(v) = (1/m(v)) Σ_u b(u,v).
inline VertexFunction weighted_degree(const DiscreteGraph& g) {
  VertexFunction out(g.size());
  for (Index v = 0; v < g.size(); ++v) out[v] = g.weight_sum(v) / g.m(v);
  return out;
}

/// q[f] = ½ Σ_{u,v} b(u,v) |f(u) - f(v)|², summed once per unordered pair.
inline double energy_form_discrete(const DiscreteGraph& g, const VertexFunction& f) {
  if (f.size() != g.size()) throw DomainError("function has the wrong number of vertex values");
  double q = 0.0;
  for (const auto& e : g.edges()) {
    const double d = f[e.u] - f[e.v];
    q += e.b * d * d;
  }
  return q;
}

namespace detail {

inline DiscreteGraph preset(const SimpleGraph& s, bool normalized) {
  if (!s.connected()) throw InvalidGraph("preset Laplacians need a connected graph");
  std::vector<double> m(s.size(), 1.0);
  if (normalized)
    for (Index v = 0; v < s.size(); ++v) m[v] = static_cast<double>(s.degree(v));
  std::vector<WeightEntry> entries;
  for (const auto& [u, v] : s.edges()) entries.push_back({u, v, 1.0});
  return DiscreteGraph(s.ids(), std::move(m), entries);
}

}  // namespace detail

/// m ≡ 1, b = adjacency.
inline DiscreteGraph combinatorial_laplacian(const SimpleGraph& s) { return detail::preset(s, false); }

/// m = deg, b = adjacency; L = I - (Markov operator).
inline DiscreteGraph normalized_laplacian(const SimpleGraph& s) { return detail::preset(s, true); }

/// Combinatorial skeleton of a model; throws InvalidGraph on loops or
/// parallel edges.
inline SimpleGraph skeleton(const MetricGraphModel& g) {
  std::vector<std::pair<Index, Index>> pairs;
  for (const auto& e : g.edges()) pairs.emplace_back(e.initial, e.terminal);
  return SimpleGraph(g.ids(), pairs);
}

/// A f = λ M f with A(v,v) = Σ_u b(v,u), A(v,u) = -b(v,u), M = diag(m).
struct DiscreteOperatorMatrix {
  Eigen::MatrixXd stiffness;
  Eigen::VectorXd mass;
};

inline DiscreteOperatorMatrix operator_matrix(const DiscreteGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  DiscreteOperatorMatrix op{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd(n)};
  for (Index v = 0; v < g.size(); ++v) {
    op.mass(static_cast<Eigen::Index>(v)) = g.m(v);
    for (const auto& nb : g.neighbors(v)) {
      op.stiffness(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(nb.vertex)) -= nb.weight;
      op.stiffness(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(v)) += nb.weight;
    }
  }
  return op;
}

// ---------------------------------------------------------------------------
// Spectral results
// ---------------------------------------------------------------------------

/// Cap on the size of dense eigenproblems; CABLEKIT_MAX_DOFS overrides 5000.
inline std::size_t default_max_dofs() {
  if (const char* env = std::getenv("CABLEKIT_MAX_DOFS")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 5000;
}

struct SolverOptions {
  std::size_t max_dofs = default_max_dofs();
  bool eigenvectors = true;
};

struct SpectralResult {
  std::vector<double> eigenvalues;  // ascending
  Eigen::MatrixXd eigenvectors;     // columns, M-orthonormal; empty if not requested
  Eigen::MatrixXd mass;             // M of the generalized problem
  std::string kind;                 // "discrete" or "metric-fem"
  double mesh_h = 0.0;
  std::size_t matrix_size = 0;

  bool complete() const {
    return eigenvectors.cols() == static_cast<Eigen::Index>(matrix_size) && matrix_size > 0;
  }
};

struct EigenCluster {
  double value;
  std::size_t multiplicity;
};

/// Groups ascending eigenvalues whose relative gap is below `rel_gap`
/// (absolute gap near zero, scaled by the largest magnitude).
inline std::vector<EigenCluster> cluster_eigenvalues(const std::vector<double>& eigs, double rel_gap = 1e-8) {
  std::vector<EigenCluster> out;
  double scale = 1.0;
  for (double x : eigs) scale = std::max(scale, std::abs(x));
  for (double x : eigs) {
    if (!out.empty() && std::abs(x - out.back().value) <= rel_gap * std::max(std::abs(x), 1e-2 * scale)) {
      ++out.back().multiplicity;
    } else {
      out.push_back({x, 1});
    }
  }
  return out;
}

namespace detail {

inline void normalize_columns(Eigen::MatrixXd& vecs, const Eigen::MatrixXd& mass) {
  for (Eigen::Index j = 0; j < vecs.cols(); ++j) {
    const double norm = std::sqrt(vecs.col(j).dot(mass * vecs.col(j)));
    vecs.col(j) /= norm;
    // deterministic sign: first entry of largest magnitude is positive
    Eigen::Index arg = 0;
    vecs.col(j).cwiseAbs().maxCoeff(&arg);
    if (vecs(arg, j) < 0.0) vecs.col(j) *= -1.0;
  }
}

inline void check_capacity(std::size_t n, const SolverOptions& opt) {
  if (n > opt.max_dofs)
    throw CapacityError("eigenproblem with " + std::to_string(n) + " unknowns exceeds the cap of " +
                        std::to_string(opt.max_dofs) + " (set CABLEKIT_MAX_DOFS to raise it)");
}

}  // namespace detail

/// All eigenvalues of L in ℓ²(V; m), from the symmetric form
/// M^{-1/2} A M^{-1/2}.
inline SpectralResult spectrum_discrete(const DiscreteGraph& g, const SolverOptions& opt = {}) {
  require_valid(g);
  detail::check_capacity(g.size(), opt);
  const auto op = operator_matrix(g);
  const Eigen::VectorXd inv_sqrt = op.mass.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd sym = inv_sqrt.asDiagonal() * op.stiffness * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      sym, opt.eigenvectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("symmetric eigensolver did not converge");
  SpectralResult res;
  res.kind = "discrete";
  res.matrix_size = g.size();
  res.mass = op.mass.asDiagonal();
  res.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
  if (opt.eigenvectors) {
    res.eigenvectors = inv_sqrt.asDiagonal() * solver.eigenvectors();
    detail::normalize_columns(res.eigenvectors, res.mass);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Finite elements on metric graphs
// ---------------------------------------------------------------------------

/// Conforming P1 discretization of the Kirchhoff Laplacian's energy form.
///
/// Vertex dofs are shared by all incident edges, which imposes continuity;
/// the flux condition is natural for the form and needs no constraint.
struct FemSystem {
  static constexpr Index kConstrained = std::numeric_limits<Index>::max();

  /// Global dof per node of every edge, from initial to terminal endpoint;
  /// kConstrained for eliminated Dirichlet vertices.
  std::vector<std::vector<Index>> edge_dofs;
  std::vector<Index> vertex_dof;  // kConstrained when eliminated
  std::vector<Index> dirichlet;
  std::size_t dof_count = 0;
  double h = 0.0;
  Eigen::SparseMatrix<double> stiffness;  // ∫ ν u' w'
  Eigen::SparseMatrix<double> mass;       // ∫ μ u w
};

/// Number of elements used for an edge of the given length at mesh size h.
inline std::size_t element_count(double length, double h) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(length / h * (1.0 - 1e-12))));
}

inline FemSystem assemble_fem(const MetricGraphModel& g, double h, const std::vector<Index>& dirichlet = {}) {
  require_valid(g);
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("mesh size h must be positive");
  FemSystem fem;
  fem.h = h;
  fem.dirichlet = dirichlet;
  std::sort(fem.dirichlet.begin(), fem.dirichlet.end());
  fem.dirichlet.erase(std::unique(fem.dirichlet.begin(), fem.dirichlet.end()), fem.dirichlet.end());
  std::vector<bool> constrained(g.vertex_count(), false);
  for (Index v : fem.dirichlet) {
    if (v >= g.vertex_count()) throw DomainError("Dirichlet vertex out of range");
    constrained[v] = true;
  }
  Index next = 0;
  fem.vertex_dof.assign(g.vertex_count(), FemSystem::kConstrained);
  for (Index v = 0; v < g.vertex_count(); ++v)
    if (!constrained[v]) fem.vertex_dof[v] = next++;

  std::vector<Eigen::Triplet<double>> k_entries;
  std::vector<Eigen::Triplet<double>> m_entries;
  fem.edge_dofs.resize(g.edge_count());
  for (Index e = 0; e < g.edge_count(); ++e) {
    const auto& edge = g.edge(e);
    const std::size_t n_el = element_count(edge.length, h);
    auto& dofs = fem.edge_dofs[e];
    dofs.push_back(fem.vertex_dof[edge.initial]);
    for (std::size_t i = 1; i < n_el; ++i) dofs.push_back(next++);
    dofs.push_back(fem.vertex_dof[edge.terminal]);
    const double he = edge.length / static_cast<double>(n_el);
    const double k_loc = edge.nu / he;
    const double m_diag = edge.mu * he / 3.0;
    const double m_off = edge.mu * he / 6.0;
    for (std::size_t i = 0; i < n_el; ++i) {
      const Index a = dofs[i];
      const Index b = dofs[i + 1];
      const bool fa = a != FemSystem::kConstrained;
      const bool fb = b != FemSystem::kConstrained;
      auto add = [](auto& list, Index r, Index c, double x) {
        list.emplace_back(static_cast<int>(r), static_cast<int>(c), x);
      };
      if (fa) {
        add(k_entries, a, a, k_loc);
        add(m_entries, a, a, m_diag);
      }
      if (fb) {
        add(k_entries, b, b, k_loc);
        add(m_entries, b, b, m_diag);
      }
      if (fa && fb) {
        add(k_entries, a, b, -k_loc);
        add(k_entries, b, a, -k_loc);
        add(m_entries, a, b, m_off);
        add(m_entries, b, a, m_off);
      }
    }
  }
  fem.dof_count = next;
  const auto n = static_cast<Eigen::Index>(next);
  fem.stiffness.resize(n, n);
  fem.mass.resize(n, n);
  fem.stiffness.setFromTriplets(k_entries.begin(), k_entries.end());
  fem.mass.setFromTriplets(m_entries.begin(), m_entries.end());
  return fem;
}

/// Lowest k eigenvalues of the Kirchhoff Laplacian (Dirichlet at the listed
/// vertices), from the dense generalized problem K u = λ M u.
inline SpectralResult spectrum_metric(const MetricGraphModel& g, double h, std::size_t k,
                                      const std::vector<Index>& dirichlet = {}, const SolverOptions& opt = {}) {
  const auto fem = assemble_fem(g, h, dirichlet);
  if (k == 0 || k > fem.dof_count)
    throw DomainError("requested " + std::to_string(k) + " eigenvalues but the system has " +
                      std::to_string(fem.dof_count) + " unknowns");
  detail::check_capacity(fem.dof_count, opt);
  const Eigen::MatrixXd K(fem.stiffness);
  const Eigen::MatrixXd M(fem.mass);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      K, M, (opt.eigenvectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly) | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success) throw Error("generalized eigensolver did not converge");
  SpectralResult res;
  res.kind = "metric-fem";
  res.mesh_h = h;
  res.matrix_size = fem.dof_count;
  res.mass = M;
  const auto& vals = solver.eigenvalues();
  res.eigenvalues.assign(vals.data(), vals.data() + static_cast<Eigen::Index>(k));
  if (opt.eigenvectors) {
    res.eigenvectors = solver.eigenvectors().leftCols(static_cast<Eigen::Index>(k));
    detail::normalize_columns(res.eigenvectors, res.mass);
  }
  return res;
}

/// Q[f] = Σ_e ν(e) ∫_e |f'|² for piecewise linear f.
inline double energy_form_metric(const MetricGraphModel& g, const EdgewiseFunction& f) {
  if (f.edge_nodes.size() != g.edge_count()) throw DomainError("function does not match the model's edges");
  double q = 0.0;
  for (Index e = 0; e < g.edge_count(); ++e) {
    const auto& nodes = f.edge_nodes[e];
    if (nodes.size() < 2) throw DomainError("edge function needs at least two nodes");
    const double step = g.edge(e).length / static_cast<double>(nodes.size() - 1);
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      const double d = nodes[i + 1] - nodes[i];
      s += d * d;
    }
    q += g.edge(e).nu * s / step;
  }
  return q;
}

/// Dof vector of a piecewise linear function on a FEM system's mesh.
inline Eigen::VectorXd fem_interpolate(const FemSystem& fem, const MetricGraphModel& g, const EdgewiseFunction& f) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fem.dof_count));
  for (Index e = 0; e < g.edge_count(); ++e) {
    const auto& dofs = fem.edge_dofs[e];
    const auto& nodes = f.edge_nodes.at(e);
    const std::size_t n_el = dofs.size() - 1;
    for (std::size_t i = 0; i <= n_el; ++i) {
      if (dofs[i] == FemSystem::kConstrained) continue;
      // evaluate f at fraction i / n_el of the edge
      const double x = static_cast<double>(i) / static_cast<double>(n_el) * static_cast<double>(nodes.size() - 1);
      const auto j = std::min(static_cast<std::size_t>(x), nodes.size() - 2);
      const double w = x - static_cast<double>(j);
      out(static_cast<Eigen::Index>(dofs[i])) = (1.0 - w) * nodes[j] + w * nodes[j + 1];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Heat semigroup
// ---------------------------------------------------------------------------

/// f(t) = Σ_j e^{-λ_j t} ⟨f0, φ_j⟩_M φ_j over a complete eigenbasis.
inline Eigen::VectorXd heat_semigroup(const SpectralResult& spec, double t, const Eigen::VectorXd& f0) {
  if (!(t >= 0.0)) throw DomainError("time must be nonnegative");
  if (!spec.complete()) throw DomainError("heat semigroup needs a complete eigendecomposition");
  if (f0.size() != static_cast<Eigen::Index>(spec.matrix_size)) throw DomainError("initial datum has the wrong size");
  const Eigen::VectorXd coeffs = spec.eigenvectors.transpose() * (spec.mass * f0);
  Eigen::VectorXd decay(coeffs.size());
  for (Eigen::Index j = 0; j < coeffs.size(); ++j)
    decay(j) = std::exp(-spec.eigenvalues[static_cast<std::size_t>(j)] * t) * coeffs(j);
  return spec.eigenvectors * decay;
}

inline VertexFunction heat_semigroup(const SpectralResult& spec, double t, const VertexFunction& f0) {
  const Eigen::VectorXd out =
      heat_semigroup(spec, t, Eigen::Map<const Eigen::VectorXd>(f0.data(), static_cast<Eigen::Index>(f0.size())).eval());
  return {out.data(), out.data() + out.size()};
}

// ---------------------------------------------------------------------------
// Equilateral spectral correspondence
// ---------------------------------------------------------------------------

struct EquilateralOptions {
  double h = 0.005;
  double lambda_cap = 50.0;
  double tau = 1e-6;                 // |sin(√λ ℓ)| ≤ tau is exempt
  std::optional<double> tolerance;   // default: max(C h² λ, 1e-9) with C = 1
  SolverOptions solver{default_max_dofs(), false};
};

struct EquilateralEntry {
  double lambda;
  double mapped;    // 1 - cos(√λ ℓ)
  double nearest;   // closest eigenvalue of L_norm
  double distance;
  double tolerance;
  bool exempt;
  bool ok;
};

struct EquilateralReport {
  bool ok = true;
  double edge_length = 0.0;
  std::vector<double> normalized_spectrum;
  std::vector<EquilateralEntry> entries;
  std::size_t checked = 0;
  std::size_t exempted = 0;
};

/// On an equilateral model (|e| = ℓ, μ = ν = 1, simple skeleton) every
/// Kirchhoff eigenvalue λ with sin(√λ ℓ) ≠ 0 satisfies
/// 1 - cos(√λ ℓ) ∈ σ(L_norm). Solving -u'' = λu edgewise and imposing the
/// flux condition gives Σ_{u~v} f(u) = deg(v) cos(√λ ℓ) f(v).
inline EquilateralReport equilateral_correspondence_check(const MetricGraphModel& g,
                                                          const EquilateralOptions& opt = {}) {
  require_valid(g);
  if (g.edge_count() == 0) throw DomainError("equilateral check needs at least one edge");
  const double ell = g.edge(0).length;
  for (const auto& e : g.edges()) {
    if (std::abs(e.length - ell) > 1e-12 * ell) throw DomainError("model is not equilateral");
    if (e.mu != 1.0 || e.nu != 1.0) throw DomainError("equilateral check needs mu = nu = 1");
  }
  const auto simple = skeleton(g);
  EquilateralReport rep;
  rep.edge_length = ell;
  rep.normalized_spectrum = spectrum_discrete(normalized_laplacian(simple), {opt.solver.max_dofs, false}).eigenvalues;

  const auto fem = assemble_fem(g, opt.h);
  auto solver_opt = opt.solver;
  solver_opt.eigenvectors = false;
  const auto spec = spectrum_metric(g, opt.h, fem.dof_count, {}, solver_opt);
  for (double lambda : spec.eigenvalues) {
    if (lambda > opt.lambda_cap) break;
    const double root = std::sqrt(std::max(lambda, 0.0));
    EquilateralEntry entry{};
    entry.lambda = lambda;
    entry.mapped = 1.0 - std::cos(root * ell);
    entry.tolerance = opt.tolerance.value_or(std::max(opt.h * opt.h * std::max(lambda, 0.0), 1e-9));
    entry.exempt = std::abs(std::sin(root * ell)) <= opt.tau;
    double best = std::numeric_limits<double>::infinity();
    for (double mu : rep.normalized_spectrum) {
      if (std::abs(mu - entry.mapped) < best) {
        best = std::abs(mu - entry.mapped);
        entry.nearest = mu;
      }
    }
    entry.distance = best;
    entry.ok = entry.exempt || entry.distance <= entry.tolerance;
    if (entry.exempt) {
      ++rep.exempted;
    } else {
      ++rep.checked;
    }
    rep.ok = rep.ok && entry.ok;
    rep.entries.push_back(entry);
  }
  return rep;
}

}  // namespace cablekit
