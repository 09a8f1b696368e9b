#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cablekit/correspondence.hpp"
#include "cablekit/graph.hpp"
#include "cablekit/metrics.hpp"

namespace cablekit {

// ---------------------------------------------------------------------------
// Group catalog
// ---------------------------------------------------------------------------

enum class GroupFamily { Lattice, Free, Heisenberg, Cyclic };

/// A finitely generated group from the supported catalog with its standard
/// symmetric generating set: ±e_i for Z^d, a_i^{±1} for F_k, x^{±1}, y^{±1}
/// for the integer Heisenberg group, ±1 for Z/nZ.
struct GroupSpec {
  GroupFamily family = GroupFamily::Lattice;
  int rank = 1;  // d for Z^d, k for F_k, n for Z/nZ; unused for Heisenberg

  static GroupSpec lattice(int d) { return {GroupFamily::Lattice, d}; }
  static GroupSpec free(int k) { return {GroupFamily::Free, k}; }
  static GroupSpec heisenberg() { return {GroupFamily::Heisenberg, 3}; }
  static GroupSpec cyclic(int n) { return {GroupFamily::Cyclic, n}; }

  /// Accepts Z, Z<d>, F<k>, H3 (or Heisenberg), C<n>.
  static GroupSpec parse(const std::string& s) {
    auto number = [&s](std::size_t from) {
      if (from >= s.size()) throw DomainError("missing rank in group '" + s + "'");
      std::size_t used = 0;
      int v = 0;
      try {
        v = std::stoi(s.substr(from), &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != s.size() - from) throw DomainError("malformed group '" + s + "'");
      return v;
    };
    GroupSpec g;
    if (s == "Z") {
      g = lattice(1);
    } else if (s == "H3" || s == "Heisenberg" || s == "Heisenberg3Z") {
      g = heisenberg();
    } else if (!s.empty() && s[0] == 'Z') {
      g = lattice(number(1));
    } else if (!s.empty() && s[0] == 'F') {
      g = free(number(1));
    } else if (!s.empty() && s[0] == 'C') {
      g = cyclic(number(1));
    } else {
      throw DomainError("unsupported group family '" + s + "'");
    }
    g.check();
    return g;
  }

  void check() const {
    switch (family) {
      case GroupFamily::Lattice:
        if (rank < 1 || rank > 8) throw DomainError("lattice dimension must be in [1, 8]");
        break;
      case GroupFamily::Free:
        if (rank < 1 || rank > 26) throw DomainError("free group rank must be in [1, 26]");
        break;
      case GroupFamily::Cyclic:
        if (rank < 2) throw DomainError("cyclic group order must be at least 2");
        break;
      case GroupFamily::Heisenberg: break;
    }
  }

  std::string name() const {
    switch (family) {
      case GroupFamily::Lattice: return "Z" + std::to_string(rank);
      case GroupFamily::Free: return "F" + std::to_string(rank);
      case GroupFamily::Heisenberg: return "H3";
      case GroupFamily::Cyclic: return "C" + std::to_string(rank);
    }
    return "?";
  }
};

/// Canonical form: coordinates (Z^d), residue (Z/nZ), (a, b, c) for the
/// matrix [[1,a,c],[0,1,b],[0,0,1]], or a reduced word of letters ±i.
using GroupElement = std::vector<std::int64_t>;

inline GroupElement identity(const GroupSpec& g) {
  switch (g.family) {
    case GroupFamily::Lattice: return GroupElement(static_cast<std::size_t>(g.rank), 0);
    case GroupFamily::Heisenberg: return GroupElement(3, 0);
    case GroupFamily::Cyclic: return GroupElement{0};
    case GroupFamily::Free: return {};
  }
  return {};
}

inline std::size_t generator_count(const GroupSpec& g) {
  switch (g.family) {
    case GroupFamily::Lattice: return 2 * static_cast<std::size_t>(g.rank);
    case GroupFamily::Free: return 2 * static_cast<std::size_t>(g.rank);
    case GroupFamily::Heisenberg: return 4;
    case GroupFamily::Cyclic: return g.rank == 2 ? 1 : 2;
  }
  return 0;
}

/// s_i · x for the i-th generator (even i: positive, odd i: its inverse).
/// Neighbors of y in the Cayley graph are exactly the products s·y.
inline GroupElement left_multiply(const GroupSpec& g, std::size_t gen, GroupElement x) {
  const std::int64_t sign = (gen % 2 == 0) ? 1 : -1;
  const auto axis = gen / 2;
  switch (g.family) {
    case GroupFamily::Lattice: x[axis] += sign; break;
    case GroupFamily::Cyclic: x[0] = ((x[0] + sign) % g.rank + g.rank) % g.rank; break;
    case GroupFamily::Heisenberg:
      // (s_a, s_b, 0)·(a, b, c) = (a + s_a, b + s_b, c + s_a b)
      if (axis == 0) {
        x[0] += sign;
        x[2] += sign * x[1];
      } else {
        x[1] += sign;
      }
      break;
    case GroupFamily::Free: {
      const std::int64_t letter = sign * static_cast<std::int64_t>(axis + 1);
      if (!x.empty() && x.front() == -letter) {
        x.erase(x.begin());
      } else {
        x.insert(x.begin(), letter);
      }
      break;
    }
  }
  return x;
}

inline std::string element_label(const GroupSpec& g, const GroupElement& x) {
  if (g.family == GroupFamily::Free) {
    if (x.empty()) return "e";
    std::string s;
    for (auto l : x) s += static_cast<char>(l > 0 ? 'a' + (l - 1) : 'A' + (-l - 1));
    return s;
  }
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? "," : "") + std::to_string(x[i]);
  return s + ")";
}

namespace detail {

/// Compact hash key; short enough for small-string storage in common cases.
inline std::string group_key(const GroupSpec& g, const GroupElement& x) {
  std::string key;
  if (g.family == GroupFamily::Free) {
    key.reserve(x.size());
    for (auto l : x) key.push_back(static_cast<char>(l));
    return key;
  }
  key.resize(x.size() * sizeof(std::int32_t));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto v = static_cast<std::int32_t>(x[i]);
    std::memcpy(key.data() + i * sizeof v, &v, sizeof v);
  }
  return key;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Cayley graphs and growth
// ---------------------------------------------------------------------------

/// Word-metric ball of the Cayley graph with m ≡ 1 and b = adjacency.
struct CayleyTruncation {
  GroupSpec group;
  int radius = 0;
  DiscreteGraph graph;
  std::vector<GroupElement> elements;
  std::vector<int> word_length;
  std::vector<bool> boundary;  // some neighbor lies outside the ball
  Index identity = 0;

  std::vector<Index> boundary_vertices() const {
    std::vector<Index> out;
    for (Index v = 0; v < boundary.size(); ++v)
      if (boundary[v]) out.push_back(v);
    return out;
  }
};

inline constexpr std::size_t kDefaultElementCap = 20'000'000;

inline CayleyTruncation cayley_graph(const GroupSpec& g, int radius, std::size_t cap = kDefaultElementCap) {
  g.check();
  if (radius < 0) throw DomainError("radius must be nonnegative");
  CayleyTruncation t;
  t.group = g;
  t.radius = radius;
  std::unordered_map<std::string, Index> index;
  t.elements.push_back(identity(g));
  t.word_length.push_back(0);
  index.emplace(detail::group_key(g, t.elements[0]), 0);
  std::vector<WeightEntry> entries;
  const auto gens = generator_count(g);
  t.boundary.push_back(false);
  for (Index head = 0; head < t.elements.size(); ++head) {
    const int len = t.word_length[head];
    for (std::size_t s = 0; s < gens; ++s) {
      auto y = left_multiply(g, s, t.elements[head]);
      auto key = detail::group_key(g, y);
      auto it = index.find(key);
      if (it == index.end()) {
        if (len == radius) {
          t.boundary[head] = true;
          continue;
        }
        if (t.elements.size() >= cap) throw CapacityError("Cayley ball exceeds the element cap");
        it = index.emplace(std::move(key), t.elements.size()).first;
        t.elements.push_back(std::move(y));
        t.word_length.push_back(len + 1);
        t.boundary.push_back(false);
      }
      if (head < it->second) entries.push_back({head, it->second, 1.0});
    }
  }
  std::vector<VertexId> ids;
  ids.reserve(t.elements.size());
  for (const auto& x : t.elements) ids.push_back(element_label(g, x));
  t.graph = DiscreteGraph(std::move(ids), std::vector<double>(t.elements.size(), 1.0), entries);
  return t;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  std::size_t points = 0;
};

/// Least-squares fit of log y against log x.
inline LinearFit fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys) {
  LinearFit fit;
  const auto n = static_cast<double>(xs.size());
  fit.points = xs.size();
  if (xs.size() < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double lx = std::log(xs[i]);
    const double ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = std::log(ys[i]) - (fit.intercept + fit.slope * std::log(xs[i]));
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / n);
  return fit;
}

struct GrowthTable {
  GroupSpec group;
  std::vector<std::uint64_t> counts;  // γ(n), n = 0..N
  int window_lo = 0;
  int window_hi = 0;
  double slope = 0.0;  // log-log slope of γ over the window
};

/// Exact γ(n) by breadth-first generation. Only the last two spheres are
/// kept: in a Cayley graph every neighbor of the n-sphere lies in spheres
/// n - 1, n, n + 1.
inline GrowthTable growth_function(const GroupSpec& g, int N, std::size_t cap = kDefaultElementCap,
                                   int window_lo = -1, int window_hi = -1) {
  g.check();
  if (N < 0) throw DomainError("radius must be nonnegative");
  GrowthTable table;
  table.group = g;
  std::unordered_set<std::string> previous;
  std::unordered_set<std::string> current{detail::group_key(g, identity(g))};
  std::vector<GroupElement> sphere{identity(g)};
  std::uint64_t total = 1;
  table.counts.push_back(total);
  const auto gens = generator_count(g);
  for (int n = 1; n <= N; ++n) {
    std::unordered_set<std::string> next;
    std::vector<GroupElement> next_sphere;
    for (const auto& x : sphere) {
      for (std::size_t s = 0; s < gens; ++s) {
        auto y = left_multiply(g, s, x);
        auto key = detail::group_key(g, y);
        if (previous.contains(key) || current.contains(key)) continue;
        if (next.insert(std::move(key)).second) next_sphere.push_back(std::move(y));
      }
    }
    total += next_sphere.size();
    if (total > cap) throw CapacityError("growth computation exceeds the element cap");
    table.counts.push_back(total);
    previous = std::move(current);
    current = std::move(next);
    sphere = std::move(next_sphere);
  }
  table.window_lo = window_lo >= 0 ? window_lo : std::max(1, N / 2);
  table.window_hi = window_hi >= 0 ? std::min(window_hi, N) : N;
  std::vector<double> xs, ys;
  for (int n = std::max(1, table.window_lo); n <= table.window_hi; ++n) {
    xs.push_back(n);
    ys.push_back(static_cast<double>(table.counts[static_cast<std::size_t>(n)]));
  }
  table.slope = fit_loglog(xs, ys).slope;
  return table;
}

struct RecurrenceClass {
  bool recurrent = false;
  int growth_degree = 0;  // -1 for exponential growth
  std::string justification;
};

/// Catalog classification: a group is recurrent iff it has a finite index
/// subgroup isomorphic to Z or Z² (finite groups included).
inline RecurrenceClass classify_recurrence(const GroupSpec& g) {
  g.check();
  switch (g.family) {
    case GroupFamily::Lattice:
      return {g.rank <= 2, g.rank,
              "Z^" + std::to_string(g.rank) + " has polynomial growth of degree " + std::to_string(g.rank) +
                  (g.rank <= 2 ? "; it is itself Z or Z^2" : "; no finite index subgroup is Z or Z^2")};
    case GroupFamily::Cyclic:
      return {true, 0, "finite group (growth degree 0); the trivial subgroup has finite index"};
    case GroupFamily::Heisenberg:
      return {false, 4,
              "integer Heisenberg group has polynomial growth of degree 4; finite index subgroups have degree 4"};
    case GroupFamily::Free:
      if (g.rank == 1) return {true, 1, "F_1 is Z (growth degree 1)"};
      return {false, -1, "free group of rank " + std::to_string(g.rank) + " has exponential growth"};
  }
  return {};
}

// ---------------------------------------------------------------------------
// Random walks
// ---------------------------------------------------------------------------

/// Row-stochastic transition probabilities on a finite state space.
struct WalkKernel {
  std::vector<std::vector<std::pair<Index, double>>> rows;
  std::vector<bool> boundary;

  std::size_t size() const { return rows.size(); }

  /// Validates stochasticity to 1e-12 and support bounds.
  static WalkKernel from_rows(std::vector<std::vector<std::pair<Index, double>>> rows, std::vector<bool> boundary = {}) {
    WalkKernel k{std::move(rows), std::move(boundary)};
    if (k.boundary.empty()) k.boundary.assign(k.rows.size(), false);
    if (k.boundary.size() != k.rows.size()) throw DomainError("boundary marker size mismatch");
    for (const auto& row : k.rows) {
      double s = 0.0;
      for (const auto& [v, p] : row) {
        if (v >= k.rows.size() || !(p >= 0.0)) throw DomainError("invalid transition entry");
        s += p;
      }
      if (std::abs(s - 1.0) > 1e-12) throw DomainError("transition rows must sum to 1");
    }
    return k;
  }
};

/// p(u,v) = b(u,v) / Σ_w b(u,w). The last entry of each row is 1 minus the
/// others so rows sum to exactly 1.
inline WalkKernel transition_kernel(const DiscreteGraph& g, std::vector<bool> boundary = {}) {
  require_valid(g);
  if (g.size() > 1 || !g.edges().empty()) {
    for (Index v = 0; v < g.size(); ++v)
      if (g.neighbors(v).empty()) throw DomainError("vertex without neighbors has no transition row");
  }
  WalkKernel k;
  k.boundary = boundary.empty() ? std::vector<bool>(g.size(), false) : std::move(boundary);
  if (k.boundary.size() != g.size()) throw DomainError("boundary marker size mismatch");
  k.rows.resize(g.size());
  for (Index u = 0; u < g.size(); ++u) {
    const auto nbrs = g.neighbors(u);
    const double total = g.weight_sum(u);
    double partial = 0.0;
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      const double p = (i + 1 == nbrs.size()) ? 1.0 - partial : nbrs[i].weight / total;
      partial += p;
      k.rows[u].emplace_back(nbrs[i].vertex, p);
    }
  }
  return k;
}

/// p_n(o, o) for n = 0..n_max and the total mass after each step.
struct ReturnSequence {
  std::vector<double> probabilities;
  std::vector<double> mass;
  bool contaminated = false;
  std::size_t contamination_step = 0;  // first step with mass on a boundary state
  std::string method;
};

/// Exact propagation of the distribution δ_origin through the kernel.
///
/// Mass sitting on a boundary state before step n_max could leave the
/// truncation, so the run is marked contaminated; with `strict` it throws.
inline ReturnSequence return_probability_dp(const WalkKernel& k, Index origin, std::size_t n_max, bool strict = true) {
  if (origin >= k.size()) throw DomainError("origin outside the state space");
  ReturnSequence seq;
  seq.method = "kernel-dp";
  std::vector<double> dist(k.size(), 0.0), next(k.size(), 0.0);
  dist[origin] = 1.0;
  seq.probabilities.push_back(1.0);
  seq.mass.push_back(1.0);
  for (std::size_t step = 0; step < n_max; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    for (Index u = 0; u < k.size(); ++u) {
      const double w = dist[u];
      if (w == 0.0) continue;
      if (k.boundary[u] && !seq.contaminated) {
        seq.contaminated = true;
        seq.contamination_step = step;
      }
      for (const auto& [v, p] : k.rows[u]) next[v] += w * p;
    }
    std::swap(dist, next);
    seq.probabilities.push_back(dist[origin]);
    double total = 0.0;
    for (double x : dist) total += x;
    seq.mass.push_back(total);
  }
  if (seq.contaminated && strict)
    throw TruncationError("probability mass reached the truncation boundary at step " +
                          std::to_string(seq.contamination_step) + " (< " + std::to_string(n_max) + ")");
  return seq;
}

namespace detail {

/// Binomial(n, p) probabilities by the multiplicative recurrence.
inline std::vector<double> binomial_pmf(std::size_t n, double p) {
  std::vector<double> pmf(n + 1);
  pmf[0] = std::pow(1.0 - p, static_cast<double>(n));
  const double ratio = p / (1.0 - p);
  for (std::size_t k = 0; k < n; ++k)
    pmf[k + 1] = pmf[k] * static_cast<double>(n - k) / static_cast<double>(k + 1) * ratio;
  return pmf;
}

}  // namespace detail

/// Return probabilities of the simple random walk on a catalog group.
///
/// Z^d: the walk picks a coordinate uniformly and then steps ±1, so
/// p^{(d)}_n = Σ_k C(n,k) (1/d)^k (1-1/d)^{n-k} p^{(1)}_k p^{(d-1)}_{n-k};
/// the one-dimensional factor comes from the kernel DP on a Z truncation.
/// F_k: the word length is a birth-death chain (up with probability
/// (2k-1)/2k away from the identity), and returns to the identity are
/// returns of that chain to 0.
/// Heisenberg and cyclic groups: the walk is symmetric on a regular graph,
/// so p_{a+b}(o,o) = Σ_x p_a(o,x) p_b(o,x) and a ball of radius ⌈n_max/2⌉
/// suffices.
inline ReturnSequence return_probability_dp(const GroupSpec& g, std::size_t n_max,
                                            std::size_t cap = kDefaultElementCap) {
  g.check();
  ReturnSequence seq;
  seq.mass.assign(n_max + 1, 1.0);
  if (g.family == GroupFamily::Free) {
    const double up = (2.0 * g.rank - 1.0) / (2.0 * g.rank);
    std::vector<double> dist(n_max + 2, 0.0), next(n_max + 2, 0.0);
    dist[0] = 1.0;
    seq.probabilities.push_back(1.0);
    for (std::size_t step = 1; step <= n_max; ++step) {
      std::fill(next.begin(), next.end(), 0.0);
      next[1] += dist[0];
      for (std::size_t l = 1; l < step; ++l) {
        next[l + 1] += up * dist[l];
        next[l - 1] += (1.0 - up) * dist[l];
      }
      std::swap(dist, next);
      seq.probabilities.push_back(dist[0]);
    }
    seq.method = "word-length-dp";
    return seq;
  }
  if (g.family != GroupFamily::Lattice) {
    const auto half = static_cast<int>((n_max + 1) / 2);
    const auto t = cayley_graph(g, half, cap);
    const auto kernel = transition_kernel(t.graph, t.boundary);
    std::vector<double> dist(kernel.size(), 0.0), next(kernel.size(), 0.0);
    dist[t.identity] = 1.0;
    seq.probabilities.assign(n_max + 1, 0.0);
    seq.probabilities[0] = 1.0;
    for (std::size_t a = 0; 2 * a < n_max; ++a) {
      std::fill(next.begin(), next.end(), 0.0);
      for (Index u = 0; u < kernel.size(); ++u)
        if (dist[u] != 0.0)
          for (const auto& [v, p] : kernel.rows[u]) next[v] += dist[u] * p;
      double odd = 0.0, even = 0.0;
      for (Index v = 0; v < kernel.size(); ++v) {
        odd += dist[v] * next[v];
        even += next[v] * next[v];
      }
      seq.probabilities[2 * a + 1] = odd;
      if (2 * a + 2 <= n_max) seq.probabilities[2 * a + 2] = even;
      std::swap(dist, next);
    }
    seq.method = "half-ball-dp";
    return seq;
  }
  const auto line = cayley_graph(GroupSpec::lattice(1), static_cast<int>(n_max));
  const auto one_d = return_probability_dp(transition_kernel(line.graph, line.boundary), line.identity, n_max);
  auto current = one_d.probabilities;
  for (int j = 2; j <= g.rank; ++j) {
    std::vector<double> mixed(n_max + 1, 0.0);
    for (std::size_t n = 0; n <= n_max; ++n) {
      const auto pmf = detail::binomial_pmf(n, 1.0 / j);
      double s = 0.0;
      for (std::size_t k = 0; k <= n; ++k) s += pmf[k] * one_d.probabilities[k] * current[n - k];
      mixed[n] = s;
    }
    current = std::move(mixed);
  }
  seq.probabilities = std::move(current);
  seq.method = g.rank == 1 ? "kernel-dp" : "coordinate-product-dp";
  return seq;
}

/// First-return probabilities from return probabilities (renewal equation).
inline std::vector<double> first_return_probabilities(const std::vector<double>& p) {
  std::vector<double> f(p.size(), 0.0);
  for (std::size_t n = 1; n < p.size(); ++n) {
    double s = p[n];
    for (std::size_t k = 1; k < n; ++k) s -= f[k] * p[n - k];
    f[n] = s;
  }
  return f;
}

enum class RecurrenceVerdict { RecurrentConsistent, TransientConsistent, Inconclusive };

inline const char* to_string(RecurrenceVerdict v) {
  switch (v) {
    case RecurrenceVerdict::RecurrentConsistent: return "recurrent-consistent";
    case RecurrenceVerdict::TransientConsistent: return "transient-consistent";
    case RecurrenceVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct DecayFit {
  double exponent = 0.0;  // α in p_{2n} ~ n^{-α}
  double residual = 0.0;
  std::size_t window_lo = 0;
  std::size_t window_hi = 0;
  std::size_t points = 0;
};

/// Log-log regression of the even-step return probabilities over
/// n ∈ [lo, hi].
inline DecayFit fit_return_decay(const std::vector<double>& p, std::size_t lo, std::size_t hi,
                                 std::size_t min_points = 10) {
  DecayFit fit;
  fit.window_lo = lo;
  fit.window_hi = std::min(hi, p.size() - 1);
  std::vector<double> xs, ys;
  for (std::size_t n = std::max<std::size_t>(lo, 2); n <= fit.window_hi; ++n) {
    if (n % 2 != 0 || !(p[n] > 0.0)) continue;
    xs.push_back(static_cast<double>(n));
    ys.push_back(p[n]);
  }
  fit.points = xs.size();
  if (xs.size() < min_points) throw DomainError("too few even steps in the fit window");
  const auto lf = fit_loglog(xs, ys);
  fit.exponent = -lf.slope;
  fit.residual = lf.residual_rms;
  return fit;
}

struct RecurrenceIndicator {
  std::vector<double> partial_sums;  // S_N = Σ_{n ≤ N} p_n
  DecayFit decay;
  double late_increase = 0.0;  // (S_N - S_{N/2}) / S_N
  bool boundary_case = false;
  RecurrenceVerdict verdict = RecurrenceVerdict::Inconclusive;
};

/// Recurrent-consistent iff α ≤ 1.1; transient-consistent iff α ≥ 1.2 and
/// the partial sums plateau (last-half increase below 5%). α within
/// [0.9, 1.2) is flagged as the logarithmic boundary case.
inline RecurrenceIndicator recurrence_indicator(const std::vector<double>& p) {
  std::size_t even = 0;
  for (std::size_t n = 2; n < p.size(); n += 2) ++even;
  if (even < 50) throw DomainError("recurrence indicator needs at least 50 even steps");
  RecurrenceIndicator ind;
  double s = 0.0;
  for (double x : p) ind.partial_sums.push_back(s += x);
  const std::size_t n_max = p.size() - 1;
  ind.decay = fit_return_decay(p, n_max / 4, n_max);
  const double total = ind.partial_sums.back();
  ind.late_increase = (total - ind.partial_sums[n_max / 2]) / total;
  const double alpha = ind.decay.exponent;
  ind.boundary_case = alpha >= 0.9 && alpha < 1.2;
  if (alpha <= 1.1) {
    ind.verdict = RecurrenceVerdict::RecurrentConsistent;
  } else if (alpha >= 1.2 && ind.late_increase < 0.05) {
    ind.verdict = RecurrenceVerdict::TransientConsistent;
  }
  return ind;
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

/// Per-trial generator seed; fixed so trials can be split across workers.
inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(seed ^ mix(trial));
}

struct WalkStatistics {
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  std::size_t trials = 0;
  std::vector<std::size_t> at_origin;     // [n]: trials at the origin after n steps
  std::vector<std::size_t> first_return;  // [n]: trials whose first return is at step n
  std::size_t boundary_hits = 0;          // trials that visited a boundary state before the last step
  std::size_t returns_before_boundary = 0;  // visits to the origin before the trial's first boundary state

  /// Counts add; merging is associative and commutative.
  void merge(const WalkStatistics& o) {
    trials += o.trials;
    boundary_hits += o.boundary_hits;
    returns_before_boundary += o.returns_before_boundary;
    for (std::size_t n = 0; n < at_origin.size(); ++n) {
      at_origin[n] += o.at_origin[n];
      first_return[n] += o.first_return[n];
    }
  }
};

inline WalkStatistics monte_carlo_walk(const WalkKernel& k, Index origin, std::size_t steps, std::size_t trials,
                                       std::uint64_t seed, std::size_t first_trial = 0) {
  if (origin >= k.size()) throw DomainError("origin outside the state space");
  WalkStatistics st;
  st.seed = seed;
  st.steps = steps;
  st.trials = trials;
  st.at_origin.assign(steps + 1, 0);
  st.first_return.assign(steps + 1, 0);
  for (std::size_t trial = first_trial; trial < first_trial + trials; ++trial) {
    std::mt19937_64 rng(trial_seed(seed, trial));
    Index state = origin;
    bool returned = false;
    bool hit = false;
    st.at_origin[0] += 1;
    for (std::size_t n = 1; n <= steps; ++n) {
      if (k.boundary[state]) hit = true;
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      const auto& row = k.rows[state];
      double acc = 0.0;
      Index next = row.back().first;
      for (const auto& [v, p] : row) {
        acc += p;
        if (u < acc) {
          next = v;
          break;
        }
      }
      state = next;
      if (state == origin) {
        if (!hit) ++st.returns_before_boundary;
        st.at_origin[n] += 1;
        if (!returned) {
          st.first_return[n] += 1;
          returned = true;
        }
      }
    }
    if (hit) ++st.boundary_hits;
  }
  return st;
}

// ---------------------------------------------------------------------------
// Metric graphs over Cayley graphs
// ---------------------------------------------------------------------------

struct CableEdgeParameters {
  double length = 1.0;
  double mu = 1.0;
  double nu = 1.0;
};

/// One metric edge per pair with b > 0; parameters come from `params(u, v)`.
template <class Params>
MetricGraphModel cable_model(const DiscreteGraph& g, Params&& params) {
  std::vector<MetricEdge> edges;
  for (const auto& e : g.edges()) {
    const CableEdgeParameters p = params(e.u, e.v);
    edges.push_back({g.id(e.u) + "--" + g.id(e.v), e.u, e.v, p.length, p.mu, p.nu});
  }
  return MetricGraphModel(g.ids(), std::move(edges));
}

inline MetricGraphModel equilateral_model(const DiscreteGraph& g, double length = 1.0) {
  return cable_model(g, [length](Index, Index) { return CableEdgeParameters{length, 1.0, 1.0}; });
}

enum class HeatVerdict { Recurrent, Transient, Inconclusive };

inline const char* to_string(HeatVerdict v) {
  switch (v) {
    case HeatVerdict::Recurrent: return "recurrent";
    case HeatVerdict::Transient: return "transient";
    case HeatVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct WeightConditionReport {
  double sup_ratio = 0.0;  // sup ν(e)/|e|
  double inf_ratio = 0.0;  // inf ν(e)/|e|
  bool sup_bounded = false;
  bool inf_positive = false;
  RecurrenceClass group;
  HeatVerdict verdict = HeatVerdict::Inconclusive;
};

/// Combines the group's class with the edge-weight bounds. On a finite
/// truncation every ratio is finite and positive, so a ratio counts as
/// unbounded (or vanishing) once it leaves [1/bound_cap, bound_cap].
inline WeightConditionReport weight_condition_check(const MetricGraphModel& g, const GroupSpec& group,
                                                    double bound_cap = 1e6) {
  require_valid(g);
  WeightConditionReport rep;
  rep.group = classify_recurrence(group);
  rep.sup_ratio = 0.0;
  rep.inf_ratio = kInfinity;
  for (const auto& e : g.edges()) {
    const double r = e.nu / e.length;
    rep.sup_ratio = std::max(rep.sup_ratio, r);
    rep.inf_ratio = std::min(rep.inf_ratio, r);
  }
  rep.sup_bounded = rep.sup_ratio <= bound_cap;
  rep.inf_positive = rep.inf_ratio >= 1.0 / bound_cap;
  if (rep.group.recurrent && rep.sup_bounded) {
    rep.verdict = HeatVerdict::Recurrent;
  } else if (!rep.group.recurrent && rep.inf_positive) {
    rep.verdict = HeatVerdict::Transient;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Volume growth and heat-kernel decay
// ---------------------------------------------------------------------------

enum class GrowthVerdict { DivergentConsistent, ConvergentConsistent };

inline const char* to_string(GrowthVerdict v) {
  return v == GrowthVerdict::DivergentConsistent ? "divergent-consistent" : "convergent-consistent";
}

struct VolumeGrowthReport {
  std::vector<double> radii;     // r_k = k·dr, k = 1..K
  std::vector<double> volumes;   // vol(B_{r_k})
  std::vector<double> integral;  // I(r_k) = Σ_{j ≤ k} r_j dr / vol(B_{r_j})
  double last_doubling_increase = 0.0;  // (I(R) - I(R/2)) / I(R/2)
  double doubling_ratio = 0.0;          // (I(R) - I(R/2)) / (I(R/2) - I(R/4))
  GrowthVerdict verdict = GrowthVerdict::ConvergentConsistent;
};

/// Riemann sum of ∫ r dr / vol(B_r) from dr to R_max. Logarithmic growth
/// gives equal increments per doubling of R, so the integral is
/// divergent-consistent iff the last doubling adds at least 90% of the
/// previous one. Throws TruncationError if B_{R_max} reaches a boundary
/// vertex.
inline VolumeGrowthReport volume_growth_test(const MetricGraphModel& g, Index center, double R_max, double dr,
                                             const std::vector<Index>& boundary = {}) {
  if (!(dr > 0.0) || !(R_max >= 4.0 * dr)) throw DomainError("need dr > 0 and R_max >= 4 dr");
  const auto dist = intrinsic_metric_vertices(g, center);
  for (Index v : boundary)
    if (dist.at(v) <= R_max)
      throw TruncationError("ball of radius " + std::to_string(R_max) + " reaches boundary vertex '" + g.id(v) + "'");
  VolumeGrowthReport rep;
  const auto steps = static_cast<std::size_t>(std::llround(R_max / dr));
  double acc = 0.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double r = static_cast<double>(k) * dr;
    const double vol = ball_measure(g, dist, r);
    acc += r * dr / vol;
    rep.radii.push_back(r);
    rep.volumes.push_back(vol);
    rep.integral.push_back(acc);
  }
  auto at = [&rep](std::size_t k) { return rep.integral[k - 1]; };
  const double i_full = at(steps);
  const double i_half = at(std::max<std::size_t>(1, steps / 2));
  const double i_quarter = at(std::max<std::size_t>(1, steps / 4));
  rep.last_doubling_increase = (i_full - i_half) / i_half;
  rep.doubling_ratio = (i_full - i_half) / (i_half - i_quarter);
  rep.verdict = rep.doubling_ratio >= 0.9 ? GrowthVerdict::DivergentConsistent : GrowthVerdict::ConvergentConsistent;
  return rep;
}

struct UltracontractivityFit {
  GroupSpec group;
  std::size_t n_max = 0;
  DecayFit decay;       // exponent estimates N/2
  double target = 0.0;  // d/2 for Z^d
};

/// Exponent of sup_x p_{2n}(x, x) ~ n^{-N/2} on Z^d (vertex transitive, so
/// the supremum is attained at the origin), fitted over n ∈ [n_max/4, n_max].
inline UltracontractivityFit ultracontractivity_fit(const GroupSpec& g, std::size_t n_max) {
  if (g.family != GroupFamily::Lattice) throw DomainError("ultracontractivity fit supports Z^d only");
  const auto seq = return_probability_dp(g, n_max);
  UltracontractivityFit fit;
  fit.group = g;
  fit.n_max = n_max;
  fit.decay = fit_return_decay(seq.probabilities, n_max / 4, n_max);
  fit.target = g.rank / 2.0;
  return fit;
}

}  // namespace cablekit
