// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cablekit/cablekit.hpp"
#include "cablekit/cli.hpp"
#include "oracles.hpp"

using namespace cablekit;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

double relative(double got, double want) { return std::abs(got - want) / std::abs(want); }

MetricGraphModel unit_edges(std::size_t n, const std::vector<std::pair<Index, Index>>& pairs) {
  std::vector<MetricEdge> edges;
  for (const auto& [u, v] : pairs) edges.push_back({std::to_string(u) + "-" + std::to_string(v), u, v, 1.0, 1.0, 1.0});
  return MetricGraphModel(oracle::numbered_ids(n), edges);
}

// 1 -----------------------------------------------------------------------

Outcome round_trip() {
  Timer timer;
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = std::uniform_int_distribution<std::size_t>(2, 40)(rng);
    const auto g = oracle::random_connected(rng, n, 0.1, 10.0);
    const auto back = discretize(realize(g, default_intrinsic_weight(g)).model);
    for (Index u = 0; u < n; ++u) {
      worst = std::max(worst, relative(back.m(u), g.m(u)));
      for (Index v = 0; v < n; ++v) {
        const double want = g.b(u, v);
        const double got = back.b(u, v);
        worst = std::max(worst, want == 0.0 ? std::abs(got) : relative(got, want));
      }
    }
  }
  const double t = timer.seconds();
  return {worst <= 1e-12 && t < 10.0, "max rel err " + fmt(worst) + ", " + fmt(t, 3) + " s"};
}

// 2 -----------------------------------------------------------------------

Outcome harmonic_bijection() {
  std::mt19937_64 rng(2002);
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  double worst_harmonic = 0.0;
  std::size_t harmonic_vertices = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto nv = std::uniform_int_distribution<std::size_t>(3, 25)(rng);
    const auto model = oracle::random_model(rng, nv, std::uniform_int_distribution<std::size_t>(0, 8)(rng));
    const auto g = discretize(model);
    VertexFunction fv(nv);
    for (auto& x : fv) x = gauss(rng);
    // make one vertex discrete-harmonic: f(v) is the b-weighted mean of its neighbours
    const Index h = std::uniform_int_distribution<Index>(0, nv - 1)(rng);
    double num = 0.0, den = 0.0;
    for (Index u = 0; u < nv; ++u)
      if (u != h) {
        num += g.b(h, u) * fv[u];
        den += g.b(h, u);
      }
    if (den > 0.0) fv[h] = num / den;

    const auto defect = kirchhoff_defect(model, extend_affine(model, fv));
    const auto lf = apply_discrete_laplacian(g, fv);
    for (Index v = 0; v < nv; ++v) {
      const double want = -g.m(v) * lf[v];
      worst = std::max(worst, std::abs(defect[v] - want) / std::max(1.0, std::abs(want)));
    }
    if (den > 0.0) {
      ++harmonic_vertices;
      worst_harmonic = std::max(worst_harmonic, std::abs(defect[h]) / std::max(1.0, den));
    }
  }
  return {worst <= 1e-12 && worst_harmonic <= 1e-12,
          "max defect err " + fmt(worst) + ", harmonic vertices " + std::to_string(harmonic_vertices) +
              " max |defect| " + fmt(worst_harmonic)};
}

// 3 -----------------------------------------------------------------------

Outcome intrinsic_restriction() {
  std::mt19937_64 rng(3003);
  std::size_t passed = 0;
  const std::size_t total = 200;
  for (std::size_t trial = 0; trial < total; ++trial) {
    const auto n = std::uniform_int_distribution<std::size_t>(2, 40)(rng);
    const auto g = oracle::random_connected(rng, n);
    const auto cs = realize(g);
    if (is_intrinsic(g, restrict_metric(cs.model)).ok) ++passed;
  }
  const auto star = DiscreteGraph::Builder{}.vertex("o", 1).vertex("a", 1).vertex("b", 1).vertex("c", 1)
                        .edge("o", "a", 1).edge("o", "b", 1).edge("o", "c", 1).build();
  const auto chk = is_intrinsic(star, combinatorial_metric(star));
  const bool star_ok = !chk.ok && std::abs(chk.slack - (-2.0)) <= 1e-12;
  return {passed == total && star_ok, std::to_string(passed) + "/" + std::to_string(total) +
                                          " realizations intrinsic; 3-star slack " + fmt(chk.slack)};
}

// 4 -----------------------------------------------------------------------

Outcome norm_sandwich() {
  std::mt19937_64 rng(4004);
  std::size_t inside = 0;
  double worst_low = kInfinity, worst_high = kInfinity;
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = std::uniform_int_distribution<std::size_t>(2, 40)(rng);
    const auto g = oracle::random_connected(rng, n, 0.1, 10.0, 0.3);
    double deg = 0.0;
    for (Index v = 0; v < n; ++v) {
      double s = 0.0;
      for (Index u = 0; u < n; ++u) s += g.b(v, u);
      deg = std::max(deg, s / g.m(v));
    }
    const double top = spectrum_discrete(g, {default_max_dofs(), false}).eigenvalues.back();
    worst_low = std::min(worst_low, top - deg);
    worst_high = std::min(worst_high, 2.0 * deg - top);
    if (top >= deg - 1e-9 && top <= 2.0 * deg + 1e-9) ++inside;
  }
  return {inside == 100, std::to_string(inside) + "/100 inside; min margins " + fmt(worst_low) + " / " + fmt(worst_high)};
}

// 5 -----------------------------------------------------------------------

Outcome metric_spectrum_case(const std::string& name, const MetricGraphModel& g, const std::vector<double>& ref) {
  Timer timer;
  const auto fine = spectrum_metric(g, 0.01, ref.size(), {}, {default_max_dofs(), false});
  const auto coarse = spectrum_metric(g, 0.02, ref.size(), {}, {default_max_dofs(), false});
  double worst = 0.0;
  double min_ratio = kInfinity;
  bool ok = true;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (ref[i] == 0.0) {
      ok = ok && std::abs(fine.eigenvalues[i]) <= 1e-9;
      continue;
    }
    const double e_fine = relative(fine.eigenvalues[i], ref[i]);
    const double e_coarse = relative(coarse.eigenvalues[i], ref[i]);
    worst = std::max(worst, e_fine);
    min_ratio = std::min(min_ratio, e_coarse / e_fine);
  }
  const double t = timer.seconds();
  ok = ok && worst <= 1e-3 && min_ratio >= 3.0 && t < 5.0;
  return {ok, name + ": rel err " + fmt(worst) + ", h-halving ratio " + fmt(min_ratio) + ", " + fmt(t, 3) + " s"};
}

Outcome metric_spectra() {
  const auto interval = MetricGraphModel::Builder{}.vertex("0").vertex("1").edge("e", "0", "1", 1.0).build();
  const auto circle = MetricGraphModel::Builder{}.vertex("p").edge("c", "p", "p", 1.0).build();
  std::vector<double> interval_ref, circle_ref;
  for (std::size_t k = 0; k <= 3; ++k) interval_ref.push_back(oracle::interval_neumann(k));
  for (std::size_t i = 0; i < 3; ++i) circle_ref.push_back(oracle::circle(i));
  const auto a = metric_spectrum_case("interval (k pi)^2, k<=3", interval, interval_ref);
  const auto b = metric_spectrum_case("circle (2 pi k)^2, k<=1", circle, circle_ref);
  return {a.pass && b.pass, a.detail + "; " + b.detail};
}

// 6 -----------------------------------------------------------------------

Outcome equilateral() {
  std::vector<std::pair<std::string, MetricGraphModel>> cases;
  cases.emplace_back("P2", unit_edges(2, {{0, 1}}));
  cases.emplace_back("C4", unit_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}));
  cases.emplace_back("3-star", unit_edges(4, {{0, 1}, {0, 2}, {0, 3}}));
  std::vector<std::pair<Index, Index>> grid;
  for (Index r = 0; r < 3; ++r)
    for (Index c = 0; c < 3; ++c) {
      if (c + 1 < 3) grid.push_back({3 * r + c, 3 * r + c + 1});
      if (r + 1 < 3) grid.push_back({3 * r + c, 3 * (r + 1) + c});
    }
  cases.emplace_back("3x3 grid", unit_edges(9, grid));

  EquilateralOptions opt;
  opt.h = 0.005;
  opt.lambda_cap = 50.0;
  opt.tolerance = 1e-3;
  bool ok = true;
  std::string detail;
  for (const auto& [name, g] : cases) {
    const auto rep = equilateral_correspondence_check(g, opt);
    double worst = 0.0;
    for (const auto& e : rep.entries)
      if (!e.exempt) worst = std::max(worst, e.distance);
    ok = ok && rep.ok;
    detail += (detail.empty() ? "" : "; ") + name + " " + std::to_string(rep.checked) + " checked/" +
              std::to_string(rep.exempted) + " exempt, max dist " + fmt(worst);
  }
  return {ok, detail};
}

// 7 -----------------------------------------------------------------------

Outcome polya() {
  Timer timer;
  std::array<ReturnSequence, 3> seq;
  for (int d = 1; d <= 3; ++d) seq[d - 1] = return_probability_dp(GroupSpec::lattice(d), 400);
  const bool exact = seq[0].probabilities[2] == 0.5 && seq[1].probabilities[2] == 0.25;
  const std::array<std::pair<double, double>, 3> ranges{{{0.45, 0.55}, {0.9, 1.1}, {1.35, 1.65}}};
  bool ok = exact;
  std::string detail = std::string("p2 exact ") + (exact ? "yes" : "no") + "; exponents";
  for (int d = 0; d < 3; ++d) {
    const auto fit = fit_return_decay(seq[d].probabilities, 100, 400);
    ok = ok && fit.exponent >= ranges[d].first && fit.exponent <= ranges[d].second;
    detail += " " + fmt(fit.exponent);
  }
  double green = 0.0;
  for (std::size_t n = 0; n <= 200; ++n) green += seq[2].probabilities[n];
  ok = ok && green >= 1.45 && green <= 1.52;
  const double t = timer.seconds();
  ok = ok && t < 60.0;
  return {ok, detail + "; Z3 Green sum(200) " + fmt(green, 6) + ", " + fmt(t, 3) + " s"};
}

// 8 -----------------------------------------------------------------------

Outcome growth() {
  bool z2 = true, f2 = true;
  const auto a = growth_function(GroupSpec::lattice(2), 30);
  for (unsigned n = 0; n <= 30; ++n) z2 = z2 && a.counts[n] == oracle::lattice2_ball(n);
  const auto b = growth_function(GroupSpec::free(2), 12);
  for (unsigned n = 0; n <= 12; ++n) f2 = f2 && b.counts[n] == oracle::free2_ball(n);
  const auto h = growth_function(GroupSpec::heisenberg(), 20, kDefaultElementCap, 10, 20);
  const bool h_ok = h.slope >= 3.5 && h.slope <= 4.5;
  return {z2 && f2 && h_ok, std::string("Z2 exact ") + (z2 ? "yes" : "no") + ", F2 exact " + (f2 ? "yes" : "no") +
                                ", Heisenberg degree " + fmt(h.slope)};
}

// 9 -----------------------------------------------------------------------

Outcome volume_growth() {
  const auto line = cayley_graph(GroupSpec::lattice(1), 110);
  const auto line_rep = volume_growth_test(equilateral_model(line.graph), line.identity, 100.0, 0.05,
                                           line.boundary_vertices());
  double worst = 0.0;
  for (std::size_t i = 0; i < line_rep.radii.size(); ++i)
    worst = std::max(worst, relative(line_rep.integral[i], line_rep.radii[i] / 2.0));
  const auto z3 = cayley_graph(GroupSpec::lattice(3), 34);
  const auto z3_rep = volume_growth_test(equilateral_model(z3.graph), z3.identity, 32.0, 0.1, z3.boundary_vertices());
  const bool ok = worst <= 0.02 && z3_rep.last_doubling_increase < 0.05;
  return {ok, "line max rel dev " + fmt(worst) + "; Z3 last-doubling increase " +
                  fmt(z3_rep.last_doubling_increase) + " (R = 32, " + to_string(z3_rep.verdict) + ")"};
}

// 10 ----------------------------------------------------------------------

std::string capture(const std::string& command, int& status) {
  std::string out;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) {
    status = -1;
    return out;
  }
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
  status = pclose(pipe);
  return out;
}

Outcome determinism() {
  const std::string cli = CABLEKIT_CLI_PATH;
  const std::string samples = CABLEKIT_SAMPLES_DIR;
  const std::vector<std::string> invocations{
      "validate --in " + samples + "/star.json",
      "discretize --in " + samples + "/star.json",
      "realize --in " + samples + "/weighted_path.json --seed 5",
      "metric distances --in " + samples + "/star.json",
      "metric balls --in " + samples + "/star.json --center o --r-max 1.5",
      "metric intrinsic-check --in " + samples + "/weighted_path.json",
      "metric quasi-isometry --in " + samples + "/star.json --samples 20 --seed 11",
      "spectrum discrete --in " + samples + "/weighted_path.json",
      "spectrum metric --in " + samples + "/interval.json --h 0.01 --k 3",
      "spectrum equilateral-check --in " + samples + "/star.json --h 0.01",
      "heat --in " + samples + "/star.json --source o --t 0.3 --h 0.05",
      "walk dp --group Z2 --n-max 40",
      "walk mc --group Z3 --steps 20 --trials 2000 --seed 42",
      "walk mc --in " + samples + "/weighted_path.json --origin a --steps 10 --trials 500 --seed 7 --format csv",
      "cayley generate --group H3 --radius 3",
      "cayley growth --group F2 --radius 6",
      "cayley classify --group Z3",
      "recurrence indicator --group Z2 --n-max 200",
      "recurrence volume-test --group Z2 --r-max 10 --dr 0.1",
      "recurrence ultrafit --group Z3 --n-max 200",
      "recurrence weight-check --in " + samples + "/star.json --group Z3",
  };
  std::size_t identical = 0;
  std::string first_diff;
  for (const auto& args : invocations) {
    int s1 = 0, s2 = 0;
    const auto a = capture(cli + " " + args + " 2>&1", s1);
    const auto b = capture(cli + " " + args + " 2>&1", s2);
    std::ostringstream in_process, err;
    std::vector<std::string> argv;
    std::istringstream words(args);
    for (std::string w; words >> w;) argv.push_back(w);
    cli::run(argv, in_process, err);
    const bool same = a == b && s1 == s2 && !a.empty() && in_process.str() + err.str() == a;
    if (same) {
      ++identical;
    } else if (first_diff.empty()) {
      first_diff = "; differs: " + args;
    }
  }
  return {identical == invocations.size(),
          std::to_string(identical) + "/" + std::to_string(invocations.size()) + " invocations byte-identical" + first_diff};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"round-trip correspondence", round_trip},
      {"harmonic bijection", harmonic_bijection},
      {"intrinsic restriction", intrinsic_restriction},
      {"norm sandwich", norm_sandwich},
      {"metric-graph spectra", metric_spectra},
      {"equilateral correspondence", equilateral},
      {"Polya at desk scale", polya},
      {"growth functions", growth},
      {"volume-growth recurrence test", volume_growth},
      {"CLI determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << " -- " << o.detail
              << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
