#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"

#include "cablekit/correspondence.hpp"
#include "cablekit/graph.hpp"
#include "cablekit/io.hpp"
#include "cablekit/metrics.hpp"
#include "cablekit/operators.hpp"
#include "cablekit/stochastic.hpp"

namespace cablekit::cli {

using io::json;

enum ExitCode : int { kSuccess = 0, kValidationFailure = 1, kUsageError = 2 };

/// Parsed flags shared by all subcommands.
struct CommandConfig {
  std::string command;
  std::string mode;
  std::string input;
  std::string output;
  std::string format;  // json | csv; empty selects the command's default
  int digits = 17;
  double h = 0.01;
  std::size_t k = 0;
  double t = 1.0;
  int radius = 0;
  std::uint64_t seed = 12345;
  std::size_t n_max = 100;
  std::size_t steps = 2;
  std::size_t trials = 1000;
  std::size_t samples = 16;
  double dr = 0.1;
  double r_max = 10.0;
  double cap = 50.0;
  double tau = 1e-6;
  std::optional<double> tol;
  std::string group;
  std::string vertex;  // --center / --source / --origin
  std::string weight = "default";
  std::string weight_file;
  std::vector<std::string> dirichlet;
  int truncation = 0;
  double bound_cap = 1e6;
};

namespace detail {

struct UsageError : Error {
  using Error::Error;
};

inline std::string format_or(const CommandConfig& c, const std::string& fallback) {
  const std::string f = c.format.empty() ? fallback : c.format;
  if (f != "json" && f != "csv") throw UsageError("--format must be json or csv");
  return f;
}

inline DiscreteGraph need_discrete(const CommandConfig& c) {
  if (c.input.empty()) throw UsageError("--in is required");
  auto g = io::read_graph(c.input);
  if (auto* d = std::get_if<DiscreteGraph>(&g)) return std::move(*d);
  throw UsageError("'" + c.input + "' is not a discrete graph");
}

inline MetricGraphModel need_metric(const CommandConfig& c) {
  if (c.input.empty()) throw UsageError("--in is required");
  auto g = io::read_graph(c.input);
  if (auto* m = std::get_if<MetricGraphModel>(&g)) return std::move(*m);
  throw UsageError("'" + c.input + "' is not a metric model");
}

inline GroupSpec need_group(const CommandConfig& c) {
  if (c.group.empty()) throw UsageError("--group is required");
  return GroupSpec::parse(c.group);
}

inline WeightFunction read_weight_file(const DiscreteGraph& g, const std::string& path) {
  const auto doc = io::parse_file(path);
  io::detail::require_keys(doc, {"weights"}, {"weights"}, "weight file");
  WeightFunction p;
  for (const auto& e : doc.at("weights")) {
    io::detail::require_keys(e, {"u", "v", "p"}, {"u", "v", "p"}, "weight entry");
    p.set(g.index(io::detail::read_id(e.at("u"), "weight")), g.index(io::detail::read_id(e.at("v"), "weight")),
          io::detail::read_number(e.at("p"), "weight"));
  }
  return p;
}

inline WeightFunction select_weight(const CommandConfig& c, const DiscreteGraph& g) {
  if (!c.weight_file.empty()) return read_weight_file(g, c.weight_file);
  if (c.weight == "default") return default_intrinsic_weight(g);
  if (c.weight == "unit") return WeightFunction::constant(g, 1.0);
  throw UsageError("--weight must be default or unit");
}

inline json issues_json(const ValidationReport& rep) {
  json arr = json::array();
  for (const auto& i : rep.issues) arr.push_back({{"kind", to_string(i.kind)}, {"where", i.where}, {"detail", i.detail}});
  return arr;
}

inline std::vector<Index> vertex_list(const MetricGraphModel& g, const std::vector<std::string>& ids) {
  std::vector<Index> out;
  for (const auto& id : ids) out.push_back(g.index(id));
  return out;
}

inline json sequence_json(const std::vector<double>& xs) {
  json arr = json::array();
  for (double x : xs) arr.push_back(x);
  return arr;
}

inline void emit_json(std::ostream& out, const json& doc) { out << doc.dump(2) << '\n'; }

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

inline int cmd_validate(const CommandConfig& c, std::ostream& out) {
  if (c.input.empty()) throw UsageError("--in is required");
  const auto g = io::read_graph(c.input);
  const auto rep = std::visit(
      [](const auto& x) {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, DiscreteGraph>) {
          return validate_discrete(x);
        } else {
          return validate_model(x);
        }
      },
      g);
  emit_json(out, {{"type", std::holds_alternative<DiscreteGraph>(g) ? "discrete" : "metric"},
                  {"valid", rep.ok()},
                  {"issues", issues_json(rep)}});
  return rep.ok() ? kSuccess : kValidationFailure;
}

inline int cmd_discretize(const CommandConfig& c, std::ostream& out) {
  emit_json(out, io::to_json(discretize(need_metric(c))));
  return kSuccess;
}

inline int cmd_realize(const CommandConfig& c, std::ostream& out) {
  const auto g = need_discrete(c);
  emit_json(out, io::to_json(realize(g, select_weight(c, g))));
  return kSuccess;
}

inline void emit_table(std::ostream& out, const CommandConfig& c, const std::vector<VertexId>& ids,
                       const MetricOnVertices& d, const std::string& fmt) {
  if (fmt == "csv") {
    io::CsvWriter w(out, c.digits);
    w.comment("op=metric.distances source=" + std::string(to_string(d.source())));
    w.header({"u", "v", "d"});
    for (Index u = 0; u < d.size(); ++u)
      for (Index v = 0; v < d.size(); ++v) w.row(ids[u], ids[v], d(u, v));
    return;
  }
  json rows = json::array();
  for (Index u = 0; u < d.size(); ++u)
    for (Index v = 0; v < d.size(); ++v) rows.push_back({{"u", ids[u]}, {"v", ids[v]}, {"d", d(u, v)}});
  emit_json(out, {{"op", "metric.distances"}, {"source", to_string(d.source())}, {"distances", rows}});
}

inline int cmd_metric(const CommandConfig& c, std::ostream& out) {
  const auto g = io::read_graph(c.input.empty() ? throw UsageError("--in is required") : c.input);
  if (c.mode == "distances") {
    const auto fmt = format_or(c, "csv");
    if (const auto* m = std::get_if<MetricGraphModel>(&g)) {
      emit_table(out, c, m->ids(), restrict_metric(*m), fmt);
    } else {
      const auto& d = std::get<DiscreteGraph>(g);
      const auto metric = c.weight == "unit" && c.weight_file.empty() ? combinatorial_metric(d)
                                                                       : path_metric(d, select_weight(c, d));
      emit_table(out, c, d.ids(), metric, fmt);
    }
    return kSuccess;
  }
  if (c.mode == "balls") {
    if (c.vertex.empty()) throw UsageError("--center is required");
    const double r = c.r_max;
    BallReport rep;
    std::vector<VertexId> ids;
    if (const auto* m = std::get_if<MetricGraphModel>(&g)) {
      rep = ball(*m, m->index(c.vertex), r);
      ids = m->ids();
    } else {
      const auto& d = std::get<DiscreteGraph>(g);
      const auto metric = c.weight == "unit" && c.weight_file.empty() ? combinatorial_metric(d)
                                                                       : path_metric(d, select_weight(c, d));
      rep = ball(d, metric, d.index(c.vertex), r);
      ids = d.ids();
    }
    json members = json::array();
    for (Index v : rep.vertices) members.push_back(ids[v]);
    emit_json(out, {{"op", "metric.balls"}, {"center", ids[rep.center]}, {"radius", rep.radius},
                    {"vertices", members}, {"measure", rep.measure}});
    return kSuccess;
  }
  if (c.mode == "intrinsic-check") {
    IntrinsicCheck chk;
    std::vector<VertexId> ids;
    std::string source;
    if (const auto* m = std::get_if<MetricGraphModel>(&g)) {
      const auto d = discretize(*m);
      chk = is_intrinsic(d, restrict_metric(*m));
      ids = d.ids();
      source = to_string(MetricSource::RestrictionOfEta);
    } else {
      const auto& d = std::get<DiscreteGraph>(g);
      const auto metric = c.weight == "unit" && c.weight_file.empty() ? combinatorial_metric(d)
                                                                       : path_metric(d, select_weight(c, d));
      chk = is_intrinsic(d, metric);
      ids = d.ids();
      source = to_string(metric.source());
    }
    emit_json(out, {{"op", "metric.intrinsic-check"}, {"source", source}, {"ok", chk.ok},
                    {"worst_vertex", ids.empty() ? "" : ids[chk.worst_vertex]}, {"slack", chk.slack}});
    return chk.ok ? kSuccess : kValidationFailure;
  }
  if (c.mode == "quasi-isometry") {
    const auto* m = std::get_if<MetricGraphModel>(&g);
    if (!m) throw UsageError("quasi-isometry needs a metric model");
    const auto rep = quasi_isometry_check(*m, c.samples, c.seed);
    emit_json(out, {{"op", "metric.quasi-isometry"}, {"seed", c.seed}, {"samples", c.samples}, {"ok", rep.ok},
                    {"a", rep.scale_a}, {"b", rep.offset_b}, {"R", rep.net_radius},
                    {"pairs_checked", rep.pairs_checked}, {"max_pair_discrepancy", rep.max_pair_discrepancy},
                    {"points_checked", rep.points_checked}, {"max_net_distance", rep.max_net_distance},
                    {"violations", rep.violations}});
    return rep.ok ? kSuccess : kValidationFailure;
  }
  throw UsageError("unknown metric mode '" + c.mode + "'");
}

inline void emit_spectrum(std::ostream& out, const CommandConfig& c, const SpectralResult& s, const std::string& op) {
  const auto fmt = format_or(c, "csv");
  if (fmt == "csv") {
    io::CsvWriter w(out, c.digits);
    w.comment("op=" + op + " kind=" + s.kind + " matrix_size=" + std::to_string(s.matrix_size) +
              " h=" + io::format_number(s.mesh_h));
    w.header({"index", "eigenvalue"});
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) w.row(i, s.eigenvalues[i]);
    return;
  }
  emit_json(out, {{"op", op}, {"kind", s.kind}, {"matrix_size", s.matrix_size}, {"h", s.mesh_h},
                  {"eigenvalues", sequence_json(s.eigenvalues)}});
}

inline int cmd_spectrum(const CommandConfig& c, std::ostream& out) {
  if (c.mode == "discrete") {
    auto s = spectrum_discrete(need_discrete(c), {default_max_dofs(), false});
    if (c.k > 0 && c.k < s.eigenvalues.size()) s.eigenvalues.resize(c.k);
    emit_spectrum(out, c, s, "spectrum.discrete");
    return kSuccess;
  }
  if (c.mode == "metric") {
    const auto g = need_metric(c);
    if (c.k == 0) throw UsageError("--k must be positive");
    const auto s = spectrum_metric(g, c.h, c.k, vertex_list(g, c.dirichlet), {default_max_dofs(), false});
    emit_spectrum(out, c, s, "spectrum.metric");
    return kSuccess;
  }
  if (c.mode == "equilateral-check") {
    const auto g = need_metric(c);
    EquilateralOptions opt;
    opt.h = c.h;
    opt.lambda_cap = c.cap;
    opt.tau = c.tau;
    opt.tolerance = c.tol;
    const auto rep = equilateral_correspondence_check(g, opt);
    json entries = json::array();
    for (const auto& e : rep.entries)
      entries.push_back({{"lambda", e.lambda}, {"mapped", e.mapped}, {"nearest", e.nearest},
                         {"distance", e.distance}, {"tolerance", e.tolerance}, {"exempt", e.exempt}, {"ok", e.ok}});
    emit_json(out, {{"op", "spectrum.equilateral-check"}, {"h", c.h}, {"cap", c.cap}, {"tau", c.tau},
                    {"edge_length", rep.edge_length}, {"ok", rep.ok}, {"checked", rep.checked},
                    {"exempted", rep.exempted}, {"normalized_spectrum", sequence_json(rep.normalized_spectrum)},
                    {"entries", entries}});
    return rep.ok ? kSuccess : kValidationFailure;
  }
  throw UsageError("unknown spectrum mode '" + c.mode + "'");
}

inline int cmd_heat(const CommandConfig& c, std::ostream& out) {
  if (c.vertex.empty()) throw UsageError("--source is required");
  const auto g = io::read_graph(c.input.empty() ? throw UsageError("--in is required") : c.input);
  std::vector<VertexId> ids;
  VertexFunction values;
  if (const auto* d = std::get_if<DiscreteGraph>(&g)) {
    const auto s = spectrum_discrete(*d);
    VertexFunction f0(d->size(), 0.0);
    f0[d->index(c.vertex)] = 1.0;
    values = heat_semigroup(s, c.t, f0);
    ids = d->ids();
  } else {
    const auto& m = std::get<MetricGraphModel>(g);
    const auto fem = assemble_fem(m, c.h);
    const auto s = spectrum_metric(m, c.h, fem.dof_count);
    Eigen::VectorXd f0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fem.dof_count));
    f0(static_cast<Eigen::Index>(fem.vertex_dof[m.index(c.vertex)])) = 1.0;
    const Eigen::VectorXd ft = heat_semigroup(s, c.t, f0);
    for (Index v = 0; v < m.vertex_count(); ++v) values.push_back(ft(static_cast<Eigen::Index>(fem.vertex_dof[v])));
    ids = m.ids();
  }
  if (format_or(c, "csv") == "csv") {
    io::CsvWriter w(out, c.digits);
    w.comment("op=heat t=" + io::format_number(c.t) + " source=" + c.vertex);
    w.header({"vertex", "value"});
    for (Index v = 0; v < ids.size(); ++v) w.row(ids[v], values[v]);
  } else {
    json vals = json::object();
    for (Index v = 0; v < ids.size(); ++v) vals[ids[v]] = values[v];
    emit_json(out, {{"op", "heat"}, {"t", c.t}, {"source", c.vertex}, {"values", vals}});
  }
  return kSuccess;
}

struct WalkSetup {
  WalkKernel kernel;
  Index origin = 0;
  std::string label;
};

inline WalkSetup walk_setup(const CommandConfig& c, int radius) {
  if (!c.group.empty()) {
    const auto t = cayley_graph(need_group(c), radius);
    return {transition_kernel(t.graph, t.boundary), t.identity, "group=" + c.group};
  }
  const auto g = need_discrete(c);
  if (c.vertex.empty()) throw UsageError("--origin is required with --in");
  return {transition_kernel(g), g.index(c.vertex), "in=" + c.input};
}

inline int cmd_walk(const CommandConfig& c, std::ostream& out) {
  if (c.mode == "dp") {
    ReturnSequence seq;
    std::string label;
    if (!c.group.empty()) {
      seq = return_probability_dp(need_group(c), c.n_max);
      label = "group=" + c.group;
    } else {
      auto setup = walk_setup(c, 0);
      seq = return_probability_dp(setup.kernel, setup.origin, c.n_max);
      label = setup.label;
    }
    if (format_or(c, "csv") == "csv") {
      io::CsvWriter w(out, c.digits);
      w.comment("op=walk.dp " + label + " n_max=" + std::to_string(c.n_max) + " method=" + seq.method);
      w.header({"n", "p_n"});
      for (std::size_t n = 0; n < seq.probabilities.size(); ++n) w.row(n, seq.probabilities[n]);
    } else {
      emit_json(out, {{"op", "walk.dp"}, {"source", label}, {"n_max", c.n_max}, {"method", seq.method},
                      {"p", sequence_json(seq.probabilities)}});
    }
    return kSuccess;
  }
  if (c.mode == "mc") {
    auto setup = walk_setup(c, static_cast<int>(c.steps));
    const auto st = monte_carlo_walk(setup.kernel, setup.origin, c.steps, c.trials, c.seed);
    const auto dp = return_probability_dp(setup.kernel, setup.origin, c.steps, false);
    const auto first = first_return_probabilities(dp.probabilities);
    if (format_or(c, "json") == "csv") {
      io::CsvWriter w(out, c.digits);
      w.comment("op=walk.mc " + setup.label + " steps=" + std::to_string(c.steps) +
                " trials=" + std::to_string(c.trials) + " seed=" + std::to_string(c.seed));
      w.header({"n", "at_origin", "first_return", "frequency", "p_n_dp"});
      for (std::size_t n = 0; n <= c.steps; ++n)
        w.row(n, st.at_origin[n], st.first_return[n],
              static_cast<double>(st.at_origin[n]) / static_cast<double>(std::max<std::size_t>(1, c.trials)),
              dp.probabilities[n]);
    } else {
      emit_json(out, {{"op", "walk.mc"}, {"source", setup.label}, {"seed", c.seed}, {"steps", c.steps},
                      {"trials", c.trials}, {"at_origin", st.at_origin}, {"first_return", st.first_return},
                      {"boundary_hits", st.boundary_hits}, {"returns_before_boundary", st.returns_before_boundary},
                      {"p_n_dp", sequence_json(dp.probabilities)},
                      {"first_return_dp", sequence_json(first)}});
    }
    return kSuccess;
  }
  throw UsageError("unknown walk mode '" + c.mode + "'");
}

inline int cmd_cayley(const CommandConfig& c, std::ostream& out) {
  const auto group = need_group(c);
  if (c.mode == "generate") {
    const auto t = cayley_graph(group, c.radius);
    if (format_or(c, "json") == "csv") {
      io::CsvWriter w(out, c.digits);
      w.comment("op=cayley.generate group=" + group.name() + " radius=" + std::to_string(c.radius));
      w.header({"vertex", "word_length", "boundary"});
      for (Index v = 0; v < t.elements.size(); ++v)
        w.row(t.graph.id(v), t.word_length[v], static_cast<int>(t.boundary[v]));
    } else {
      emit_json(out, io::to_json(t.graph));
    }
    return kSuccess;
  }
  if (c.mode == "growth") {
    const auto table = growth_function(group, c.radius);
    if (format_or(c, "csv") == "csv") {
      io::CsvWriter w(out, c.digits);
      w.comment("op=cayley.growth group=" + group.name() + " radius=" + std::to_string(c.radius));
      w.header({"n", "gamma"});
      for (std::size_t n = 0; n < table.counts.size(); ++n) w.row(n, table.counts[n]);
    } else {
      emit_json(out, {{"op", "cayley.growth"}, {"group", group.name()}, {"gamma", table.counts},
                      {"window", {table.window_lo, table.window_hi}}, {"slope", table.slope}});
    }
    return kSuccess;
  }
  if (c.mode == "classify") {
    const auto cls = classify_recurrence(group);
    emit_json(out, {{"op", "cayley.classify"}, {"group", group.name()},
                    {"class", cls.recurrent ? "recurrent" : "transient"},
                    {"growth_degree", cls.growth_degree < 0 ? json("exponential") : json(cls.growth_degree)},
                    {"justification", cls.justification}});
    return kSuccess;
  }
  throw UsageError("unknown cayley mode '" + c.mode + "'");
}

inline json decay_json(const DecayFit& f) {
  return {{"exponent", f.exponent}, {"residual", f.residual}, {"window", {f.window_lo, f.window_hi}},
          {"points", f.points}};
}

inline int cmd_recurrence(const CommandConfig& c, std::ostream& out) {
  constexpr const char* kNote = "finite-scale diagnostic; discrete-time return probabilities stand in for the heat semigroup";
  if (c.mode == "indicator") {
    const auto group = need_group(c);
    const auto seq = return_probability_dp(group, c.n_max);
    const auto ind = recurrence_indicator(seq.probabilities);
    emit_json(out, {{"op", "recurrence.indicator"}, {"group", group.name()}, {"n_max", c.n_max},
                    {"verdict", to_string(ind.verdict)}, {"boundary_case", ind.boundary_case},
                    {"decay", decay_json(ind.decay)}, {"partial_sum", ind.partial_sums.back()},
                    {"late_increase", ind.late_increase},
                    {"catalog_class", classify_recurrence(group).recurrent ? "recurrent" : "transient"},
                    {"note", kNote}});
    return kSuccess;
  }
  if (c.mode == "ultrafit") {
    const auto group = need_group(c);
    const auto fit = ultracontractivity_fit(group, c.n_max);
    emit_json(out, {{"op", "recurrence.ultrafit"}, {"group", group.name()}, {"n_max", c.n_max},
                    {"target", fit.target}, {"decay", decay_json(fit.decay)}, {"note", kNote}});
    return kSuccess;
  }
  if (c.mode == "volume-test") {
    MetricGraphModel model;
    Index center = 0;
    std::vector<Index> boundary;
    std::string label;
    if (!c.group.empty()) {
      const auto group = need_group(c);
      const int trunc = c.truncation > 0 ? c.truncation : static_cast<int>(std::ceil(c.r_max)) + 2;
      const auto t = cayley_graph(group, trunc);
      model = equilateral_model(t.graph);
      center = t.identity;
      boundary = t.boundary_vertices();
      label = "group=" + group.name() + " truncation=" + std::to_string(trunc);
    } else {
      model = need_metric(c);
      if (c.vertex.empty()) throw UsageError("--center is required with --in");
      center = model.index(c.vertex);
      label = "in=" + c.input;
    }
    const auto rep = volume_growth_test(model, center, c.r_max, c.dr, boundary);
    if (format_or(c, "json") == "csv") {
      io::CsvWriter w(out, c.digits);
      w.comment("op=recurrence.volume-test " + label + " R_max=" + io::format_number(c.r_max) +
                " dr=" + io::format_number(c.dr) + " verdict=" + to_string(rep.verdict));
      w.header({"r", "volume", "integral"});
      for (std::size_t i = 0; i < rep.radii.size(); ++i) w.row(rep.radii[i], rep.volumes[i], rep.integral[i]);
    } else {
      emit_json(out, {{"op", "recurrence.volume-test"}, {"source", label}, {"R_max", c.r_max}, {"dr", c.dr},
                      {"integral", rep.integral.back()}, {"last_doubling_increase", rep.last_doubling_increase},
                      {"doubling_ratio", rep.doubling_ratio}, {"verdict", to_string(rep.verdict)}, {"note", kNote}});
    }
    return kSuccess;
  }
  if (c.mode == "weight-check") {
    const auto group = need_group(c);
    const auto rep = weight_condition_check(need_metric(c), group, c.bound_cap);
    emit_json(out, {{"op", "recurrence.weight-check"}, {"group", group.name()}, {"sup_ratio", rep.sup_ratio},
                    {"inf_ratio", rep.inf_ratio}, {"sup_bounded", rep.sup_bounded},
                    {"inf_positive", rep.inf_positive}, {"verdict", to_string(rep.verdict)}, {"note", kNote}});
    return kSuccess;
  }
  throw UsageError("unknown recurrence mode '" + c.mode + "'");
}

}  // namespace detail

/// Runs one command. Exit codes: 0 success, 1 validation failure, 2 usage
/// or input error.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CommandConfig c;
  CLI::App app{"cablekit: discrete and metric graph Laplacians", "cablekit"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  auto common = [&c](CLI::App* sub) {
    sub->add_option("--in", c.input, "input graph (JSON)");
    sub->add_option("--out", c.output, "output path (default: stdout)");
    sub->add_option("--format", c.format, "json or csv");
    sub->add_option("--digits", c.digits, "significant digits in CSV output")->check(CLI::Range(1, 17));
    sub->add_option("--seed", c.seed, "random seed");
  };
  struct Entry {
    std::string name;
    std::vector<std::string> modes;
    std::string help;
  };
  const std::vector<Entry> table{
      {"validate", {}, "validate a graph file"},
      {"discretize", {}, "metric model -> discrete graph"},
      {"realize", {}, "discrete graph -> cable system"},
      {"metric", {"distances", "balls", "intrinsic-check", "quasi-isometry"}, "intrinsic and path metrics"},
      {"spectrum", {"discrete", "metric", "equilateral-check"}, "eigenvalues"},
      {"heat", {}, "heat semigroup from a point source"},
      {"walk", {"dp", "mc"}, "random-walk return probabilities"},
      {"cayley", {"generate", "growth", "classify"}, "Cayley graphs of catalog groups"},
      {"recurrence", {"indicator", "volume-test", "ultrafit", "weight-check"}, "recurrence diagnostics"},
  };
  auto add_params = [&c](CLI::App* sub) {
    sub->add_option("--h", c.h, "mesh size")->check(CLI::PositiveNumber);
    sub->add_option("--k", c.k, "number of eigenvalues");
    sub->add_option("--t", c.t, "time")->check(CLI::NonNegativeNumber);
    sub->add_option("--radius", c.radius, "Cayley radius")->check(CLI::NonNegativeNumber);
    sub->add_option("--n-max", c.n_max, "number of walk steps");
    sub->add_option("--steps", c.steps, "Monte Carlo steps");
    sub->add_option("--trials", c.trials, "Monte Carlo trials");
    sub->add_option("--samples", c.samples, "samples per check");
    sub->add_option("--dr", c.dr, "radius step")->check(CLI::PositiveNumber);
    sub->add_option("--r-max,--ball-radius", c.r_max, "ball radius / largest radius")->check(CLI::NonNegativeNumber);
    sub->add_option("--cap", c.cap, "eigenvalue cap")->check(CLI::PositiveNumber);
    sub->add_option("--tau", c.tau, "exceptional-spectrum threshold")->check(CLI::NonNegativeNumber);
    sub->add_option("--tol", c.tol, "tolerance override")->check(CLI::PositiveNumber);
    sub->add_option("--group", c.group, "Z, Z<d>, F<k>, H3, C<n>");
    sub->add_option("--center,--source,--origin", c.vertex, "vertex id");
    sub->add_option("--weight", c.weight, "default or unit");
    sub->add_option("--weight-file", c.weight_file, "intrinsic weight JSON {\"weights\":[{u,v,p}]}");
    sub->add_option("--dirichlet", c.dirichlet, "Dirichlet vertices")->delimiter(',');
    sub->add_option("--truncation", c.truncation, "Cayley truncation radius");
    sub->add_option("--bound-cap", c.bound_cap, "threshold for unbounded weight ratios")->check(CLI::PositiveNumber);
  };
  for (const auto& e : table) {
    auto* sub = app.add_subcommand(e.name, e.help);
    sub->callback([&c, name = e.name] { c.command = name; });
    if (e.modes.empty()) {
      common(sub);
      add_params(sub);
      continue;
    }
    sub->require_subcommand(1);
    for (const auto& mode : e.modes) {
      auto* leaf = sub->add_subcommand(mode);
      common(leaf);
      add_params(leaf);
      leaf->callback([&c, name = e.name, mode] {
        c.command = name;
        c.mode = mode;
      });
    }
  }

  if (!args.empty() && !args[0].starts_with("-")) {
    auto it = std::find_if(table.begin(), table.end(), [&](const Entry& e) { return e.name == args[0]; });
    if (it == table.end()) {
      err << "unknown subcommand '" << args[0] << "'\n";
      return kUsageError;
    }
    if (!it->modes.empty() && args.size() > 1 && !args[1].starts_with("-") &&
        std::find(it->modes.begin(), it->modes.end(), args[1]) == it->modes.end()) {
      err << "unknown subcommand '" << args[0] << ' ' << args[1] << "'\n";
      return kUsageError;
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  }

  std::ostringstream buffer;
  int code = kSuccess;
  try {
    if (c.command == "validate") code = detail::cmd_validate(c, buffer);
    else if (c.command == "discretize") code = detail::cmd_discretize(c, buffer);
    else if (c.command == "realize") code = detail::cmd_realize(c, buffer);
    else if (c.command == "metric") code = detail::cmd_metric(c, buffer);
    else if (c.command == "spectrum") code = detail::cmd_spectrum(c, buffer);
    else if (c.command == "heat") code = detail::cmd_heat(c, buffer);
    else if (c.command == "walk") code = detail::cmd_walk(c, buffer);
    else if (c.command == "cayley") code = detail::cmd_cayley(c, buffer);
    else if (c.command == "recurrence") code = detail::cmd_recurrence(c, buffer);
    else throw detail::UsageError("unknown subcommand");
  } catch (const InvalidGraph& e) {
    err << "validation error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const FormatError& e) {
    err << "input error: " << e.what() << '\n';
    return kUsageError;
  } catch (const detail::UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const TruncationError& e) {
    err << "truncation error: " << e.what() << '\n';
    return kUsageError;
  } catch (const DomainError& e) {
    err << "parameter error: " << e.what() << '\n';
    return kUsageError;
  } catch (const CapacityError& e) {
    err << "capacity error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  if (c.output.empty()) {
    out << buffer.str();
  } else {
    std::ofstream file(c.output, std::ios::binary);
    if (!file) {
      err << "usage error: cannot write '" << c.output << "'\n";
      return kUsageError;
    }
    file << buffer.str();
  }
  return code;
}

}  // namespace cablekit::cli
