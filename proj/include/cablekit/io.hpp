#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "cablekit/correspondence.hpp"
#include "cablekit/graph.hpp"

namespace cablekit::io {

using json = nlohmann::json;
using AnyGraph = std::variant<DiscreteGraph, MetricGraphModel>;

namespace detail {

inline void require_keys(const json& obj, const std::set<std::string>& allowed, const std::set<std::string>& required,
                         const std::string& where) {
  if (!obj.is_object()) throw FormatError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.contains(key)) throw FormatError("unknown key '" + key + "' in " + where);
  for (const auto& key : required)
    if (!obj.contains(key)) throw FormatError("missing key '" + key + "' in " + where);
}

/// Vertex ids may be strings or integers; integers are kept as decimal text.
inline std::string read_id(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw FormatError(where + ": vertex id must be a string or an integer");
}

inline double read_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw FormatError(where + " must be a number");
  return v.get<double>();
}

inline Index lookup(const std::unordered_map<std::string, Index>& index, const std::string& id) {
  auto it = index.find(id);
  if (it == index.end()) throw FormatError("edge refers to unknown vertex '" + id + "'");
  return it->second;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Discrete graphs: {"type":"discrete","vertices":[{"id","m"}],"edges":[{"u","v","b"}]}
// ---------------------------------------------------------------------------

inline DiscreteGraph discrete_from_json(const json& doc) {
  detail::require_keys(doc, {"type", "vertices", "edges"}, {"type", "vertices", "edges"}, "discrete graph");
  if (doc.at("type") != "discrete") throw FormatError("expected type \"discrete\"");
  std::vector<VertexId> ids;
  std::vector<double> m;
  std::unordered_map<std::string, Index> index;
  for (const auto& v : doc.at("vertices")) {
    detail::require_keys(v, {"id", "m"}, {"id", "m"}, "vertex");
    ids.push_back(detail::read_id(v.at("id"), "vertex"));
    if (!index.emplace(ids.back(), ids.size() - 1).second) throw FormatError("duplicate vertex id '" + ids.back() + "'");
    m.push_back(detail::read_number(v.at("m"), "vertex measure"));
  }
  std::vector<WeightEntry> entries;
  for (const auto& e : doc.at("edges")) {
    detail::require_keys(e, {"u", "v", "b"}, {"u", "v", "b"}, "edge");
    entries.push_back({detail::lookup(index, detail::read_id(e.at("u"), "edge")),
                       detail::lookup(index, detail::read_id(e.at("v"), "edge")),
                       detail::read_number(e.at("b"), "edge weight")});
  }
  return DiscreteGraph(std::move(ids), std::move(m), entries);
}

inline json to_json(const DiscreteGraph& g) {
  json doc{{"type", "discrete"}, {"vertices", json::array()}, {"edges", json::array()}};
  for (Index v = 0; v < g.size(); ++v) doc["vertices"].push_back({{"id", g.id(v)}, {"m", g.m(v)}});
  for (Index u = 0; u < g.size(); ++u) {
    for (const auto& n : g.row(u)) {
      const double back = g.b(n.vertex, u);
      // one record per pair; both directions only when they disagree
      if (u < n.vertex || (u > n.vertex && !(back == n.weight)) || u == n.vertex)
        doc["edges"].push_back({{"u", g.id(u)}, {"v", g.id(n.vertex)}, {"b", n.weight}});
    }
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Metric models: {"type":"metric","vertices":["id",...],"edges":[{"id","u","v","length","mu","nu"}]}
// ---------------------------------------------------------------------------

inline MetricGraphModel metric_from_json(const json& doc) {
  detail::require_keys(doc, {"type", "vertices", "edges", "provenance"}, {"type", "vertices", "edges"},
                       "metric model");
  if (doc.at("type") != "metric") throw FormatError("expected type \"metric\"");
  std::vector<VertexId> ids;
  std::unordered_map<std::string, Index> index;
  for (const auto& v : doc.at("vertices")) {
    ids.push_back(detail::read_id(v, "vertex"));
    if (!index.emplace(ids.back(), ids.size() - 1).second) throw FormatError("duplicate vertex id '" + ids.back() + "'");
  }
  std::vector<MetricEdge> edges;
  std::set<std::string> edge_ids;
  for (const auto& e : doc.at("edges")) {
    detail::require_keys(e, {"id", "u", "v", "length", "mu", "nu"}, {"id", "u", "v", "length"}, "edge");
    MetricEdge edge;
    edge.id = detail::read_id(e.at("id"), "edge id");
    if (!edge_ids.insert(edge.id).second) throw FormatError("duplicate edge id '" + edge.id + "'");
    edge.initial = detail::lookup(index, detail::read_id(e.at("u"), "edge"));
    edge.terminal = detail::lookup(index, detail::read_id(e.at("v"), "edge"));
    edge.length = detail::read_number(e.at("length"), "edge length");
    edge.mu = e.contains("mu") ? detail::read_number(e.at("mu"), "edge mu") : 1.0;
    edge.nu = e.contains("nu") ? detail::read_number(e.at("nu"), "edge nu") : 1.0;
    edges.push_back(std::move(edge));
  }
  return MetricGraphModel(std::move(ids), std::move(edges));
}

inline json to_json(const MetricGraphModel& g) {
  json doc{{"type", "metric"}, {"vertices", g.ids()}, {"edges", json::array()}};
  for (const auto& e : g.edges())
    doc["edges"].push_back({{"id", e.id},
                            {"u", g.id(e.initial)},
                            {"v", g.id(e.terminal)},
                            {"length", e.length},
                            {"mu", e.mu},
                            {"nu", e.nu}});
  return doc;
}

/// A cable system is a metric model with a "provenance" object.
inline json to_json(const CableSystem& cs) {
  json doc = to_json(cs.model);
  json weight = json::array();
  for (const auto& [key, p] : cs.weight.entries())
    weight.push_back({{"u", cs.model.id(key.first)}, {"v", cs.model.id(key.second)}, {"p", p}});
  json loops = json::array();
  for (Index v : cs.loop_vertices) loops.push_back(cs.model.id(v));
  doc["provenance"] = {{"scheme", CableSystem::scheme},
                       {"loop_length", CableSystem::loop_length},
                       {"loop_vertices", loops},
                       {"intrinsic_weight", weight}};
  return doc;
}

inline AnyGraph graph_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("type")) throw FormatError("graph document needs a \"type\" key");
  const auto& type = doc.at("type");
  if (type == "discrete") return discrete_from_json(doc);
  if (type == "metric") return metric_from_json(doc);
  throw FormatError("unknown graph type " + type.dump());
}

inline json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("malformed JSON in '" + path + "': " + e.what());
  }
}

inline AnyGraph read_graph(const std::string& path) { return graph_from_json(parse_file(path)); }

/// Sorted keys, arrays sorted by their serialized form, every number
/// rounded to `digits` significant digits and stored as a double. Two
/// documents describing the same graph up to ordering and floating-point
/// noise normalize identically.
inline json canonicalize(const json& doc, int digits = 12) {
  std::function<json(const json&)> walk = [&](const json& x) -> json {
    if (x.is_number()) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.*g", digits, x.get<double>());
      return std::stod(buf);
    }
    if (x.is_array()) {
      json out = json::array();
      for (const auto& y : x) out.push_back(walk(y));
      std::vector<json> items(out.begin(), out.end());
      std::sort(items.begin(), items.end(), [](const json& a, const json& b) { return a.dump() < b.dump(); });
      return json(items);
    }
    if (x.is_object()) {
      json out = json::object();
      for (const auto& [k, v] : x.items()) out[k] = walk(v);
      return out;
    }
    return x;
  };
  return walk(doc);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Round-trip safe by default (17 significant digits).
inline std::string format_number(double x, int digits = 17) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out, int digits = 17) : out_(out), digits_(digits) {}

  /// "# key=value" header lines naming the operation and its parameters.
  void comment(const std::string& text) { out_ << "# " << text << '\n'; }

  void header(const std::vector<std::string>& columns) { row_strings(columns); }

  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }

 private:
  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }
  std::string cell(double x) const { return format_number(x, digits_); }
  std::string cell(const std::string& s) const { return s; }
  std::string cell(const char* s) const { return s; }
  template <class I>
    requires std::is_integral_v<I>
  std::string cell(I x) const {
    return std::to_string(x);
  }

  std::ostream& out_;
  int digits_;
};

}  // namespace cablekit::io
