#pragma once

// Proof graph serialization: versioned JSON and Graphviz DOT.

#include "prooforge/aprp.hpp"

#include <nlohmann/json.hpp>

namespace prooforge {

using Json = nlohmann::ordered_json;

inline constexpr const char* kGraphFormat = "prooforge-aprp";
inline constexpr int kGraphVersion = 1;

namespace io_detail {
inline Json term_json(const Term& t) {
  switch (t.kind()) {
    case Kind::Var:
      return Json::array({"v", t.name(), t.sort().name});
    case Kind::IntLit:
      return Json::array({"i", t.value().str()});
    case Kind::BoolLit:
      return Json::array({"b", t.flag()});
    case Kind::App: {
      Json args = Json::array();
      for (const auto& a : t.args()) args.push_back(term_json(a));
      return Json::array({"f", t.name(), t.sort().name, std::move(args)});
    }
    case Kind::Cell:
      return Json::array({"c", t.name(), term_json(t.body())});
    case Kind::Bag: {
      Json cells = Json::array();
      for (const auto& a : t.args()) cells.push_back(term_json(a));
      return Json::array({"bag", std::move(cells)});
    }
  }
  return nullptr;
}

inline Term term_of(const Json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_string()) throw MalformedInput("bad term encoding");
  const std::string tag = j[0].get<std::string>();
  auto arity = [&](std::size_t n) {
    if (j.size() != n) throw MalformedInput("bad term encoding for tag " + tag);
  };
  if (tag == "v") {
    arity(3);
    return Term::var(j[1].get<std::string>(), Sort{j[2].get<std::string>()});
  }
  if (tag == "i") {
    arity(2);
    return Term::integer(BigInt(j[1].get<std::string>()));
  }
  if (tag == "b") {
    arity(2);
    return Term::boolean(j[1].get<bool>());
  }
  if (tag == "f") {
    arity(4);
    std::vector<Term> args;
    for (const auto& a : j[3]) args.push_back(term_of(a));
    return Term::app(j[1].get<std::string>(), std::move(args), Sort{j[2].get<std::string>()});
  }
  if (tag == "c") {
    arity(3);
    return Term::cell(j[1].get<std::string>(), term_of(j[2]));
  }
  if (tag == "bag") {
    arity(2);
    std::vector<Term> cells;
    for (const auto& a : j[1]) cells.push_back(term_of(a));
    return Term::bag(std::move(cells));
  }
  throw MalformedInput("unknown term tag " + tag);
}

inline Json constraint_json(const Constraint& c) {
  Json atoms = Json::array();
  for (const auto& a : c.conjuncts()) atoms.push_back(term_json(a));
  return atoms;
}

inline Constraint constraint_of(const Json& j) {
  std::vector<Term> atoms;
  for (const auto& a : j) atoms.push_back(term_of(a));
  return Constraint::of_conjuncts(atoms);
}

inline Json csubst_json(const CSubst& a) {
  Json subst = Json::array();
  for (const auto& [v, t] : a.subst) subst.push_back({{"var", v}, {"term", term_json(t)}});
  return {{"subst", std::move(subst)}, {"constraint", constraint_json(a.constraint)}};
}

inline CSubst csubst_of(const Json& j) {
  CSubst out;
  for (const auto& e : j.at("subst")) out.subst.set(e.at("var").get<std::string>(), term_of(e.at("term")));
  out.constraint = constraint_of(j.at("constraint"));
  return out;
}

inline Status status_of(const std::string& s) {
  for (Status st : {Status::Pending, Status::Reached, Status::Stuck, Status::Final})
    if (s == status_name(st)) return st;
  throw MalformedInput("unknown vertex status " + s);
}

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\l";
      continue;
    }
    out += c;
  }
  return out;
}
}  // namespace io_detail

/// Canonical text of a constrained term: configuration, then
/// `requires C` when the constraint is not trivially true.
inline std::string cterm_text(const CTerm& t, const Signature* sig = nullptr) {
  Printer p(sig);
  std::string out = p(t.config);
  if (!t.constraint.is_true()) out += " requires " + p(t.constraint.to_term(), Sort::boolean());
  return out;
}

inline Json graph_to_json(const AprpGraph& g, const Signature* sig = nullptr) {
  using namespace io_detail;
  Json j;
  j["format"] = kGraphFormat;
  j["version"] = kGraphVersion;
  j["id"] = g.id;
  j["root"] = g.root;
  j["final"] = g.final;
  j["next_id"] = g.next_id;
  j["partial"] = g.partial();
  Json vs = Json::array();
  for (const auto& [id, v] : g.vertices)
    vs.push_back({{"id", id},
                  {"status", status_name(v.status)},
                  {"text", cterm_text(v.term, sig)},
                  {"config", term_json(v.term.config)},
                  {"constraint", constraint_json(v.term.constraint)}});
  j["vertices"] = std::move(vs);
  Json steps = Json::array();
  for (const auto& e : g.steps) steps.push_back({{"from", e.from}, {"to", e.to}, {"n", e.n}});
  j["steps"] = std::move(steps);
  Json covers = Json::array();
  for (const auto& e : g.covers) covers.push_back({{"from", e.from}, {"to", e.to}, {"csubst", csubst_json(e.csubst)}});
  j["covers"] = std::move(covers);
  Json branches = Json::array();
  for (const auto& b : g.branches) {
    Json arms = Json::array();
    for (const auto& a : b.arms) arms.push_back({{"to", a.to}, {"csubst", csubst_json(a.csubst)}});
    branches.push_back({{"from", b.from}, {"arms", std::move(arms)}});
  }
  j["branches"] = std::move(branches);
  Json log = Json::array();
  for (const auto& l : g.log) log.push_back({{"iteration", l.iteration}, {"vertex", l.vertex}, {"action", l.action}});
  j["log"] = std::move(log);
  return j;
}

inline AprpGraph graph_from_json(const Json& j) {
  using namespace io_detail;
  try {
    if (j.at("format").get<std::string>() != kGraphFormat) throw MalformedInput("not a proof graph");
    if (j.at("version").get<int>() != kGraphVersion)
      throw MalformedInput("unsupported proof graph version " + std::to_string(j.at("version").get<int>()));
    AprpGraph g;
    g.id = j.at("id").get<std::string>();
    g.root = j.at("root").get<VertexId>();
    g.final = j.at("final").get<VertexId>();
    g.next_id = j.at("next_id").get<VertexId>();
    for (const auto& v : j.at("vertices")) {
      VertexId id = v.at("id").get<VertexId>();
      CTerm t{term_of(v.at("config")), constraint_of(v.at("constraint"))};
      if (!g.vertices.emplace(id, Vertex{std::move(t), status_of(v.at("status").get<std::string>())}).second)
        throw MalformedInput("duplicate vertex " + std::to_string(id));
      if (id >= g.next_id) throw MalformedInput("vertex id beyond next_id");
    }
    for (const auto& e : j.at("steps"))
      g.steps.push_back({e.at("from").get<VertexId>(), e.at("to").get<VertexId>(), e.at("n").get<std::size_t>()});
    for (const auto& e : j.at("covers"))
      g.covers.push_back({e.at("from").get<VertexId>(), e.at("to").get<VertexId>(), csubst_of(e.at("csubst"))});
    for (const auto& b : j.at("branches")) {
      BranchEdge be{b.at("from").get<VertexId>(), {}};
      for (const auto& a : b.at("arms")) be.arms.push_back({csubst_of(a.at("csubst")), a.at("to").get<VertexId>()});
      g.branches.push_back(std::move(be));
    }
    for (const auto& l : j.at("log"))
      g.log.push_back({l.at("iteration").get<std::size_t>(), l.at("vertex").get<VertexId>(),
                       l.at("action").get<std::string>()});
    return g;
  } catch (const Json::exception& e) {
    throw MalformedInput(std::string("malformed proof graph: ") + e.what());
  }
}

/// Graphviz rendering: step edges labeled with their length, branch arms
/// with their guard, cover edges dashed.
inline std::string graph_to_dot(const AprpGraph& g, const Signature* sig = nullptr) {
  using io_detail::dot_escape;
  Printer p(sig);
  std::ostringstream os;
  os << "digraph \"" << dot_escape(g.id) << "\" {\n  node [shape=box, fontname=monospace];\n";
  for (const auto& [id, v] : g.vertices) {
    os << "  v" << id << " [label=\"" << id << " (" << status_name(v.status) << ")\\l"
       << dot_escape(cterm_text(v.term, sig)) << "\\l\"";
    if (id == g.root) os << ", penwidth=2";
    if (v.status == Status::Stuck) os << ", color=red";
    if (v.status == Status::Final) os << ", color=blue";
    if (v.status == Status::Pending) os << ", style=dotted";
    os << "];\n";
  }
  for (const auto& e : g.steps) os << "  v" << e.from << " -> v" << e.to << " [label=\"" << e.n << "\"];\n";
  for (const auto& b : g.branches)
    for (const auto& a : b.arms)
      os << "  v" << b.from << " -> v" << a.to << " [label=\""
         << dot_escape(p(a.csubst.constraint.to_term(), Sort::boolean())) << "\", color=darkgreen];\n";
  for (const auto& e : g.covers) os << "  v" << e.from << " -> v" << e.to << " [style=dashed];\n";
  os << "}\n";
  return os.str();
}

}  // namespace prooforge
