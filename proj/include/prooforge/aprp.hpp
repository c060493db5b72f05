#pragma once

// All-path reachability proof graphs and their construction.

#include "prooforge/executor.hpp"

#include <deque>
#include <functional>

namespace prooforge {

enum class Status { Pending, Reached, Stuck, Final };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::Pending:
      return "pending";
    case Status::Reached:
      return "reached";
    case Status::Stuck:
      return "stuck";
    case Status::Final:
      return "final";
  }
  return "?";
}

using VertexId = std::size_t;

struct Vertex {
  CTerm term;
  Status status = Status::Pending;
};

struct StepEdge {
  VertexId from, to;
  std::size_t n;
};

struct CoverEdge {
  VertexId from, to;
  CSubst csubst;
};

struct BranchArm {
  CSubst csubst;
  VertexId to;
};

struct BranchEdge {
  VertexId from;
  std::vector<BranchArm> arms;
};

struct LogEntry {
  std::size_t iteration;
  VertexId vertex;
  std::string action;  // terminal, cover, abstract, step, branch, step-branch, stuck
};

struct AprpGraph {
  std::string id;
  std::map<VertexId, Vertex> vertices;
  std::vector<StepEdge> steps;
  std::vector<CoverEdge> covers;
  std::vector<BranchEdge> branches;
  VertexId root = 0;
  VertexId final = 1;
  std::vector<LogEntry> log;
  VertexId next_id = 0;

  VertexId add(CTerm t, Status s) {
    vertices.emplace(next_id, Vertex{std::move(t), s});
    return next_id++;
  }
  const Vertex& at(VertexId v) const {
    auto it = vertices.find(v);
    if (it == vertices.end()) throw std::out_of_range("unknown vertex " + std::to_string(v));
    return it->second;
  }
  bool partial() const {
    for (const auto& [_, v] : vertices)
      if (v.status == Status::Pending) return true;
    return false;
  }
  const StepEdge* step_from(VertexId v) const {
    for (const auto& e : steps)
      if (e.from == v) return &e;
    return nullptr;
  }
  const BranchEdge* branch_from(VertexId v) const {
    for (const auto& e : branches)
      if (e.from == v) return &e;
    return nullptr;
  }
  bool has_cover(VertexId v) const {
    for (const auto& e : covers)
      if (e.from == v || e.to == v) return true;
    return false;
  }
  /// Number of step and branch-arm edges entering v.
  std::size_t in_degree(VertexId v) const {
    std::size_t n = 0;
    for (const auto& e : steps) n += e.to == v;
    for (const auto& b : branches)
      for (const auto& a : b.arms) n += a.to == v;
    return n;
  }
};

/// Ancestors along reversed step and branch edges, nearest first.
inline std::vector<VertexId> reachable_up(const AprpGraph& g, VertexId v) {
  g.at(v);
  std::map<VertexId, std::vector<VertexId>> parents;
  for (const auto& e : g.steps) parents[e.to].push_back(e.from);
  for (const auto& b : g.branches)
    for (const auto& a : b.arms) parents[a.to].push_back(b.from);
  std::vector<VertexId> out;
  std::set<VertexId> seen{v};
  std::deque<VertexId> q{v};
  while (!q.empty()) {
    VertexId cur = q.front();
    q.pop_front();
    for (VertexId p : parents[cur]) {
      if (!seen.insert(p).second || p == g.final) continue;
      out.push_back(p);
      q.push_back(p);
    }
  }
  return out;
}

/// cau of the configurations with the shared constraint atoms.
inline CTerm abstract(const CTerm& t1, const CTerm& t2, VariableSupply& fresh) {
  Generalization g = cau(t1.config, t2.config, fresh);
  return {g.gen, common_constraints(t1.constraint, t2.constraint)};
}

/// Equal up to a consistent renaming of variables.
inline bool alpha_equivalent(const CTerm& a, const CTerm& b) {
  auto pack = [](const CTerm& t) {
    return Term::app("#cterm", {t.config, t.constraint.to_term()}, Sort::kitem());
  };
  return alpha_equivalent(pack(a), pack(b));
}

struct ProofConfig {
  std::size_t n = 1;
  std::size_t i_max = 1000;
  bool precise = false;
  /// Overrides; when empty the spec's modes decide.
  std::function<bool(const CTerm&)> terminal;
  std::function<bool(const CTerm&, const CTerm&)> sameloop;
  ExecOptions exec;
};

/// Whether any rule's left side matches (guards ignored).
inline bool any_rule_matches(const Semantics& sem, const Term& config) {
  for (std::size_t idx : sem.candidates(config))
    if (match_rule(sem.rules[idx], config)) return true;
  return false;
}

inline bool default_sameloop(const Semantics& sem, const CTerm& a, const CTerm& b,
                             const std::set<std::string>& heads = {}) {
  std::string h = k_head(a.config);
  if (h != k_head(b.config)) return false;
  if (!heads.empty() && !heads.count(h)) return false;
  if (sem.sig.cell("pc")) return *a.config.find_cell("pc") == *b.config.find_cell("pc");
  return true;
}

inline AprpGraph construct_aprp(const Semantics& sem, const ProgramSpec& spec, const ProofConfig& cfg) {
  if (cfg.n == 0 || cfg.i_max == 0) throw std::invalid_argument("proof bounds must be positive");
  auto norm = sem.normalizer();
  const SolverOptions& sopt = cfg.exec.solver;
  if (is_sat(spec.init.constraint, sopt).unsat())
    throw std::invalid_argument("unsatisfiable initial constraint");

  ExecOptions eopt = cfg.exec;
  for (const auto& c : spec.cut) eopt.cut.insert(c);

  AprpGraph g;
  g.id = spec.name;
  g.root = g.add(spec.init, Status::Pending);
  g.final = g.add(spec.final, Status::Final);
  VariableSupply fresh;
  fresh.avoid(spec.init.config);
  fresh.avoid(spec.final.config);

  auto terminal = [&](const CTerm& t) {
    if (cfg.terminal) return cfg.terminal(t);
    if (implies(t, spec.final, norm, sopt, &spec.init_vars)) return true;
    return spec.terminal == TerminalMode::FinalOrStuck && !any_rule_matches(sem, t.config);
  };
  auto sameloop = [&](const CTerm& a, const CTerm& b) {
    if (cfg.sameloop) return cfg.sameloop(a, b);
    return spec.sameloop == SameloopMode::Head && default_sameloop(sem, a, b, spec.loop_heads);
  };

  std::deque<VertexId> work{g.root};
  std::size_t i = 0;
  while (!work.empty() && i < cfg.i_max) {
    VertexId v = work.front();
    work.pop_front();
    ++i;
    const CTerm t = g.at(v).term;
    auto log = [&](const char* what) { g.log.push_back({i, v, what}); };
    auto mark = [&](Status s) { g.vertices.at(v).status = s; };

    if (terminal(t)) {
      mark(Status::Reached);
      log("terminal");
      continue;
    }
    CTerm abs = t;
    bool reached = false;
    for (VertexId p : reachable_up(g, v)) {
      const CTerm& prev = g.at(p).term;
      if (cfg.precise) {
        if (auto a = implies(t, prev, norm, sopt)) {
          g.covers.push_back({v, p, std::move(*a)});
          reached = true;
          log("cover");
          break;
        }
      }
      if (sameloop(t, prev)) abs = abstract(abs, prev, fresh);
    }
    if (!reached && abs.config != t.config) {
      if (auto a = implies(t, abs, norm, sopt)) {
        std::optional<VertexId> same;
        for (const auto& [id, w] : g.vertices)
          if (id != g.final && alpha_equivalent(w.term, abs)) {
            same = id;
            break;
          }
        if (same) {
          if (auto b = implies(t, g.at(*same).term, norm, sopt)) {
            g.covers.push_back({v, *same, std::move(*b)});
            reached = true;
          }
        } else {
          VertexId w = g.add(abs, Status::Pending);
          g.covers.push_back({v, w, std::move(*a)});
          work.push_back(w);
          reached = true;
        }
        if (reached) log("abstract");
      }
    }
    if (reached) {
      mark(Status::Reached);
      continue;
    }

    StepResult r = execute(sem, t, cfg.n, eopt);
    if (r.applied == 0 && r.branches.empty()) {
      mark(Status::Stuck);
      log("stuck");
      continue;
    }
    mark(Status::Reached);
    VertexId src = v;
    if (r.applied > 0) {
      src = g.add(r.next, r.branches.empty() ? Status::Pending : Status::Reached);
      g.steps.push_back({v, src, r.applied});
      if (r.branches.empty()) {
        log("step");
        work.push_back(src);
      }
    }
    if (!r.branches.empty()) {
      BranchEdge b{src, {}};
      for (auto& alpha : r.branches) {
        VertexId w = g.add(csubst_apply(alpha, r.next, norm), Status::Pending);
        b.arms.push_back({std::move(alpha), w});
        work.push_back(w);
      }
      g.branches.push_back(std::move(b));
      log(r.applied > 0 ? "step-branch" : "branch");
    }
  }
  return g;
}

/// Audits the graph: edge shapes, cover and branch substitutions, and a
/// symbolic replay of every step edge. Empty when the graph is sound.
inline std::vector<std::string> check_graph(const AprpGraph& g, const Semantics& sem,
                                            const SolverOptions& sopt = {}) {
  std::vector<std::string> out;
  auto norm = sem.normalizer();
  auto known = [&](VertexId v) { return g.vertices.count(v) > 0; };
  auto same_cterm = [&](const CTerm& want, const CTerm& got) {
    if (want.config != got.config) return false;
    if (want.constraint == got.constraint) return true;
    return entails(want.constraint, got.constraint, sopt).yes() &&
           entails(got.constraint, want.constraint, sopt).yes();
  };
  if (!known(g.root)) out.push_back("root vertex missing");
  std::set<VertexId> step_sources, branch_sources;
  for (const auto& e : g.steps) {
    std::string name = "step " + std::to_string(e.from) + "->" + std::to_string(e.to);
    if (!known(e.from) || !known(e.to)) {
      out.push_back(name + ": unknown vertex");
      continue;
    }
    if (e.n == 0) {
      out.push_back(name + ": length 0");
      continue;
    }
    if (!step_sources.insert(e.from).second) out.push_back(name + ": second step edge from source");
    try {
      StepResult r = execute(sem, g.at(e.from).term, e.n);
      if (r.applied != e.n)
        out.push_back(name + ": replay applied " + std::to_string(r.applied) + " rewrites");
      else if (!same_cterm(g.at(e.to).term, r.next))
        out.push_back(name + ": replay reaches a different state");
    } catch (const std::exception& ex) {
      out.push_back(name + ": replay failed: " + ex.what());
    }
  }
  for (const auto& e : g.covers) {
    std::string name = "cover " + std::to_string(e.from) + "->" + std::to_string(e.to);
    if (!known(e.from) || !known(e.to)) {
      out.push_back(name + ": unknown vertex");
      continue;
    }
    CTerm applied = csubst_apply(e.csubst, g.at(e.to).term, norm);
    const CTerm& src = g.at(e.from).term;
    if (applied.config != src.config)
      out.push_back(name + ": substitution does not reproduce the source configuration");
    else if (!entails(src.constraint, applied.constraint, sopt).yes())
      out.push_back(name + ": source constraint does not entail the covering constraint");
  }
  for (const auto& b : g.branches) {
    std::string name = "branch " + std::to_string(b.from);
    if (!known(b.from)) {
      out.push_back(name + ": unknown vertex");
      continue;
    }
    if (!branch_sources.insert(b.from).second) out.push_back(name + ": second branch edge from source");
    if (b.arms.empty()) out.push_back(name + ": no arms");
    for (const auto& a : b.arms) {
      std::string an = name + "->" + std::to_string(a.to);
      if (!known(a.to)) {
        out.push_back(an + ": unknown vertex");
        continue;
      }
      const CTerm& target = g.at(a.to).term;
      if (is_sat(target.constraint, sopt).unsat()) out.push_back(an + ": unsatisfiable arm");
      if (!same_cterm(target, csubst_apply(a.csubst, g.at(b.from).term, norm)))
        out.push_back(an + ": arm state is not the guarded source");
    }
  }
  for (VertexId v : step_sources)
    if (branch_sources.count(v)) out.push_back("vertex " + std::to_string(v) + " has both step and branch edges");
  return out;
}

}  // namespace prooforge
