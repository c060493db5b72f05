#pragma once

// Proof-based compilation: graph transformations that lengthen step
// edges, then one rule per step edge.

#include "prooforge/aprp.hpp"

namespace prooforge {

struct TransformReport {
  std::size_t compressed = 0;
  std::size_t step_branch = 0;
  std::size_t branch_branch = 0;
  std::size_t pruned_arms = 0;
  bool budget_exhausted = false;
};

namespace compiler_detail {
inline bool interior(const AprpGraph& g, VertexId v) {
  return v != g.root && v != g.final && !g.has_cover(v) && g.in_degree(v) == 1;
}

/// Drops vertices no longer reachable from the root (final is kept).
inline void drop_orphans(AprpGraph& g) {
  std::set<VertexId> live{g.root, g.final};
  std::vector<VertexId> stack{g.root};
  auto visit = [&](VertexId v) {
    if (live.insert(v).second) stack.push_back(v);
  };
  while (!stack.empty()) {
    VertexId v = stack.back();
    stack.pop_back();
    for (const auto& e : g.steps)
      if (e.from == v) visit(e.to);
    for (const auto& e : g.covers)
      if (e.from == v) visit(e.to);
    for (const auto& b : g.branches)
      if (b.from == v)
        for (const auto& a : b.arms) visit(a.to);
  }
  std::erase_if(g.vertices, [&](const auto& kv) { return !live.count(kv.first); });
  std::erase_if(g.steps, [&](const StepEdge& e) { return !live.count(e.from); });
  std::erase_if(g.covers, [&](const CoverEdge& e) { return !live.count(e.from); });
  std::erase_if(g.branches, [&](const BranchEdge& b) { return !live.count(b.from); });
}
}  // namespace compiler_detail

/// Merges A ->M B ->N C into A ->(M+N) C while B is a plain interior
/// vertex (one in-edge, no cover incidence).
inline AprpGraph compress_steps(const AprpGraph& in, TransformReport* report = nullptr) {
  AprpGraph g = in;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < g.steps.size() && !changed; ++i) {
      VertexId b = g.steps[i].to;
      if (!compiler_detail::interior(g, b)) continue;
      auto j = std::find_if(g.steps.begin(), g.steps.end(), [&](const StepEdge& e) { return e.from == b; });
      if (j == g.steps.end()) continue;
      g.steps[i].to = j->to;
      g.steps[i].n += j->n;
      g.steps.erase(j);
      g.vertices.erase(b);
      changed = true;
      if (report) ++report->compressed;
    }
  }
  return g;
}

/// A ->M B ->[αi] [Ci] becomes A ->[αi] [αi(A) ->M Ci].
inline AprpGraph lift_step_branch(const AprpGraph& in, const Semantics& sem, const SolverOptions& sopt = {},
                                  TransformReport* report = nullptr) {
  AprpGraph g = in;
  auto norm = sem.normalizer();
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < g.steps.size() && !changed; ++i) {
      StepEdge e = g.steps[i];
      if (!compiler_detail::interior(g, e.to)) continue;
      auto bi = std::find_if(g.branches.begin(), g.branches.end(),
                             [&](const BranchEdge& b) { return b.from == e.to; });
      if (bi == g.branches.end()) continue;
      BranchEdge old = *bi;
      g.branches.erase(bi);
      g.steps.erase(g.steps.begin() + static_cast<std::ptrdiff_t>(i));
      g.vertices.erase(e.to);
      const CTerm src = g.at(e.from).term;
      BranchEdge lifted{e.from, {}};
      for (auto& arm : old.arms) {
        CTerm t = csubst_apply(arm.csubst, src, norm);
        if (t.constraint.is_false() || is_sat(t.constraint, sopt).unsat()) {
          if (report) ++report->pruned_arms;
          continue;
        }
        VertexId a = g.add(std::move(t), Status::Reached);
        g.steps.push_back({a, arm.to, e.n});
        lifted.arms.push_back({arm.csubst, a});
      }
      if (lifted.arms.size() == 1 && lifted.arms[0].csubst.subst.empty() &&
          entails(src.constraint, lifted.arms[0].csubst.constraint, sopt).yes()) {
        // A single entailed arm is just the step itself.
        VertexId a = lifted.arms[0].to;
        for (auto& s : g.steps)
          if (s.from == a) s.from = e.from;
        g.vertices.erase(a);
      } else if (!lifted.arms.empty()) {
        g.branches.push_back(std::move(lifted));
      }
      compiler_detail::drop_orphans(g);
      changed = true;
      if (report) ++report->step_branch;
    }
  }
  return g;
}

/// Flattens A ->[αk] [Bk], Bk ->[βj] [Cj] into A ->[αk∘βj] [Cj].
inline AprpGraph lift_branch_branch(const AprpGraph& in, const Semantics& sem, const SolverOptions& sopt = {},
                                    TransformReport* report = nullptr) {
  AprpGraph g = in;
  auto norm = sem.normalizer();
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < g.branches.size() && !changed; ++i) {
      for (std::size_t k = 0; k < g.branches[i].arms.size() && !changed; ++k) {
        VertexId b = g.branches[i].arms[k].to;
        if (!compiler_detail::interior(g, b)) continue;
        auto inner = std::find_if(g.branches.begin(), g.branches.end(),
                                  [&](const BranchEdge& e) { return e.from == b; });
        if (inner == g.branches.end()) continue;
        auto inner_idx = static_cast<std::size_t>(inner - g.branches.begin());
        BranchEdge nested = *inner;
        g.branches.erase(inner);
        BranchEdge& outer = g.branches[inner_idx < i ? i - 1 : i];
        CSubst alpha = outer.arms[k].csubst;
        const CTerm src = g.at(outer.from).term;
        std::vector<BranchArm> arms;
        for (std::size_t x = 0; x < outer.arms.size(); ++x) {
          if (x != k) {
            arms.push_back(outer.arms[x]);
            continue;
          }
          for (const auto& inner_arm : nested.arms) {
            CSubst composed = compose(alpha, inner_arm.csubst, norm);
            CTerm t = csubst_apply(composed, src, norm);
            if (t.constraint.is_false() || is_sat(t.constraint, sopt).unsat()) {
              if (report) ++report->pruned_arms;
              continue;
            }
            arms.push_back({std::move(composed), inner_arm.to});
          }
        }
        outer.arms = std::move(arms);
        g.vertices.erase(b);
        compiler_detail::drop_orphans(g);
        changed = true;
        if (report) ++report->branch_branch;
      }
    }
  }
  return g;
}

/// Branch-branch lifting, step-branch lifting and compression, repeated
/// to a fixpoint within `budget` rounds.
inline AprpGraph normalize(const AprpGraph& in, const Semantics& sem, const SolverOptions& sopt = {},
                           TransformReport* report = nullptr, std::size_t budget = 10000) {
  TransformReport local;
  TransformReport& rep = report ? *report : local;
  AprpGraph g = in;
  for (std::size_t round = 0;; ++round) {
    if (round == budget) {
      rep.budget_exhausted = true;
      break;
    }
    TransformReport before = rep;
    g = lift_branch_branch(g, sem, sopt, &rep);
    g = lift_step_branch(g, sem, sopt, &rep);
    g = compress_steps(g, &rep);
    if (rep.compressed == before.compressed && rep.step_branch == before.step_branch &&
        rep.branch_branch == before.branch_branch)
      break;
  }
  return g;
}

/// Renames every variable of the rule to V0, V1, ... in order of first
/// occurrence (lhs, then rhs, then guard).
inline Rule canonical_names(const Rule& r, const Normalizer& norm) {
  std::vector<Term> order;
  std::set<std::string> seen;
  vars_in_order(r.lhs, order, seen);
  vars_in_order(r.rhs, order, seen);
  vars_in_order(r.guard.to_term(), order, seen);
  Subst ren;
  for (std::size_t i = 0; i < order.size(); ++i)
    ren.set(order[i].name(), Term::var("V" + std::to_string(i), order[i].sort()));
  Rule out = r;
  out.lhs = apply_subst(ren, r.lhs);
  out.rhs = apply_subst(ren, r.rhs);
  out.guard = r.guard.substitute(ren, norm);
  return out;
}

/// One rule per step edge: lhs the source state, rhs the target state,
/// guarded by the source constraint. Edges into stuck vertices are
/// skipped.
inline std::vector<CompiledRule> emit_rules(const AprpGraph& g, const Semantics& sem) {
  auto norm = sem.normalizer();
  std::vector<CompiledRule> out;
  std::vector<StepEdge> edges = g.steps;
  std::sort(edges.begin(), edges.end(),
            [](const StepEdge& a, const StepEdge& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });
  for (const auto& e : edges) {
    const Vertex& to = g.at(e.to);
    if (to.status == Status::Stuck) continue;
    const CTerm& src = g.at(e.from).term;
    if (src.constraint.is_false()) throw std::logic_error("step edge from an unsatisfiable state");
    Rule r;
    r.name = (g.id.empty() ? std::string("proof") : g.id) + "-c" + std::to_string(out.size());
    r.priority = kCompiledPriority;
    r.lhs = src.config;
    r.rhs = sem_detail::changed_cells(src.config, to.term.config);
    r.guard = simplify(src.constraint, norm);
    auto lv = free_vars(r.lhs);
    std::string missing;
    if (!sem_detail::subset(r.guard.free_vars(), lv, &missing) ||
        !sem_detail::subset(free_vars(r.rhs), lv, &missing))
      continue;
    r.provenance.compiled = true;
    r.provenance.proof = g.id.empty() ? "-" : g.id;
    r.provenance.path = std::to_string(e.from) + ">" + std::to_string(e.to);
    r.provenance.consolidated = e.n;
    out.push_back({canonical_names(r, norm)});
  }
  return out;
}

/// 1 - compiled/original.
inline double delta_steps(std::size_t original, std::size_t compiled) {
  if (original == 0) throw std::invalid_argument("delta_steps: original step count is zero");
  return (static_cast<double>(original) - static_cast<double>(compiled)) / static_cast<double>(original);
}

}  // namespace prooforge
