#pragma once

// Concrete interpretation and the symbolic primitives execute/implies.

#include "prooforge/semantics.hpp"
#include "prooforge/solver.hpp"

#include <ostream>

namespace prooforge {

/// Result of matching a rule's left side against a configuration.
struct RuleMatch {
  std::size_t rule;
  Subst subst;
};

/// Matches the partial bag `lhs` cell by cell against `config`.
inline std::optional<Subst> match_rule(const Rule& r, const Term& config) {
  Subst s;
  for (const auto& c : r.lhs.args()) {
    const Term* target = config.find_cell(c.name());
    if (!target || !match_extend(c.body(), target->body(), s)) return std::nullopt;
  }
  return s;
}

inline Term apply_rule(const Semantics& sem, const Rule& r, const Subst& s, const Term& config) {
  Term out = config;
  for (const auto& c : r.rhs.args()) out = out.with_cell(c.name(), sem.instantiate(c.body(), s));
  return out;
}

inline std::string k_head(const Term& config) {
  const Term* k = config.find_cell("k");
  if (!k) return "";
  const Term& b = k->body();
  const Term& h = b.is_app(ops::kseq) ? b.args()[0] : b;
  if (h.is_app()) return h.name();
  return to_string(h);
}

struct ConcreteStep {
  Term config;
  std::string rule;
};

/// Applies the first matching rule (priority, then declaration order)
/// whose guard evaluates to true.
inline std::optional<ConcreteStep> step_concrete(const Semantics& sem, const Term& config) {
  for (std::size_t idx : sem.candidates(config)) {
    const Rule& r = sem.rules[idx];
    auto s = match_rule(r, config);
    if (!s) continue;
    if (!r.guard.is_true()) {
      Term g = sem.instantiate(r.guard.to_term(), *s);
      if (!g.is_bool())
        throw SemanticsError("guard of rule " + r.name + " does not evaluate: " + to_string(g));
      if (!g.flag()) continue;
    }
    return ConcreteStep{apply_rule(sem, r, *s, config), r.name};
  }
  return std::nullopt;
}

enum class RunStatus { Stuck, FuelExhausted };

struct RunResult {
  Term final;
  std::size_t steps = 0;
  RunStatus status = RunStatus::Stuck;
};

/// One line per applied rule: step index, rule name, k-cell head.
using TraceSink = std::ostream*;

inline RunResult run_concrete(const Semantics& sem, const Term& config, std::size_t fuel,
                              TraceSink trace = nullptr) {
  if (fuel == 0) throw std::invalid_argument("fuel must be positive");
  RunResult out{config, 0, RunStatus::Stuck};
  while (true) {
    if (out.steps == fuel) {
      out.status = RunStatus::FuelExhausted;
      return out;
    }
    auto next = step_concrete(sem, out.final);
    if (!next) return out;
    if (trace) *trace << out.steps << ' ' << next->rule << ' ' << k_head(out.final) << '\n';
    out.final = std::move(next->config);
    ++out.steps;
  }
}

// ---------------------------------------------------------------------------
// Symbolic execution

struct StepResult {
  CTerm next;
  std::vector<CSubst> branches;
  std::size_t applied = 0;
  std::vector<std::string> rules;  // applied rule names, in order
};

struct ExecOptions {
  /// k-cell heads where execution pauses after at least one step.
  std::set<std::string> cut;
  SolverOptions solver;
};

namespace exec_detail {
inline bool feasible(const Constraint& c, const SolverOptions& opt) {
  if (c.is_false()) return false;
  return is_sat(c, opt).status != SatStatus::Unsat;
}

struct Choice {
  std::size_t rule;
  Subst subst;
  Constraint effective;  // own guard and negations of earlier guards
};

/// Outcome of one symbolic step: a deterministic successor, a branch
/// point, or stuck.
struct Decision {
  enum class Kind { Step, Branch, Stuck } kind = Kind::Stuck;
  std::optional<Choice> step;
  std::vector<Constraint> arms;
};

inline Decision decide(const Semantics& sem, const CTerm& t, const SolverOptions& opt) {
  auto norm = sem.normalizer();
  std::vector<Choice> feasible_rules;
  Constraint none_before;  // no earlier rule applies
  bool none_before_feasible = true;
  for (std::size_t idx : sem.candidates(t.config)) {
    const Rule& r = sem.rules[idx];
    auto s = match_rule(r, t.config);
    if (!s) continue;
    Constraint g = Constraint::of(sem.instantiate(r.guard.to_term(), *s)).normalized(norm);
    Constraint eff = none_before.conj(g);
    if (feasible(t.constraint.conj(eff), opt)) feasible_rules.push_back({idx, *s, eff});
    if (g.is_true()) {
      none_before_feasible = false;
      break;
    }
    none_before = none_before.conj(Constraint::of(g.negated_term()));
    none_before_feasible = feasible(t.constraint.conj(none_before), opt);
    if (!none_before_feasible) break;
  }
  Decision d;
  if (feasible_rules.empty()) return d;
  if (feasible_rules.size() == 1 && entails(t.constraint, feasible_rules[0].effective, opt).yes()) {
    d.kind = Decision::Kind::Step;
    d.step = std::move(feasible_rules[0]);
    return d;
  }
  d.kind = Decision::Kind::Branch;
  for (auto& c : feasible_rules) d.arms.push_back(c.effective);
  if (none_before_feasible) d.arms.push_back(none_before);
  return d;
}
}  // namespace exec_detail

/// Symbolic rewriting for up to `n` rules. Stops at a branch point with
/// one CSubst per feasible arm (a stuck arm included when no rule may
/// apply), at a cut point, or when no rule applies.
inline StepResult execute(const Semantics& sem, const CTerm& t, std::size_t n, const ExecOptions& opt = {}) {
  if (n == 0) throw std::invalid_argument("execute: n must be positive");
  if (!exec_detail::feasible(t.constraint, opt.solver))
    throw std::invalid_argument("execute: unsatisfiable input constraint");
  StepResult out{t, {}, 0, {}};
  while (out.applied < n) {
    if (out.applied > 0 && opt.cut.count(k_head(out.next.config))) break;
    auto d = exec_detail::decide(sem, out.next, opt.solver);
    if (d.kind == exec_detail::Decision::Kind::Stuck) break;
    if (d.kind == exec_detail::Decision::Kind::Branch) {
      for (auto& a : d.arms) out.branches.push_back(CSubst{{}, std::move(a)});
      break;
    }
    const Rule& r = sem.rules[d.step->rule];
    out.next.config = apply_rule(sem, r, d.step->subst, out.next.config);
    out.rules.push_back(r.name);
    ++out.applied;
  }
  return out;
}

/// Subsumption: returns α with α(t2) = t1 when t2's pattern matches t1
/// and t1's constraint entails the instantiated constraint of t2.
/// Variables in `rigid` only match themselves.
inline std::optional<CSubst> implies(const CTerm& t1, const CTerm& t2, const Normalizer& norm = builtin_normal,
                                     const SolverOptions& opt = {}, const std::set<std::string>* rigid = nullptr) {
  if (t1.config.sort() != t2.config.sort()) return std::nullopt;
  auto s = match(t2.config, t1.config, rigid);
  if (!s) return std::nullopt;
  Constraint c2 = t2.constraint.substitute(*s, norm);
  if (!entails(t1.constraint, c2, opt).yes()) return std::nullopt;
  return CSubst{std::move(*s), t1.constraint.minus(c2)};
}

}  // namespace prooforge
