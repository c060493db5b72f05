#pragma once

// Decision procedure for the constraint fragment: linear integer
// comparisons over opaque atoms, boolean atoms and constructor equalities.
//
// sat answers always carry a checked witness; unsat answers come from
// propagation, exhaustive enumeration of a finite box, or rational
// Fourier-Motzkin elimination. Anything else is unknown.

#include "prooforge/constraint.hpp"

#include <numeric>

namespace prooforge {

enum class SatStatus { Sat, Unsat, Unknown };

struct SatResult {
  SatStatus status = SatStatus::Unknown;
  /// Atom (variable or opaque term) to literal value.
  std::map<Term, Term> witness;

  bool sat() const { return status == SatStatus::Sat; }
  bool unsat() const { return status == SatStatus::Unsat; }
};

struct SolverOptions {
  std::uint64_t enumeration_limit = 1u << 20;
  std::uint64_t search_budget = 200000;
  std::size_t branch_limit = 4096;
  std::int64_t sample_radius = 65536;
  std::size_t fm_limit = 400;
  const std::set<std::string>* functions = nullptr;
};

namespace solver_detail {

enum class Rel { Le, Eq, Ne };  // lhs rel 0

struct LinCon {
  Linear lhs;
  Rel rel;
};

inline std::optional<LinCon> to_lincon(const Term& atom) {
  if (!atom.is_app() || !is_cmp_op(atom.name())) return std::nullopt;
  Linear d = linearize(atom.args()[0]);
  d.add(linearize(atom.args()[1]), -1);
  const auto& op = atom.name();
  if (op == ops::lt) {
    d.constant += 1;
    return LinCon{d, Rel::Le};
  }
  if (op == ops::le) return LinCon{d, Rel::Le};
  if (op == ops::gt) {
    d.scale(-1);
    d.constant += 1;
    return LinCon{d, Rel::Le};
  }
  if (op == ops::ge) {
    d.scale(-1);
    return LinCon{d, Rel::Le};
  }
  return LinCon{d, op == ops::eq ? Rel::Eq : Rel::Ne};
}

inline bool holds(const LinCon& c, const std::map<Term, BigInt>& val) {
  BigInt s = c.lhs.constant;
  for (const auto& [a, k] : c.lhs.coeffs) s += k * val.at(a);
  switch (c.rel) {
    case Rel::Le: return s <= 0;
    case Rel::Eq: return s == 0;
    default: return s != 0;
  }
}

inline BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) q -= 1;
  return q;
}
inline BigInt ceil_div(const BigInt& a, const BigInt& b) { return -floor_div(-a, b); }

struct Interval {
  std::optional<BigInt> lo, hi;
  bool empty() const { return lo && hi && *lo > *hi; }
};

class Branch {
 public:
  Branch(const SolverOptions& opt) : opt_(opt) {}

  SatResult solve(std::vector<Term> literals);

 private:
  bool unify(const Term& a, const Term& b);
  bool propagate();
  SatResult finish_sat(const std::map<Term, BigInt>& values);
  std::optional<std::map<Term, BigInt>> search(const std::vector<Term>& atoms,
                                               const std::vector<std::vector<BigInt>>& domains,
                                               std::uint64_t budget, bool& exhausted);
  bool fourier_motzkin_infeasible() const;

  const SolverOptions& opt_;
  Subst theta_;
  bool imprecise_ = false;
  std::map<Term, bool> bools_;
  std::vector<LinCon> original_;
  std::vector<LinCon> cons_;
  std::vector<std::pair<Term, Linear>> eliminated_;
  std::map<Term, Interval> box_;
};

inline bool Branch::unify(const Term& a0, const Term& b0) {
  std::vector<std::pair<Term, Term>> work{{a0, b0}};
  while (!work.empty()) {
    auto [a, b] = work.back();
    work.pop_back();
    a = apply_subst(theta_, a);
    b = apply_subst(theta_, b);
    if (a == b) continue;
    if (a.sort() == Sort::integer() && b.sort() == Sort::integer()) {
      Linear d = linearize(a);
      d.add(linearize(b), -1);
      cons_.push_back({d, Rel::Eq});
      original_.push_back(cons_.back());
      continue;
    }
    if (!a.is_var() && b.is_var()) std::swap(a, b);
    if (a.is_var()) {
      if (free_vars(b).count(a.name())) return false;
      if (!sort_leq(b.sort(), a.sort())) {
        imprecise_ = true;
        continue;
      }
      Subst one;
      one.set(a.name(), b);
      for (auto& [v, t] : theta_.bindings()) theta_.set(v, apply_subst(one, t));
      theta_.set(a.name(), b);
      continue;
    }
    if (!is_data(a, opt_.functions) || !is_data(b, opt_.functions)) {
      imprecise_ = true;
      continue;
    }
    Tri r = decide_eq(a, b, opt_.functions);
    if (r == Tri::False && (a.kind() != b.kind() || a.name() != b.name() ||
                            a.args().size() != b.args().size() || a.is_int() || a.is_bool()))
      return false;
    for (std::size_t i = 0; i < a.args().size(); ++i) work.emplace_back(a.args()[i], b.args()[i]);
  }
  return true;
}

inline bool Branch::propagate() {
  for (const auto& c : cons_)
    for (const auto& [a, _] : c.lhs.coeffs) box_.try_emplace(a);
  for (int round = 0; round < 64; ++round) {
    bool changed = false;
    for (const auto& c : cons_) {
      if (c.rel == Rel::Ne) continue;
      // For Eq use both lhs <= 0 and -lhs <= 0.
      for (int side = 0; side < (c.rel == Rel::Eq ? 2 : 1); ++side) {
        Linear l = c.lhs;
        if (side == 1) l.scale(-1);
        for (const auto& [x, cx] : l.coeffs) {
          // cx*x <= -const - sum_{others} min(c_i*x_i)
          BigInt rhs = -l.constant;
          bool finite = true;
          for (const auto& [y, cy] : l.coeffs) {
            if (y == x) continue;
            const Interval& iy = box_[y];
            const auto& bound = cy > 0 ? iy.lo : iy.hi;
            if (!bound) {
              finite = false;
              break;
            }
            rhs -= cy * *bound;
          }
          if (!finite) continue;
          Interval& ix = box_[x];
          if (cx > 0) {
            BigInt ub = floor_div(rhs, cx);
            if (!ix.hi || ub < *ix.hi) {
              ix.hi = ub;
              changed = true;
            }
          } else {
            BigInt lb = ceil_div(rhs, cx);
            if (!ix.lo || lb > *ix.lo) {
              ix.lo = lb;
              changed = true;
            }
          }
          if (ix.empty()) return false;
        }
      }
    }
    if (!changed) break;
  }
  return true;
}

inline std::optional<std::map<Term, BigInt>> Branch::search(
    const std::vector<Term>& atoms, const std::vector<std::vector<BigInt>>& domains,
    std::uint64_t budget, bool& exhausted) {
  // Constraint i is checked once its last atom (in `atoms` order) is set.
  std::map<Term, std::size_t> index;
  for (std::size_t i = 0; i < atoms.size(); ++i) index[atoms[i]] = i;
  std::vector<std::vector<const LinCon*>> due(atoms.size() + 1);
  for (const auto& c : cons_) {
    std::size_t last = 0;
    for (const auto& [a, _] : c.lhs.coeffs) last = std::max(last, index.at(a) + 1);
    due[last].push_back(&c);
  }
  for (const auto* c : due[0])
    if (!holds(*c, {})) return std::nullopt;
  std::map<Term, BigInt> val;
  std::uint64_t steps = 0;
  exhausted = true;
  std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
    if (i == atoms.size()) return true;
    for (const auto& v : domains[i]) {
      if (++steps > budget) {
        exhausted = false;
        return false;
      }
      val[atoms[i]] = v;
      bool ok = true;
      for (const auto* c : due[i + 1])
        if (!holds(*c, val)) {
          ok = false;
          break;
        }
      if (ok && go(i + 1)) return true;
      if (!exhausted) return false;
    }
    val.erase(atoms[i]);
    return false;
  };
  if (go(0)) return val;
  return std::nullopt;
}

inline bool Branch::fourier_motzkin_infeasible() const {
  std::vector<Linear> rows;
  for (const auto& c : cons_) {
    if (c.rel == Rel::Ne) continue;
    rows.push_back(c.lhs);
    if (c.rel == Rel::Eq) {
      Linear n = c.lhs;
      n.scale(-1);
      rows.push_back(n);
    }
  }
  for (const auto& [a, iv] : box_) {
    if (iv.hi) {
      Linear l;
      l.coeffs[a] = 1;
      l.constant = -*iv.hi;
      rows.push_back(l);
    }
    if (iv.lo) {
      Linear l;
      l.coeffs[a] = -1;
      l.constant = *iv.lo;
      rows.push_back(l);
    }
  }
  auto infeasible_const = [](const Linear& l) { return l.is_constant() && l.constant > 0; };
  while (true) {
    for (const auto& r : rows)
      if (infeasible_const(r)) return true;
    std::optional<Term> pick;
    for (const auto& r : rows)
      if (!r.coeffs.empty()) {
        pick = r.coeffs.begin()->first;
        break;
      }
    if (!pick) return false;
    std::vector<Linear> pos, neg, rest;
    for (auto& r : rows) {
      auto it = r.coeffs.find(*pick);
      if (it == r.coeffs.end()) rest.push_back(r);
      else if (it->second > 0) pos.push_back(r);
      else neg.push_back(r);
    }
    if (rest.size() + pos.size() * neg.size() > opt_.fm_limit) return false;
    for (const auto& p : pos)
      for (const auto& n : neg) {
        BigInt a = p.coeffs.at(*pick), b = -n.coeffs.at(*pick);
        Linear comb = p;
        comb.scale(b);
        comb.add(n, a);
        comb.coeffs.erase(*pick);
        BigInt g = 0;
        for (auto& [_, c] : comb.coeffs) g = boost::multiprecision::gcd(g, BigInt(abs(c)));
        if (g > 1) {
          for (auto& [_, c] : comb.coeffs) c /= g;
          comb.constant = ceil_div(comb.constant, g);
        }
        rest.push_back(comb);
      }
    rows = std::move(rest);
  }
}

inline SatResult Branch::finish_sat(const std::map<Term, BigInt>& values) {
  std::map<Term, BigInt> all = values;
  for (auto it = eliminated_.rbegin(); it != eliminated_.rend(); ++it) {
    BigInt s = it->second.constant;
    for (const auto& [a, k] : it->second.coeffs) {
      auto found = all.find(a);
      s += k * (found == all.end() ? BigInt(0) : found->second);
      if (found == all.end()) all[a] = 0;
    }
    all[it->first] = s;
  }
  for (const auto& c : original_) {
    for (const auto& [a, _] : c.lhs.coeffs) all.try_emplace(a, 0);
    if (!holds(c, all)) return {SatStatus::Unknown, {}};
  }
  SatResult r;
  r.status = imprecise_ ? SatStatus::Unknown : SatStatus::Sat;
  for (const auto& [a, v] : all) r.witness[a] = Term::integer(v);
  for (const auto& [a, v] : bools_) r.witness[a] = Term::boolean(v);
  for (const auto& [v, t] : theta_) {
    Term g = map_vars(t, [&](const Term& x) {
      auto it = r.witness.find(x);
      return it == r.witness.end() ? x : it->second;
    });
    r.witness[Term::var(v, t.sort())] = reduce_builtins(g, opt_.functions);
  }
  return r;
}

inline SatResult Branch::solve(std::vector<Term> literals) {
  // Constructor equalities first; they may instantiate other literals.
  for (std::size_t round = 0; round < 8; ++round) {
    bool again = false;
    std::vector<Term> rest;
    for (const auto& lit : literals) {
      if (lit.is_app(ops::keq)) {
        if (!unify(lit.args()[0], lit.args()[1])) return {SatStatus::Unsat, {}};
        again = true;
      } else {
        rest.push_back(lit);
      }
    }
    literals.clear();
    for (const auto& lit : rest) {
      Term t = nnf(reduce_builtins(apply_subst(theta_, lit), opt_.functions));
      if (t.is_bool()) {
        if (!t.flag()) return {SatStatus::Unsat, {}};
        continue;
      }
      literals.push_back(t);
    }
    if (!again) break;
  }
  for (const auto& lit : literals) {
    if (lit.is_app(ops::bor) || lit.is_app(ops::band)) {
      imprecise_ = true;  // only reached past the branch limit
      continue;
    }
    if (auto lc = to_lincon(lit)) {
      cons_.push_back(*lc);
      original_.push_back(*lc);
      continue;
    }
    if (lit.is_app(ops::kne)) {
      Tri r = decide_eq(lit.args()[0], lit.args()[1], opt_.functions);
      if (r == Tri::True) return {SatStatus::Unsat, {}};
      if (r == Tri::Unknown) imprecise_ = true;
      continue;
    }
    bool positive = !lit.is_app(ops::bnot);
    Term atom = positive ? lit : lit.args()[0];
    auto [it, inserted] = bools_.emplace(atom, positive);
    if (!inserted && it->second != positive) return {SatStatus::Unsat, {}};
  }

  // Eliminate equalities with a unit coefficient.
  for (bool progress = true; progress;) {
    progress = false;
    for (std::size_t i = 0; i < cons_.size(); ++i) {
      if (cons_[i].rel != Rel::Eq) continue;
      auto& l = cons_[i].lhs;
      auto unit = std::find_if(l.coeffs.begin(), l.coeffs.end(),
                               [](const auto& p) { return p.second == 1 || p.second == -1; });
      if (unit == l.coeffs.end()) continue;
      Term x = unit->first;
      BigInt cx = unit->second;
      Linear expr = l;
      expr.coeffs.erase(x);
      expr.scale(-cx);  // x = -(rest)/cx, cx = ±1
      cons_.erase(cons_.begin() + static_cast<std::ptrdiff_t>(i));
      for (auto& c : cons_) {
        auto f = c.lhs.coeffs.find(x);
        if (f == c.lhs.coeffs.end()) continue;
        BigInt k = f->second;
        c.lhs.coeffs.erase(f);
        c.lhs.add(expr, k);
      }
      eliminated_.emplace_back(x, expr);
      progress = true;
      break;
    }
  }
  for (const auto& c : cons_)
    if (c.lhs.is_constant() && !holds(c, {})) return {SatStatus::Unsat, {}};

  if (!propagate()) return {SatStatus::Unsat, {}};

  std::vector<Term> atoms;
  for (const auto& c : cons_)
    for (const auto& [a, _] : c.lhs.coeffs)
      if (std::find(atoms.begin(), atoms.end(), a) == atoms.end()) atoms.push_back(a);

  bool bounded = true;
  BigInt space = 1;
  for (const auto& a : atoms) {
    const Interval& iv = box_[a];
    if (!iv.lo || !iv.hi) {
      bounded = false;
      break;
    }
    space *= (*iv.hi - *iv.lo + 1);
    if (space > opt_.enumeration_limit) {
      bounded = false;
      break;
    }
  }
  if (bounded) {
    std::vector<std::vector<BigInt>> domains;
    for (const auto& a : atoms) {
      std::vector<BigInt> d;
      for (BigInt v = *box_[a].lo; v <= *box_[a].hi; ++v) d.push_back(v);
      domains.push_back(std::move(d));
    }
    bool exhausted = true;
    auto found = search(atoms, domains, opt_.enumeration_limit * 4, exhausted);
    if (found) return finish_sat(*found);
    if (exhausted) return {SatStatus::Unsat, {}};
  }

  // Candidate values: interval ends, small numbers, atom boundaries, samples.
  std::vector<std::vector<BigInt>> domains;
  for (const auto& a : atoms) {
    const Interval& iv = box_[a];
    std::vector<BigInt> cand;
    auto push = [&](const BigInt& v) {
      if (iv.lo && v < *iv.lo) return;
      if (iv.hi && v > *iv.hi) return;
      if (std::find(cand.begin(), cand.end(), v) == cand.end()) cand.push_back(v);
    };
    if (iv.lo) {
      push(*iv.lo);
      push(*iv.lo + 1);
    }
    if (iv.hi) {
      push(*iv.hi);
      push(*iv.hi - 1);
    }
    for (int v : {0, 1, -1}) push(v);
    for (const auto& c : cons_) {
      auto f = c.lhs.coeffs.find(a);
      if (f == c.lhs.coeffs.end()) continue;
      BigInt k = -c.lhs.constant;
      BigInt q = floor_div(k, f->second);
      push(q - 1);
      push(q);
      push(q + 1);
    }
    push(opt_.sample_radius);
    push(-opt_.sample_radius);
    domains.push_back(std::move(cand));
  }
  bool exhausted = true;
  if (auto found = search(atoms, domains, opt_.search_budget, exhausted)) return finish_sat(*found);

  if (fourier_motzkin_infeasible()) return {SatStatus::Unsat, {}};
  return {SatStatus::Unknown, {}};
}

inline void flatten_and(const Term& t, std::vector<Term>& out) {
  if (t.is_app(ops::band)) {
    flatten_and(t.args()[0], out);
    flatten_and(t.args()[1], out);
  } else if (!(t.is_bool() && t.flag())) {
    out.push_back(t);
  }
}
inline void flatten_or(const Term& t, std::vector<Term>& out) {
  if (t.is_app(ops::bor)) {
    flatten_or(t.args()[0], out);
    flatten_or(t.args()[1], out);
  } else {
    out.push_back(t);
  }
}

}  // namespace solver_detail

inline SatResult is_sat(const Constraint& c, const SolverOptions& opt = {}) {
  using namespace solver_detail;
  if (c.is_false()) return {SatStatus::Unsat, {}};
  std::vector<Term> fixed;
  std::vector<std::vector<Term>> choices;
  for (const auto& a : c.conjuncts()) {
    if (a.is_app(ops::bor)) {
      std::vector<Term> ds;
      flatten_or(a, ds);
      choices.push_back(std::move(ds));
    } else {
      fixed.push_back(a);
    }
  }
  bool any_unknown = false;
  std::size_t branches = 0;
  std::optional<SatResult> sat;
  std::vector<Term> current = fixed;
  std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
    if (i == choices.size()) {
      if (++branches > opt.branch_limit) {
        any_unknown = true;
        return true;
      }
      Branch b(opt);
      SatResult r = b.solve(current);
      if (r.sat()) {
        sat = std::move(r);
        return true;
      }
      if (!r.unsat()) any_unknown = true;
      return false;
    }
    const std::vector<Term> options = choices[i];
    for (const auto& d : options) {
      std::size_t mark = current.size();
      flatten_and(nnf(d), current);
      // Nested disjunctions inside a disjunct are expanded in place.
      std::vector<Term> nested;
      for (std::size_t k = mark; k < current.size();)
        if (current[k].is_app(ops::bor)) {
          nested.push_back(current[k]);
          current.erase(current.begin() + static_cast<std::ptrdiff_t>(k));
        } else {
          ++k;
        }
      bool stop;
      if (nested.empty()) {
        stop = go(i + 1);
      } else {
        auto saved = choices;
        for (const auto& n : nested) {
          std::vector<Term> ds;
          flatten_or(n, ds);
          choices.push_back(std::move(ds));
        }
        stop = go(i + 1);
        choices = std::move(saved);
      }
      current.resize(mark);
      if (stop) return true;
    }
    return false;
  };
  go(0);
  if (sat) return *sat;
  return {any_unknown ? SatStatus::Unknown : SatStatus::Unsat, {}};
}

enum class Entailment { Yes, No, Unknown };

struct EntailResult {
  Entailment status = Entailment::Unknown;
  std::map<Term, Term> counterexample;
  bool yes() const { return status == Entailment::Yes; }
};

/// c1 entails c2 iff c1 ∧ ¬c2 is unsat.
inline EntailResult entails(const Constraint& c1, const Constraint& c2,
                            const SolverOptions& opt = {}) {
  if (c1.is_false()) return {Entailment::Yes, {}};
  bool syntactic = std::all_of(c2.conjuncts().begin(), c2.conjuncts().end(),
                               [&](const Term& a) { return c1.contains(a); });
  if (syntactic) return {Entailment::Yes, {}};
  SatResult r = is_sat(c1.conj(c2.negated_term()), opt);
  if (r.unsat()) return {Entailment::Yes, {}};
  if (r.sat()) return {Entailment::No, std::move(r.witness)};
  return {Entailment::Unknown, {}};
}

}  // namespace prooforge
