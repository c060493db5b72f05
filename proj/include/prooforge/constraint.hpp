#pragma once

// Path constraints in negation normal form, constrained terms and
// constrained substitutions.

#include "prooforge/builtins.hpp"
#include "prooforge/term.hpp"

#include <algorithm>
#include <functional>
#include <vector>

namespace prooforge {

/// Rewrites a term to normal form (builtins, and user functions when a
/// semantics provides them).
using Normalizer = std::function<Term(const Term&)>;

inline Term builtin_normal(const Term& t) { return reduce_builtins(t); }

/// Pushes negation to the atoms: and/or/not only above atoms, negated
/// comparisons flipped, other negated atoms kept as `notBool a`.
inline Term nnf(const Term& b, bool negate = false) {
  if (b.is_bool()) return Term::boolean(b.flag() != negate);
  if (b.is_app(ops::bnot)) return nnf(b.args()[0], !negate);
  if (b.is_app(ops::band) || b.is_app(ops::bor)) {
    bool is_and = b.is_app(ops::band) != negate;
    Term l = nnf(b.args()[0], negate);
    Term r = nnf(b.args()[1], negate);
    return reduce_builtin(bool_op(is_and ? ops::band : ops::bor, {l, r}));
  }
  if (b.is_app() && (is_cmp_op(b.name()) || b.name() == ops::keq || b.name() == ops::kne)) {
    Term atom = negate ? bool_op(negate_cmp(b.name()), b.args()) : b;
    return reduce_builtin(atom);
  }
  return negate ? bool_op(ops::bnot, {b}) : b;
}

class Constraint {
 public:
  Constraint() = default;

  static Constraint top() { return {}; }
  static Constraint bottom() {
    Constraint c;
    c.atoms_.push_back(Term::boolean(false));
    return c;
  }
  /// Normalizes a Bool term into a constraint.
  static Constraint of(const Term& b) {
    Constraint c;
    c.add_flat(nnf(reduce_builtins(b)));
    c.canonicalize();
    return c;
  }
  static Constraint of_conjuncts(const std::vector<Term>& atoms) {
    Constraint c;
    for (const auto& a : atoms) c.add_flat(nnf(reduce_builtins(a)));
    c.canonicalize();
    return c;
  }

  const std::vector<Term>& conjuncts() const { return atoms_; }
  bool is_true() const { return atoms_.empty(); }
  bool is_false() const { return atoms_.size() == 1 && atoms_[0].is_bool() && !atoms_[0].flag(); }
  bool contains(const Term& atom) const {
    return std::binary_search(atoms_.begin(), atoms_.end(), atom);
  }

  Constraint conj(const Constraint& o) const {
    Constraint c = *this;
    for (const auto& a : o.atoms_) c.add_flat(a);
    c.canonicalize();
    return c;
  }
  Constraint conj(const Term& b) const { return conj(Constraint::of(b)); }

  /// Conjunction as a single Bool term (`true` when empty).
  Term to_term() const {
    if (atoms_.empty()) return Term::boolean(true);
    Term acc = atoms_.front();
    for (std::size_t i = 1; i < atoms_.size(); ++i) acc = bool_op(ops::band, {acc, atoms_[i]});
    return acc;
  }
  /// Negation as a single NNF Bool term.
  Term negated_term() const { return nnf(to_term(), true); }

  Constraint substitute(const Subst& s, const Normalizer& norm = builtin_normal) const {
    if (s.empty()) return *this;
    Constraint c;
    for (const auto& a : atoms_) c.add_flat(nnf(norm(apply_subst(s, a))));
    c.canonicalize();
    return c;
  }
  Constraint normalized(const Normalizer& norm) const {
    Constraint c;
    for (const auto& a : atoms_) c.add_flat(nnf(norm(a)));
    c.canonicalize();
    return c;
  }

  /// Conjuncts not present in `o`.
  Constraint minus(const Constraint& o) const {
    Constraint c;
    for (const auto& a : atoms_)
      if (!o.contains(a)) c.atoms_.push_back(a);
    return c;
  }
  std::set<std::string> free_vars() const {
    std::set<std::string> out;
    for (const auto& a : atoms_)
      for (auto& v : prooforge::free_vars(a)) out.insert(v);
    return out;
  }

  friend bool operator==(const Constraint&, const Constraint&) = default;

 private:
  void add_flat(const Term& b) {
    if (b.is_app(ops::band)) {
      add_flat(b.args()[0]);
      add_flat(b.args()[1]);
      return;
    }
    if (b.is_bool() && b.flag()) return;
    atoms_.push_back(b);
  }
  void canonicalize();

  std::vector<Term> atoms_;
};

namespace detail {
/// Single-atom bounds: returns false when the atoms on one linear atom
/// (e.g. `X ==Int 1` and `X ==Int 2`) are contradictory.
inline bool single_atom_consistent(const std::vector<Term>& atoms) {
  struct Box {
    std::optional<BigInt> lo, hi;
    std::vector<BigInt> excluded;
  };
  std::map<Term, Box> boxes;
  for (const auto& a : atoms) {
    if (!a.is_app() || !is_cmp_op(a.name())) continue;
    Linear l = linearize(a.args()[0]);
    if (l.coeffs.size() != 1 || !a.args()[1].is_int()) continue;
    const auto& [atom, coeff] = *l.coeffs.begin();
    if (coeff != 1) continue;
    BigInt k = a.args()[1].value() - l.constant;
    Box& b = boxes[atom];
    auto lower = [&](const BigInt& v) { if (!b.lo || v > *b.lo) b.lo = v; };
    auto upper = [&](const BigInt& v) { if (!b.hi || v < *b.hi) b.hi = v; };
    const auto& op = a.name();
    if (op == ops::lt) upper(k - 1);
    else if (op == ops::le) upper(k);
    else if (op == ops::gt) lower(k + 1);
    else if (op == ops::ge) lower(k);
    else if (op == ops::eq) { lower(k); upper(k); }
    else b.excluded.push_back(k);
  }
  for (auto& [_, b] : boxes) {
    if (b.lo && b.hi && *b.lo > *b.hi) return false;
    if (b.lo && b.hi && *b.lo == *b.hi &&
        std::find(b.excluded.begin(), b.excluded.end(), *b.lo) != b.excluded.end())
      return false;
  }
  return true;
}
}  // namespace detail

inline void Constraint::canonicalize() {
  for (const auto& a : atoms_)
    if (a.is_bool() && !a.flag()) {
      *this = bottom();
      return;
    }
  std::sort(atoms_.begin(), atoms_.end());
  atoms_.erase(std::unique(atoms_.begin(), atoms_.end()), atoms_.end());
  for (const auto& a : atoms_) {
    Term neg = nnf(a, true);
    if (std::binary_search(atoms_.begin(), atoms_.end(), neg)) {
      *this = bottom();
      return;
    }
  }
  if (!detail::single_atom_consistent(atoms_)) *this = bottom();
}

/// Evaluates ground atoms, drops duplicates and `true`, and collapses
/// contradictory conjunctions to `false`.
inline Constraint simplify(const Constraint& c, const Normalizer& norm = builtin_normal) {
  return c.normalized(norm);
}

/// Atoms present (after normalization) in both constraints.
inline Constraint common_constraints(const Constraint& a, const Constraint& b) {
  std::vector<Term> both;
  std::set_intersection(a.conjuncts().begin(), a.conjuncts().end(), b.conjuncts().begin(),
                        b.conjuncts().end(), std::back_inserter(both));
  return Constraint::of_conjuncts(both);
}

struct CTerm {
  Term config;
  Constraint constraint;

  friend bool operator==(const CTerm&, const CTerm&) = default;
};

struct CSubst {
  Subst subst;
  Constraint constraint;

  friend bool operator==(const CSubst&, const CSubst&) = default;
};

/// (αs, αc)(φ ∧ C) = αs(φ) ∧ αs(C) ∧ αc, renormalized.
inline CTerm csubst_apply(const CSubst& a, const CTerm& t, const Normalizer& norm = builtin_normal) {
  Term cfg = a.subst.empty() ? t.config : norm(apply_subst(a.subst, t.config));
  Constraint c = t.constraint.substitute(a.subst, norm).conj(a.constraint);
  return {cfg, c};
}

/// Composition: applying the result equals applying `first` then `second`.
inline CSubst compose(const CSubst& first, const CSubst& second,
                      const Normalizer& norm = builtin_normal) {
  CSubst out;
  for (const auto& [v, t] : first.subst) out.subst.set(v, norm(apply_subst(second.subst, t)));
  for (const auto& [v, t] : second.subst)
    if (!first.subst.find(v)) out.subst.set(v, t);
  out.constraint = first.constraint.substitute(second.subst, norm).conj(second.constraint);
  return out;
}

}  // namespace prooforge
