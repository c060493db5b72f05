#pragma once

// Builtin operators over Int, Bool and K, with a canonical form for linear
// integer arithmetic so that structurally equal terms mean equal values.

#include "prooforge/term.hpp"

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace prooforge {

namespace ops {
inline constexpr std::string_view kseq = "~>";
inline constexpr std::string_view kdot = ".K";
inline constexpr std::string_view add = "+Int";
inline constexpr std::string_view sub = "-Int";
inline constexpr std::string_view mul = "*Int";
inline constexpr std::string_view div = "/Int";
inline constexpr std::string_view mod = "%Int";
inline constexpr std::string_view lt = "<Int";
inline constexpr std::string_view le = "<=Int";
inline constexpr std::string_view gt = ">Int";
inline constexpr std::string_view ge = ">=Int";
inline constexpr std::string_view eq = "==Int";
inline constexpr std::string_view ne = "=/=Int";
inline constexpr std::string_view keq = "==K";
inline constexpr std::string_view kne = "=/=K";
inline constexpr std::string_view band = "andBool";
inline constexpr std::string_view bor = "orBool";
inline constexpr std::string_view bnot = "notBool";
}  // namespace ops

inline bool is_arith_op(std::string_view c) {
  return c == ops::add || c == ops::sub || c == ops::mul || c == ops::div || c == ops::mod;
}
inline bool is_cmp_op(std::string_view c) {
  return c == ops::lt || c == ops::le || c == ops::gt || c == ops::ge || c == ops::eq ||
         c == ops::ne;
}
inline bool is_bool_op(std::string_view c) {
  return c == ops::band || c == ops::bor || c == ops::bnot;
}
inline bool is_builtin_op(std::string_view c) {
  return is_arith_op(c) || is_cmp_op(c) || is_bool_op(c) || c == ops::keq || c == ops::kne ||
         c == ops::kseq || c == ops::kdot;
}

/// Comparison with swapped operands: a op b  <=>  b flip(op) a.
inline std::string_view flip_cmp(std::string_view op) {
  if (op == ops::lt) return ops::gt;
  if (op == ops::gt) return ops::lt;
  if (op == ops::le) return ops::ge;
  if (op == ops::ge) return ops::le;
  return op;
}
/// Logical negation of a comparison.
inline std::string_view negate_cmp(std::string_view op) {
  if (op == ops::lt) return ops::ge;
  if (op == ops::ge) return ops::lt;
  if (op == ops::gt) return ops::le;
  if (op == ops::le) return ops::gt;
  if (op == ops::eq) return ops::ne;
  if (op == ops::ne) return ops::eq;
  if (op == ops::keq) return ops::kne;
  if (op == ops::kne) return ops::keq;
  return op;
}

inline bool cmp_holds(std::string_view op, const BigInt& a, const BigInt& b) {
  if (op == ops::lt) return a < b;
  if (op == ops::le) return a <= b;
  if (op == ops::gt) return a > b;
  if (op == ops::ge) return a >= b;
  if (op == ops::eq) return a == b;
  return a != b;
}

inline Term kdot() {
  static const Term t = Term::app(std::string(ops::kdot), {}, Sort::k());
  return t;
}
inline Term kseq(Term head, Term rest) {
  return Term::app(std::string(ops::kseq), {std::move(head), std::move(rest)}, Sort::k());
}
inline Term int_op(std::string_view op, Term a, Term b) {
  return Term::app(std::string(op), {std::move(a), std::move(b)}, Sort::integer());
}
inline Term bool_op(std::string_view op, std::vector<Term> args) {
  return Term::app(std::string(op), std::move(args), Sort::boolean());
}

// ---------------------------------------------------------------------------
// Linear forms

/// sum(coeff * atom) + constant, over opaque Int-sorted atoms.
struct Linear {
  std::map<Term, BigInt> coeffs;
  BigInt constant = 0;

  bool is_constant() const { return coeffs.empty(); }

  void add(const Linear& o, const BigInt& scale = 1) {
    constant += o.constant * scale;
    for (const auto& [a, c] : o.coeffs) {
      auto& slot = coeffs[a];
      slot += c * scale;
      if (slot == 0) coeffs.erase(a);
    }
  }
  void scale(const BigInt& s) {
    if (s == 0) {
      coeffs.clear();
      constant = 0;
      return;
    }
    constant *= s;
    for (auto& [_, c] : coeffs) c *= s;
  }
  friend bool operator==(const Linear&, const Linear&) = default;
};

inline Linear linearize(const Term& t) {
  Linear out;
  if (t.is_int()) {
    out.constant = t.value();
    return out;
  }
  if (t.is_app() && t.args().size() == 2) {
    const auto& c = t.name();
    if (c == ops::add || c == ops::sub) {
      out = linearize(t.args()[0]);
      out.add(linearize(t.args()[1]), c == ops::add ? 1 : -1);
      return out;
    }
    if (c == ops::mul) {
      Linear l = linearize(t.args()[0]);
      Linear r = linearize(t.args()[1]);
      if (l.is_constant()) {
        r.scale(l.constant);
        return r;
      }
      if (r.is_constant()) {
        l.scale(r.constant);
        return l;
      }
    }
  }
  out.coeffs.emplace(t, 1);
  return out;
}

/// Canonical rendering: atoms in term order, constant last.
inline Term render(const Linear& l) {
  std::optional<Term> acc;
  for (const auto& [atom, c] : l.coeffs) {
    BigInt mag = c < 0 ? BigInt(-c) : c;
    if (!acc) {
      acc = c == 1 ? atom : int_op(ops::mul, Term::integer(c), atom);
      continue;
    }
    Term piece = mag == 1 ? atom : int_op(ops::mul, Term::integer(mag), atom);
    acc = int_op(c > 0 ? ops::add : ops::sub, *acc, piece);
  }
  if (!acc) return Term::integer(l.constant);
  if (l.constant > 0) return int_op(ops::add, *acc, Term::integer(l.constant));
  if (l.constant < 0) return int_op(ops::sub, *acc, Term::integer(BigInt(-l.constant)));
  return *acc;
}

/// Canonical comparison `P op k` with P's leading coefficient positive.
inline Term make_cmp(std::string_view op, const Term& a, const Term& b) {
  Linear d = linearize(a);
  d.add(linearize(b), -1);
  if (d.is_constant()) return Term::boolean(cmp_holds(op, d.constant, BigInt(0)));
  BigInt k = -d.constant;
  d.constant = 0;
  std::string_view o = op;
  if (d.coeffs.begin()->second < 0) {
    d.scale(-1);
    k = -k;
    o = flip_cmp(o);
  }
  return bool_op(o, {render(d), Term::integer(k)});
}

// ---------------------------------------------------------------------------
// Syntactic equality decisions for ==K

enum class Tri { False, True, Unknown };

/// `functions` names user function symbols, whose applications are opaque.
inline bool is_data(const Term& t, const std::set<std::string>* functions) {
  if (t.is_int() || t.is_bool()) return true;
  if (!t.is_app()) return false;
  if (is_arith_op(t.name()) || is_cmp_op(t.name()) || is_bool_op(t.name()) ||
      t.name() == ops::keq || t.name() == ops::kne)
    return false;
  return !(functions && functions->count(t.name()));
}

inline Tri decide_eq(const Term& a, const Term& b, const std::set<std::string>* functions) {
  if (a == b) return Tri::True;
  if (a.sort() == Sort::integer() && b.sort() == Sort::integer()) {
    Linear d = linearize(a);
    d.add(linearize(b), -1);
    if (d.is_constant()) return d.constant == 0 ? Tri::True : Tri::False;
    return Tri::Unknown;
  }
  if (!is_data(a, functions) || !is_data(b, functions)) return Tri::Unknown;
  if (a.kind() != b.kind()) return Tri::False;
  if (a.is_int()) return a.value() == b.value() ? Tri::True : Tri::False;
  if (a.is_bool()) return a.flag() == b.flag() ? Tri::True : Tri::False;
  if (a.name() != b.name() || a.args().size() != b.args().size()) return Tri::False;
  Tri acc = Tri::True;
  for (std::size_t i = 0; i < a.args().size(); ++i) {
    Tri r = decide_eq(a.args()[i], b.args()[i], functions);
    if (r == Tri::False) return Tri::False;
    if (r == Tri::Unknown) acc = Tri::Unknown;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Reduction of one builtin application whose arguments are already reduced.

inline Term reduce_builtin(const Term& t, const std::set<std::string>* functions = nullptr) {
  if (!t.is_app()) return t;
  const std::string& c = t.name();
  const auto& a = t.args();
  if (c == ops::add || c == ops::sub) return render(linearize(t));
  if (c == ops::mul) {
    if (linearize(a[0]).is_constant() || linearize(a[1]).is_constant()) return render(linearize(t));
    return t;
  }
  if (c == ops::div || c == ops::mod) {
    if (a[0].is_int() && a[1].is_int() && a[1].value() != 0) {
      // Truncating division, as in C++ and EVM SDIV/SMOD.
      return Term::integer(c == ops::div ? BigInt(a[0].value() / a[1].value())
                                         : BigInt(a[0].value() % a[1].value()));
    }
    return t;
  }
  if (is_cmp_op(c)) return make_cmp(c, a[0], a[1]);
  if (c == ops::keq || c == ops::kne) {
    if (a[0].sort() == Sort::integer() && a[1].sort() == Sort::integer())
      return make_cmp(c == ops::keq ? ops::eq : ops::ne, a[0], a[1]);
    Tri r = decide_eq(a[0], a[1], functions);
    if (r == Tri::Unknown) return t;
    return Term::boolean((r == Tri::True) == (c == ops::keq));
  }
  if (c == ops::bnot) {
    const Term& x = a[0];
    if (x.is_bool()) return Term::boolean(!x.flag());
    if (x.is_app(ops::bnot)) return x.args()[0];
    if (x.is_app() && (is_cmp_op(x.name()) || x.name() == ops::keq || x.name() == ops::kne))
      return reduce_builtin(bool_op(negate_cmp(x.name()), x.args()), functions);
    return t;
  }
  if (c == ops::band || c == ops::bor) {
    bool is_and = c == ops::band;
    for (const auto& x : a)
      if (x.is_bool() && x.flag() != is_and) return Term::boolean(!is_and);
    if (a[0].is_bool()) return a[1];
    if (a[1].is_bool()) return a[0];
    if (a[0] == a[1]) return a[0];
    return t;
  }
  return t;
}

/// Bottom-up builtin reduction of a whole term.
inline Term reduce_builtins(const Term& t, const std::set<std::string>* functions = nullptr) {
  if (t.is_var() || t.is_int() || t.is_bool()) return t;
  std::vector<Term> args;
  args.reserve(t.args().size());
  bool changed = false;
  for (const auto& x : t.args()) {
    args.push_back(reduce_builtins(x, functions));
    changed = changed || !args.back().same_node(x);
  }
  if (t.is_cell()) return changed ? Term::cell(t.name(), std::move(args[0])) : t;
  if (t.is_bag()) return changed ? Term::bag(std::move(args)) : t;
  Term rebuilt = changed ? Term::app(t.name(), std::move(args), t.sort()) : t;
  if (!is_builtin_op(rebuilt.name())) return rebuilt;
  return reduce_builtin(rebuilt, functions);
}

}  // namespace prooforge
