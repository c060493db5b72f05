#pragma once

// Reference implementations used as test oracles. They share nothing with
// the library beyond the Term data type.

#include "prooforge/constraint.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using prooforge::Sort;
using prooforge::Term;
using Valuation = std::map<std::string, long long>;

/// Direct evaluation of an integer expression; nullopt outside + - *.
inline std::optional<long long> eval_int(const Term& t, const Valuation& val) {
  if (t.is_int()) return static_cast<long long>(t.value());
  if (t.is_var()) {
    auto it = val.find(t.name());
    if (it == val.end()) return std::nullopt;
    return it->second;
  }
  if (!t.is_app() || t.args().size() != 2) return std::nullopt;
  auto a = eval_int(t.args()[0], val);
  auto b = eval_int(t.args()[1], val);
  if (!a || !b) return std::nullopt;
  const std::string& op = t.name();
  if (op == "+Int") return *a + *b;
  if (op == "-Int") return *a - *b;
  if (op == "*Int") return *a * *b;
  return std::nullopt;
}

inline std::optional<bool> eval_bool(const Term& t, const Valuation& val) {
  if (t.is_bool()) return t.flag();
  if (!t.is_app()) return std::nullopt;
  const std::string& op = t.name();
  if (op == "notBool") {
    auto a = eval_bool(t.args()[0], val);
    if (!a) return std::nullopt;
    return !*a;
  }
  if (op == "andBool" || op == "orBool") {
    auto a = eval_bool(t.args()[0], val);
    auto b = eval_bool(t.args()[1], val);
    if (!a || !b) return std::nullopt;
    return op == "andBool" ? (*a && *b) : (*a || *b);
  }
  if (t.args().size() != 2) return std::nullopt;
  auto a = eval_int(t.args()[0], val);
  auto b = eval_int(t.args()[1], val);
  if (!a || !b) return std::nullopt;
  if (op == "<Int") return *a < *b;
  if (op == "<=Int") return *a <= *b;
  if (op == ">Int") return *a > *b;
  if (op == ">=Int") return *a >= *b;
  if (op == "==Int") return *a == *b;
  if (op == "=/=Int") return *a != *b;
  return std::nullopt;
}

/// Every valuation of `vars` over [lo, hi].
template <class F>
void for_each_valuation(const std::vector<std::string>& vars, long long lo, long long hi, F&& f) {
  Valuation v;
  for (const auto& x : vars) v[x] = lo;
  while (true) {
    f(v);
    std::size_t i = 0;
    for (; i < vars.size(); ++i) {
      if (v[vars[i]] < hi) {
        ++v[vars[i]];
        break;
      }
      v[vars[i]] = lo;
    }
    if (i == vars.size()) return;
  }
}

/// Entailment by enumeration over the box; valid because every generated
/// variable is bounded to the box by the caller's constraints.
inline bool brute_entails(const Term& c1, const Term& c2, const std::vector<std::string>& vars, long long lo,
                          long long hi) {
  bool ok = true;
  for_each_valuation(vars, lo, hi, [&](const Valuation& v) {
    if (!ok) return;
    if (eval_bool(c1, v).value() && !eval_bool(c2, v).value()) ok = false;
  });
  return ok;
}

inline bool brute_sat(const Term& c, const std::vector<std::string>& vars, long long lo, long long hi) {
  bool found = false;
  for_each_valuation(vars, lo, hi, [&](const Valuation& v) {
    if (!found && eval_bool(c, v).value()) found = true;
  });
  return found;
}

/// Random linear atoms and boolean combinations over a few Int variables.
class ConstraintGen {
 public:
  explicit ConstraintGen(std::uint64_t seed, int nvars = 4) : rng_(seed), nvars_(nvars) {}

  std::vector<std::string> vars() const {
    std::vector<std::string> out;
    for (int i = 0; i < nvars_; ++i) out.push_back("X" + std::to_string(i));
    return out;
  }
  Term var(int i) const { return Term::var("X" + std::to_string(i), Sort::integer()); }

  long long between(long long lo, long long hi) {
    return lo + static_cast<long long>(rng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  Term expr() {
    Term e = var(static_cast<int>(between(0, nvars_ - 1)));
    if (between(0, 2) == 0) {
      Term f = var(static_cast<int>(between(0, nvars_ - 1)));
      e = Term::app(between(0, 1) ? "+Int" : "-Int", {e, f}, Sort::integer());
    }
    if (between(0, 3) == 0) e = Term::app("+Int", {e, Term::integer(between(-3, 3))}, Sort::integer());
    return e;
  }

  Term atom() {
    static const char* ops[] = {"<Int", "<=Int", ">Int", ">=Int", "==Int", "=/=Int"};
    return Term::app(ops[between(0, 5)], {expr(), Term::integer(between(-8, 8))}, Sort::boolean());
  }

  Term formula(int depth = 2) {
    if (depth == 0 || between(0, 2) == 0) return atom();
    switch (between(0, 3)) {
      case 0:
        return Term::app("notBool", {formula(depth - 1)}, Sort::boolean());
      case 1:
        return Term::app("orBool", {formula(depth - 1), formula(depth - 1)}, Sort::boolean());
      default:
        return Term::app("andBool", {formula(depth - 1), formula(depth - 1)}, Sort::boolean());
    }
  }

  /// Box constraints keeping every variable in [-8, 8].
  Term box() const {
    Term acc = Term::boolean(true);
    for (int i = 0; i < nvars_; ++i) {
      Term lo = Term::app(">=Int", {var(i), Term::integer(-8)}, Sort::boolean());
      Term hi = Term::app("<=Int", {var(i), Term::integer(8)}, Sort::boolean());
      acc = Term::app("andBool", {acc, Term::app("andBool", {lo, hi}, Sort::boolean())}, Sort::boolean());
    }
    return acc;
  }

 private:
  std::mt19937_64 rng_;
  int nvars_;
};

}  // namespace oracle
