#pragma once

#include "prooforge/builtins.hpp"
#include "prooforge/term.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace prooforge {

struct OpDecl {
  std::string name;
  std::vector<Sort> args;
  Sort result;
  bool infix = false;     // declared as `_op_`
  bool function = false;  // defined by equations, not a constructor
};

struct CellDecl {
  std::string label;
  Sort sort;
};

/// Binding strength of infix operators; higher binds tighter.
inline int infix_precedence(std::string_view op) {
  if (op == ops::kseq) return 1;
  if (op == ops::bor) return 2;
  if (op == ops::band) return 3;
  if (is_cmp_op(op) || op == ops::keq || op == ops::kne) return 5;
  if (op == ops::add || op == ops::sub) return 7;
  if (op == ops::mul || op == ops::div || op == ops::mod) return 8;
  return 6;  // user-declared symbolic operators
}
inline bool infix_right_assoc(std::string_view op) {
  int p = infix_precedence(op);
  return p == 1 || p == 6;
}
inline bool is_symbolic_name(std::string_view name) {
  static const std::string_view chars = "~>=</*+-:;|&!?@$^%";
  return !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
    return chars.find(c) != std::string_view::npos;
  });
}
/// Builtin infix spellings are a symbol run plus `Int`/`K`, or a word op.
inline bool is_infix_name(std::string_view name) {
  if (name == ops::bnot || name == ops::kdot) return false;
  if (is_builtin_op(name)) return true;
  return is_symbolic_name(name);
}

class Signature {
 public:
  Signature() {
    for (const char* s : {"Int", "Bool", "K", "KItem"}) sorts_.push_back(Sort{s});
    auto I = Sort::integer(), B = Sort::boolean(), K = Sort::k(), KI = Sort::kitem();
    for (auto op : {ops::add, ops::sub, ops::mul, ops::div, ops::mod})
      builtin(op, {I, I}, I);
    for (auto op : {ops::lt, ops::le, ops::gt, ops::ge, ops::eq, ops::ne}) builtin(op, {I, I}, B);
    builtin(ops::keq, {KI, KI}, B);
    builtin(ops::kne, {KI, KI}, B);
    builtin(ops::band, {B, B}, B);
    builtin(ops::bor, {B, B}, B);
    builtin(ops::bnot, {B}, B);
    builtin(ops::kseq, {KI, K}, K);
    builtin(ops::kdot, {}, K);
  }

  bool has_sort(const Sort& s) const {
    return std::find(sorts_.begin(), sorts_.end(), s) != sorts_.end();
  }
  void add_sort(const Sort& s) {
    if (has_sort(s)) throw MalformedInput("duplicate sort " + s.name);
    sorts_.push_back(s);
    user_sorts_.push_back(s);
  }
  void add_op(OpDecl d) {
    if (ops_.count(d.name)) throw MalformedInput("duplicate operator " + d.name);
    for (const auto& s : d.args)
      if (!has_sort(s)) throw MalformedInput("unknown sort " + s.name + " in " + d.name);
    if (!has_sort(d.result)) throw MalformedInput("unknown sort " + d.result.name + " in " + d.name);
    if (d.function) functions_.insert(d.name);
    order_.push_back(d.name);
    ops_.emplace(d.name, std::move(d));
  }
  void add_cell(CellDecl c) {
    if (!has_sort(c.sort)) throw MalformedInput("unknown sort " + c.sort.name);
    if (cell(c.label)) throw MalformedInput("duplicate cell <" + c.label + ">");
    cells_.push_back(std::move(c));
  }

  const OpDecl* op(const std::string& name) const {
    auto it = ops_.find(name);
    return it == ops_.end() ? nullptr : &it->second;
  }
  const CellDecl* cell(std::string_view label) const {
    for (const auto& c : cells_)
      if (c.label == label) return &c;
    return nullptr;
  }
  const std::vector<CellDecl>& cells() const { return cells_; }
  const std::vector<Sort>& user_sorts() const { return user_sorts_; }
  /// User operators in declaration order.
  std::vector<const OpDecl*> user_ops() const {
    std::vector<const OpDecl*> out;
    for (const auto& n : order_) out.push_back(&ops_.at(n));
    return out;
  }
  const std::set<std::string>& functions() const { return functions_; }
  bool is_function(const std::string& name) const { return functions_.count(name) > 0; }

 private:
  void builtin(std::string_view name, std::vector<Sort> args, Sort result) {
    ops_.emplace(std::string(name), OpDecl{std::string(name), std::move(args), std::move(result),
                                           is_infix_name(name), false});
  }

  std::vector<Sort> sorts_;
  std::vector<Sort> user_sorts_;
  std::map<std::string, OpDecl> ops_;
  std::vector<std::string> order_;
  std::vector<CellDecl> cells_;
  std::set<std::string> functions_;
};

/// Checks every application against its declaration. Returns an error
/// message, or nullopt when well-sorted.
inline std::optional<std::string> sort_error(const Signature& sig, const Term& t) {
  switch (t.kind()) {
    case Kind::Var:
      if (!sig.has_sort(t.sort())) return "variable " + t.name() + " has unknown sort " + t.sort().name;
      return std::nullopt;
    case Kind::IntLit:
    case Kind::BoolLit:
      return std::nullopt;
    case Kind::Cell: {
      const CellDecl* d = sig.cell(t.name());
      if (!d) return "undeclared cell <" + t.name() + ">";
      if (!sort_leq(t.body().sort(), d->sort))
        return "cell <" + t.name() + "> holds " + t.body().sort().name + ", expected " + d->sort.name;
      return sort_error(sig, t.body());
    }
    case Kind::Bag:
      for (const auto& c : t.args())
        if (auto e = sort_error(sig, c)) return e;
      return std::nullopt;
    case Kind::App: {
      const OpDecl* d = sig.op(t.name());
      if (!d) return "unknown operator " + t.name();
      if (d->args.size() != t.args().size()) return "arity mismatch for " + t.name();
      if (d->result != t.sort()) return "result sort mismatch for " + t.name();
      for (std::size_t i = 0; i < d->args.size(); ++i) {
        if (!sort_leq(t.args()[i].sort(), d->args[i]))
          return "argument " + std::to_string(i + 1) + " of " + t.name() + " has sort " +
                 t.args()[i].sort().name + ", expected " + d->args[i].name;
        if (auto e = sort_error(sig, t.args()[i])) return e;
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

/// A configuration is a bag whose labels are exactly the declared cells.
inline std::optional<std::string> configuration_error(const Signature& sig, const Term& t) {
  if (!t.is_bag()) return "configuration is not a cell bag";
  if (t.args().size() != sig.cells().size()) return "configuration does not list every declared cell";
  for (const auto& c : sig.cells())
    if (!t.find_cell(c.label)) return "configuration lacks cell <" + c.label + ">";
  return sort_error(sig, t);
}

}  // namespace prooforge
