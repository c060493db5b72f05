#pragma once

// Sorted first-order terms, substitutions, one-way matching and
// anti-unification.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace prooforge {

using BigInt = boost::multiprecision::cpp_int;

/// Raised for ill-formed inputs (sort clashes, duplicate cell labels, ...).
/// Distinct from "no match", which is an empty optional.
class MalformedInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Sort {
  std::string name;

  auto operator<=>(const Sort&) const = default;

  static Sort integer() { return {"Int"}; }
  static Sort boolean() { return {"Bool"}; }
  static Sort k() { return {"K"}; }
  static Sort kitem() { return {"KItem"}; }
  static Sort cell() { return {"Cell"}; }
  static Sort bag() { return {"Bag"}; }
};

/// Subsorting: every data sort is below KItem; K, cells and bags stand alone.
inline bool sort_leq(const Sort& a, const Sort& b) {
  if (a == b) return true;
  if (b == Sort::kitem())
    return a != Sort::k() && a != Sort::cell() && a != Sort::bag();
  return false;
}

enum class Kind : std::uint8_t { Var, IntLit, BoolLit, App, Cell, Bag };

class Term;

namespace detail {
struct Node;
}

class Term {
 public:
  Term();  // the boolean literal `true`

  static Term var(std::string name, Sort sort);
  static Term integer(BigInt value);
  static Term boolean(bool value);
  static Term app(std::string ctor, std::vector<Term> args, Sort sort);
  static Term cell(std::string label, Term body);
  /// Cells are sorted by label; duplicate labels are rejected.
  static Term bag(std::vector<Term> cells);

  Kind kind() const;
  const std::string& name() const;  // var name, ctor, or cell label
  const Sort& sort() const;
  const BigInt& value() const;
  bool flag() const;
  const std::vector<Term>& args() const;
  std::size_t hash() const;
  bool is_ground() const;
  std::size_t size() const;

  bool is_var() const { return kind() == Kind::Var; }
  bool is_int() const { return kind() == Kind::IntLit; }
  bool is_bool() const { return kind() == Kind::BoolLit; }
  bool is_app() const { return kind() == Kind::App; }
  bool is_cell() const { return kind() == Kind::Cell; }
  bool is_bag() const { return kind() == Kind::Bag; }
  bool is_app(std::string_view ctor) const { return is_app() && name() == ctor; }

  const Term& body() const { return args().front(); }
  /// Cell of a bag by label, or nullptr.
  const Term* find_cell(std::string_view label) const;
  /// Bag with the body of one cell replaced.
  Term with_cell(std::string_view label, Term body) const;

  bool same_node(const Term& o) const { return n_ == o.n_; }

  friend bool operator==(const Term& a, const Term& b);
  friend int compare(const Term& a, const Term& b);
  friend bool operator<(const Term& a, const Term& b) { return compare(a, b) < 0; }

 private:
  explicit Term(std::shared_ptr<const detail::Node> n) : n_(std::move(n)) {}
  std::shared_ptr<const detail::Node> n_;
};

namespace detail {
struct Node {
  Kind kind{};
  std::string name;
  Sort sort;
  BigInt value;
  bool flag = false;
  std::vector<Term> args;
  std::size_t hash = 0;
  bool ground = true;
  std::size_t size = 1;
};

inline std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

inline std::shared_ptr<const Node> finish(Node n) {
  std::size_t h = std::hash<int>{}(static_cast<int>(n.kind));
  h = mix(h, std::hash<std::string>{}(n.name));
  h = mix(h, std::hash<std::string>{}(n.sort.name));
  if (n.kind == Kind::IntLit) h = mix(h, boost::multiprecision::hash_value(n.value));
  h = mix(h, n.flag ? 1 : 2);
  n.ground = n.kind != Kind::Var;
  for (const auto& a : n.args) {
    h = mix(h, a.hash());
    n.ground = n.ground && a.is_ground();
    n.size += a.size();
  }
  n.hash = h;
  return std::make_shared<const Node>(std::move(n));
}

inline const std::shared_ptr<const Node>& true_node() {
  static const std::shared_ptr<const Node> n = [] {
    Node x;
    x.kind = Kind::BoolLit;
    x.sort = Sort::boolean();
    x.flag = true;
    return finish(std::move(x));
  }();
  return n;
}
}  // namespace detail

inline Term::Term() : n_(detail::true_node()) {}

inline Term Term::var(std::string name, Sort sort) {
  detail::Node n;
  n.kind = Kind::Var;
  n.name = std::move(name);
  n.sort = std::move(sort);
  return Term(detail::finish(std::move(n)));
}

inline Term Term::integer(BigInt value) {
  detail::Node n;
  n.kind = Kind::IntLit;
  n.sort = Sort::integer();
  n.value = std::move(value);
  return Term(detail::finish(std::move(n)));
}

inline Term Term::boolean(bool value) {
  if (value) return Term(detail::true_node());
  static const Term f = [] {
    detail::Node n;
    n.kind = Kind::BoolLit;
    n.sort = Sort::boolean();
    n.flag = false;
    return Term(detail::finish(std::move(n)));
  }();
  return f;
}

inline Term Term::app(std::string ctor, std::vector<Term> args, Sort sort) {
  detail::Node n;
  n.kind = Kind::App;
  n.name = std::move(ctor);
  n.args = std::move(args);
  n.sort = std::move(sort);
  return Term(detail::finish(std::move(n)));
}

inline Term Term::cell(std::string label, Term body) {
  detail::Node n;
  n.kind = Kind::Cell;
  n.name = std::move(label);
  n.sort = Sort::cell();
  n.args.push_back(std::move(body));
  return Term(detail::finish(std::move(n)));
}

inline Term Term::bag(std::vector<Term> cells) {
  for (const auto& c : cells)
    if (!c.is_cell()) throw MalformedInput("cell bag element is not a cell");
  std::sort(cells.begin(), cells.end(),
            [](const Term& a, const Term& b) { return a.name() < b.name(); });
  for (std::size_t i = 1; i < cells.size(); ++i)
    if (cells[i - 1].name() == cells[i].name())
      throw MalformedInput("duplicate cell label <" + cells[i].name() + ">");
  detail::Node n;
  n.kind = Kind::Bag;
  n.sort = Sort::bag();
  n.args = std::move(cells);
  return Term(detail::finish(std::move(n)));
}

inline Kind Term::kind() const { return n_->kind; }
inline const std::string& Term::name() const { return n_->name; }
inline const Sort& Term::sort() const { return n_->sort; }
inline const BigInt& Term::value() const { return n_->value; }
inline bool Term::flag() const { return n_->flag; }
inline const std::vector<Term>& Term::args() const { return n_->args; }
inline std::size_t Term::hash() const { return n_->hash; }
inline bool Term::is_ground() const { return n_->ground; }
inline std::size_t Term::size() const { return n_->size; }

inline const Term* Term::find_cell(std::string_view label) const {
  if (!is_bag()) return nullptr;
  for (const auto& c : args())
    if (c.name() == label) return &c;
  return nullptr;
}

inline Term Term::with_cell(std::string_view label, Term body) const {
  std::vector<Term> cells = args();
  for (auto& c : cells)
    if (c.name() == label) {
      c = Term::cell(c.name(), std::move(body));
      return Term::bag(std::move(cells));
    }
  throw MalformedInput("no cell <" + std::string(label) + ">");
}

inline bool operator==(const Term& a, const Term& b) {
  if (a.n_ == b.n_) return true;
  const auto& x = *a.n_;
  const auto& y = *b.n_;
  if (x.hash != y.hash || x.kind != y.kind || x.size != y.size) return false;
  if (x.name != y.name || x.sort != y.sort || x.flag != y.flag) return false;
  if (x.kind == Kind::IntLit && x.value != y.value) return false;
  if (x.args.size() != y.args.size()) return false;
  for (std::size_t i = 0; i < x.args.size(); ++i)
    if (!(x.args[i] == y.args[i])) return false;
  return true;
}

inline int compare(const Term& a, const Term& b) {
  if (a.n_ == b.n_) return 0;
  const auto& x = *a.n_;
  const auto& y = *b.n_;
  if (x.kind != y.kind) return x.kind < y.kind ? -1 : 1;
  if (x.kind == Kind::IntLit && x.value != y.value) return x.value < y.value ? -1 : 1;
  if (x.flag != y.flag) return x.flag ? 1 : -1;
  if (int c = x.name.compare(y.name)) return c < 0 ? -1 : 1;
  if (int c = x.sort.name.compare(y.sort.name)) return c < 0 ? -1 : 1;
  if (x.args.size() != y.args.size()) return x.args.size() < y.args.size() ? -1 : 1;
  for (std::size_t i = 0; i < x.args.size(); ++i)
    if (int c = compare(x.args[i], y.args[i])) return c;
  return 0;
}

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};

// ---------------------------------------------------------------------------
// Substitutions

class Subst {
 public:
  Subst() = default;

  const Term* find(const std::string& name) const {
    auto it = map_.find(name);
    return it == map_.end() ? nullptr : &it->second;
  }
  /// Binds `name`; returns false on a conflicting existing binding.
  bool bind(const std::string& name, const Term& t) {
    auto [it, inserted] = map_.emplace(name, t);
    return inserted || it->second == t;
  }
  void set(const std::string& name, Term t) { map_.insert_or_assign(name, std::move(t)); }
  void erase(const std::string& name) { map_.erase(name); }
  bool empty() const { return map_.empty(); }
  std::size_t size() const { return map_.size(); }
  const std::map<std::string, Term>& bindings() const { return map_; }

  auto begin() const { return map_.begin(); }
  auto end() const { return map_.end(); }

  friend bool operator==(const Subst& a, const Subst& b) { return a.map_ == b.map_; }

 private:
  std::map<std::string, Term> map_;
};

/// Rebuilds `t` with each variable replaced by `on_var(v)`; untouched
/// subtrees are shared.
template <class OnVar>
Term map_vars(const Term& t, OnVar&& on_var) {
  if (t.is_ground()) return t;
  switch (t.kind()) {
    case Kind::Var:
      return on_var(t);
    case Kind::IntLit:
    case Kind::BoolLit:
      return t;
    default:
      break;
  }
  std::vector<Term> args;
  args.reserve(t.args().size());
  bool changed = false;
  for (const auto& a : t.args()) {
    args.push_back(map_vars(a, on_var));
    changed = changed || !args.back().same_node(a);
  }
  if (!changed) return t;
  switch (t.kind()) {
    case Kind::App:
      return Term::app(t.name(), std::move(args), t.sort());
    case Kind::Cell:
      return Term::cell(t.name(), std::move(args.front()));
    default:
      return Term::bag(std::move(args));
  }
}

/// Pure structural substitution (no evaluation).
inline Term apply_subst(const Subst& s, const Term& t) {
  if (s.empty()) return t;
  return map_vars(t, [&](const Term& v) {
    const Term* b = s.find(v.name());
    return b ? *b : v;
  });
}

inline void collect_vars(const Term& t, std::map<std::string, Sort>& out) {
  if (t.is_ground()) return;
  if (t.is_var()) {
    out.emplace(t.name(), t.sort());
    return;
  }
  for (const auto& a : t.args()) collect_vars(a, out);
}

inline std::set<std::string> free_vars(const Term& t) {
  std::map<std::string, Sort> m;
  collect_vars(t, m);
  std::set<std::string> out;
  for (auto& [k, _] : m) out.insert(k);
  return out;
}

/// Variables in order of first occurrence (left to right, depth first).
inline void vars_in_order(const Term& t, std::vector<Term>& out, std::set<std::string>& seen) {
  if (t.is_ground()) return;
  if (t.is_var()) {
    if (seen.insert(t.name()).second) out.push_back(t);
    return;
  }
  for (const auto& a : t.args()) vars_in_order(a, out, seen);
}

// ---------------------------------------------------------------------------
// Matching

namespace detail {
inline bool match_into(const Term& p, const Term& s, Subst& sigma,
                       const std::set<std::string>* rigid) {
  if (p.is_var()) {
    if (rigid && rigid->count(p.name())) return s.is_var() && s.name() == p.name() && s.sort() == p.sort();
    if (!sort_leq(s.sort(), p.sort())) return false;
    return sigma.bind(p.name(), s);
  }
  if (p.is_ground() && p.hash() != s.hash()) return false;
  if (p.kind() != s.kind()) return false;
  switch (p.kind()) {
    case Kind::IntLit:
      return p.value() == s.value();
    case Kind::BoolLit:
      return p.flag() == s.flag();
    case Kind::App:
      if (p.name() != s.name() || p.args().size() != s.args().size()) return false;
      break;
    case Kind::Cell:
      if (p.name() != s.name()) return false;
      break;
    case Kind::Bag:
      if (p.args().size() != s.args().size()) return false;
      break;
    case Kind::Var:
      break;
  }
  for (std::size_t i = 0; i < p.args().size(); ++i)
    if (!match_into(p.args()[i], s.args()[i], sigma, rigid)) return false;
  return true;
}
}  // namespace detail

/// One-way syntactic matching: variables bind only in `pattern`. Variables
/// listed in `rigid` behave as constants. Throws MalformedInput when the
/// root sorts are unrelated.
inline std::optional<Subst> match(const Term& pattern, const Term& subject,
                                  const std::set<std::string>* rigid = nullptr) {
  if (!sort_leq(pattern.sort(), subject.sort()) && !sort_leq(subject.sort(), pattern.sort()))
    throw MalformedInput("sort mismatch in match: " + pattern.sort().name + " vs " +
                         subject.sort().name);
  Subst sigma;
  if (!detail::match_into(pattern, subject, sigma, rigid)) return std::nullopt;
  return sigma;
}

/// Same as match() but extends an existing substitution.
inline bool match_extend(const Term& pattern, const Term& subject, Subst& sigma,
                         const std::set<std::string>* rigid = nullptr) {
  return detail::match_into(pattern, subject, sigma, rigid);
}

// ---------------------------------------------------------------------------
// Anti-unification

/// Fresh variables `V#<n>` from a monotone counter.
class VariableSupply {
 public:
  explicit VariableSupply(std::uint64_t start = 0) : next_(start) {}
  Term fresh(const Sort& sort) { return Term::var("V#" + std::to_string(next_++), sort); }
  std::uint64_t peek() const { return next_; }

  /// Skips past every `V#<n>` already used in `t`.
  void avoid(const Term& t) {
    std::map<std::string, Sort> vs;
    collect_vars(t, vs);
    for (auto& [name, _] : vs)
      if (name.rfind("V#", 0) == 0) {
        try {
          std::uint64_t n = std::stoull(name.substr(2));
          if (n >= next_) next_ = n + 1;
        } catch (const std::exception&) {
        }
      }
  }

 private:
  std::uint64_t next_;
};

struct Generalization {
  Term gen;
  Subst left;
  Subst right;
};

namespace detail {
struct LggState {
  VariableSupply& fresh;
  std::map<std::pair<Term, Term>, Term> memo;
  Subst left, right;

  Term go(const Term& a, const Term& b) {
    if (a == b) return a;
    bool same_shape = a.kind() == b.kind() && a.args().size() == b.args().size() &&
                      a.name() == b.name();
    if (same_shape && a.is_app() && a.sort() == b.sort()) {
      std::vector<Term> args;
      for (std::size_t i = 0; i < a.args().size(); ++i) args.push_back(go(a.args()[i], b.args()[i]));
      return Term::app(a.name(), std::move(args), a.sort());
    }
    if (same_shape && a.is_cell()) return Term::cell(a.name(), go(a.body(), b.body()));
    if (a.is_bag() && b.is_bag() && a.args().size() == b.args().size()) {
      bool labels = true;
      for (std::size_t i = 0; i < a.args().size(); ++i)
        labels = labels && a.args()[i].name() == b.args()[i].name();
      if (labels) {
        std::vector<Term> cells;
        for (std::size_t i = 0; i < a.args().size(); ++i) cells.push_back(go(a.args()[i], b.args()[i]));
        return Term::bag(std::move(cells));
      }
    }
    auto key = std::make_pair(a, b);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    Sort s = a.sort();
    if (a.sort() != b.sort()) {
      if (sort_leq(a.sort(), Sort::kitem()) && sort_leq(b.sort(), Sort::kitem()))
        s = Sort::kitem();
      else
        throw MalformedInput("cannot generalize " + a.sort().name + " with " + b.sort().name);
    }
    Term v = fresh.fresh(s);
    memo.emplace(key, v);
    left.set(v.name(), a);
    right.set(v.name(), b);
    return v;
  }
};
}  // namespace detail

/// Least general generalization: differing positions become fresh
/// variables, repeated identical differences share one variable.
inline Generalization cau(const Term& t1, const Term& t2, VariableSupply& fresh) {
  if (t1.sort() != t2.sort() &&
      !(sort_leq(t1.sort(), Sort::kitem()) && sort_leq(t2.sort(), Sort::kitem())))
    throw MalformedInput("cau: sort mismatch " + t1.sort().name + " vs " + t2.sort().name);
  detail::LggState st{fresh, {}, {}, {}};
  Term g = st.go(t1, t2);
  return {g, std::move(st.left), std::move(st.right)};
}

/// Injective variable-to-variable matching both ways.
inline bool alpha_equivalent(const Term& a, const Term& b) {
  if (a.size() != b.size()) return false;
  auto s = match(b, a);
  if (!s) return false;
  std::set<std::string> images;
  for (auto& [k, v] : *s) {
    if (!v.is_var()) return false;
    if (!images.insert(v.name()).second) return false;
  }
  return true;
}

}  // namespace prooforge
