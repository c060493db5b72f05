#pragma once

// Rules, equations and the loaded form of a semantics: normalization,
// priority-ordered rule lookup, the .sem/.spec file formats and
// integration of compiled rules.

#include "prooforge/constraint.hpp"
#include "prooforge/syntax.hpp"

#include <unordered_map>

namespace prooforge {

/// A semantics that cannot evaluate something it should (guard or
/// equation that does not reduce on ground input, runaway equations).
class SemanticsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kHandwrittenPriority = 50;
inline constexpr int kCompiledPriority = 10;

struct Provenance {
  bool compiled = false;
  std::string proof;  // source proof id
  std::string path;   // vertex path inside the proof
  std::size_t consolidated = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// lhs and rhs are partial cell bags; rhs lists only cells that change.
struct Rule {
  std::string name;
  int priority = kHandwrittenPriority;
  Term lhs;
  Term rhs;
  Constraint guard;
  Provenance provenance;
};

/// `lhs = rhs requires c` for a function symbol, tried in file order.
struct Equation {
  Term lhs;
  Term rhs;
  Constraint guard;
};

namespace sem_detail {
/// False only when no instance of `s` can match `p`.
inline bool may_match(const Term& p, const Term& s, const std::set<std::string>& functions) {
  if (p.is_var()) return true;
  if (s.is_var()) return true;
  if (s.is_app() && (is_builtin_op(s.name()) || functions.count(s.name()))) {
    if (s.is_app(ops::kseq) || s.is_app(ops::kdot)) {
      // K sequence constructors are data
    } else {
      return true;
    }
  }
  if (p.kind() != s.kind()) return false;
  switch (p.kind()) {
    case Kind::IntLit:
      return p.value() == s.value();
    case Kind::BoolLit:
      return p.flag() == s.flag();
    default:
      break;
  }
  if (p.name() != s.name() || p.args().size() != s.args().size()) return false;
  for (std::size_t i = 0; i < p.args().size(); ++i)
    if (!may_match(p.args()[i], s.args()[i], functions)) return false;
  return true;
}

inline std::string head_key(const Term& k) {
  const Term& h = k.is_app(ops::kseq) ? k.args()[0] : k;
  if (h.is_app()) return h.name();
  if (h.is_var()) return "";
  return h.is_int() ? "#Int" : "#Bool";
}
}  // namespace sem_detail

class Semantics {
 public:
  std::string name;
  Signature sig;
  std::vector<Equation> equations;
  std::vector<Rule> rules;

  /// Rebuilds lookup tables; call after changing rules or equations.
  void reindex();

  /// Builtin reduction plus eager evaluation of function equations.
  Term normalize(const Term& t) const { return eval(t, 0); }
  /// normalize(apply_subst(s, pattern)), assuming bindings are normal.
  Term instantiate(const Term& pattern, const Subst& s) const { return inst(pattern, s, 0); }
  Normalizer normalizer() const {
    return [this](const Term& t) { return normalize(t); };
  }

  /// Indices of rules that may apply to `config`, best priority first,
  /// declaration order within a priority.
  const std::vector<std::size_t>& candidates(const Term& config) const;

  const Rule* rule(std::string_view n) const {
    for (const auto& r : rules)
      if (r.name == n) return &r;
    return nullptr;
  }

 private:
  Term eval(const Term& t, int depth) const;
  Term inst(const Term& p, const Subst& s, int depth) const;
  Term reduce_node(Term t, int depth) const;
  std::optional<Term> apply_equations(const Term& t, int depth) const;

  std::map<std::string, std::vector<std::size_t>> eqs_by_fn_;
  std::map<std::string, std::vector<std::size_t>> by_ctor_;
  std::map<std::string, std::vector<std::size_t>> by_sort_;
  std::vector<std::size_t> wildcard_;
};

inline constexpr int kMaxEvalDepth = 20000;

inline Term Semantics::reduce_node(Term t, int depth) const {
  if (!t.is_app()) return t;
  if (is_builtin_op(t.name())) return reduce_builtin(t, &sig.functions());
  if (sig.is_function(t.name()))
    if (auto r = apply_equations(t, depth)) return *r;
  return t;
}

inline std::optional<Term> Semantics::apply_equations(const Term& t, int depth) const {
  if (depth > kMaxEvalDepth) throw SemanticsError("equation evaluation too deep at " + t.name());
  auto it = eqs_by_fn_.find(t.name());
  if (it == eqs_by_fn_.end()) return std::nullopt;
  for (std::size_t idx : it->second) {
    const Equation& e = equations[idx];
    auto s = match(e.lhs, t);
    if (!s) {
      bool may = true;
      for (std::size_t i = 0; may && i < t.args().size(); ++i)
        may = sem_detail::may_match(e.lhs.args()[i], t.args()[i], sig.functions());
      if (may) return std::nullopt;
      continue;
    }
    if (!e.guard.is_true()) {
      Term g = inst(e.guard.to_term(), *s, depth + 1);
      if (!g.is_bool()) return std::nullopt;
      if (!g.flag()) continue;
    }
    return inst(e.rhs, *s, depth + 1);
  }
  return std::nullopt;
}

inline Term Semantics::eval(const Term& t, int depth) const {
  if (t.is_var() || t.is_int() || t.is_bool()) return t;
  std::vector<Term> args;
  args.reserve(t.args().size());
  bool changed = false;
  for (const auto& x : t.args()) {
    args.push_back(eval(x, depth));
    changed = changed || !args.back().same_node(x);
  }
  if (t.is_cell()) return changed ? Term::cell(t.name(), std::move(args[0])) : t;
  if (t.is_bag()) return changed ? Term::bag(std::move(args)) : t;
  return reduce_node(changed ? Term::app(t.name(), std::move(args), t.sort()) : t, depth);
}

inline Term Semantics::inst(const Term& p, const Subst& s, int depth) const {
  if (p.is_ground()) return eval(p, depth);
  if (p.is_var()) {
    const Term* b = s.find(p.name());
    return b ? *b : p;
  }
  std::vector<Term> args;
  args.reserve(p.args().size());
  for (const auto& x : p.args()) args.push_back(inst(x, s, depth));
  if (p.is_cell()) return Term::cell(p.name(), std::move(args[0]));
  if (p.is_bag()) return Term::bag(std::move(args));
  return reduce_node(Term::app(p.name(), std::move(args), p.sort()), depth);
}

inline void Semantics::reindex() {
  eqs_by_fn_.clear();
  for (std::size_t i = 0; i < equations.size(); ++i)
    eqs_by_fn_[equations[i].lhs.name()].push_back(i);

  std::vector<std::size_t> order(rules.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rules[a].priority < rules[b].priority; });

  by_ctor_.clear();
  by_sort_.clear();
  wildcard_.clear();
  // Rule keys: a constructor name, a sort (variable head), or wildcard.
  std::map<std::size_t, std::string> ctor_key;
  std::map<std::size_t, Sort> sort_key;
  for (std::size_t i : order) {
    const Term* k = rules[i].lhs.find_cell("k");
    const Term& body = k->body();
    std::string key = sem_detail::head_key(body);
    if (!key.empty()) {
      ctor_key.emplace(i, key);
    } else if (body.is_app(ops::kseq)) {
      sort_key.emplace(i, body.args()[0].sort());
    }
  }
  auto build = [&](auto&& admits) {
    std::vector<std::size_t> out;
    for (std::size_t i : order) {
      if (auto c = ctor_key.find(i); c != ctor_key.end()) {
        if (admits(&c->second, nullptr)) out.push_back(i);
      } else if (auto s = sort_key.find(i); s != sort_key.end()) {
        if (admits(nullptr, &s->second)) out.push_back(i);
      } else {
        out.push_back(i);
      }
    }
    return out;
  };
  std::vector<std::pair<std::string, Sort>> heads{{"#Int", Sort::integer()}, {"#Bool", Sort::boolean()}};
  for (const OpDecl* d : sig.user_ops()) heads.emplace_back(d->name, d->result);
  for (auto op : {ops::add, ops::sub, ops::mul, ops::div, ops::mod})
    heads.emplace_back(std::string(op), Sort::integer());
  for (auto op : {ops::lt, ops::le, ops::gt, ops::ge, ops::eq, ops::ne, ops::keq, ops::kne, ops::band,
                  ops::bor, ops::bnot})
    heads.emplace_back(std::string(op), Sort::boolean());
  heads.emplace_back(std::string(ops::kdot), Sort::k());
  for (const auto& [name, sort] : heads) {
    by_ctor_[name] = build([&](const std::string* c, const Sort* s) {
      return c ? *c == name : sort_leq(sort, *s);
    });
  }
  std::vector<Sort> sorts{Sort::integer(), Sort::boolean(), Sort::kitem(), Sort::k()};
  for (const auto& s : sig.user_sorts()) sorts.push_back(s);
  for (const auto& vs : sorts) {
    by_sort_[vs.name] = build([&](const std::string* c, const Sort* s) {
      return !c && sort_leq(vs, *s);
    });
  }
  wildcard_ = build([](const std::string*, const Sort*) { return false; });
}

inline const std::vector<std::size_t>& Semantics::candidates(const Term& config) const {
  const Term* k = config.find_cell("k");
  if (!k) return wildcard_;
  const Term& body = k->body();
  const Term& head = body.is_app(ops::kseq) ? body.args()[0] : body;
  if (head.is_var()) {
    auto it = by_sort_.find(head.sort().name);
    return it == by_sort_.end() ? wildcard_ : it->second;
  }
  auto it = by_ctor_.find(sem_detail::head_key(body));
  return it == by_ctor_.end() ? wildcard_ : it->second;
}


/// A rule produced by proof compilation.
struct CompiledRule {
  Rule rule;

  const std::string& source() const { return rule.provenance.proof; }
  std::size_t consolidated() const { return rule.provenance.consolidated; }
};

enum class SameloopMode { Head, None };
enum class TerminalMode { FinalOrStuck, Final };

struct ProgramSpec {
  std::string name;
  CTerm init;
  CTerm final;
  /// k-cell head constructors where symbolic execution pauses.
  std::set<std::string> cut;
  SameloopMode sameloop = SameloopMode::Head;
  /// When non-empty, only these k-cell heads are loop heads.
  std::set<std::string> loop_heads;
  TerminalMode terminal = TerminalMode::FinalOrStuck;
  /// Variables of init; they are fixed when matching against final.
  std::set<std::string> init_vars;
};

namespace sem_detail {
inline const std::set<std::string>& keywords() {
  static const std::set<std::string> kw{"semantics", "sort",  "op",       "func",          "infix",
                                        "eq",        "rule",  "requires", "priority",      "configuration",
                                        "spec",      "init",  "final",    "cut",           "sameloop",
                                        "terminal"};
  return kw;
}

inline Sort sort_ref(TokenStream& ts, const Signature& sig) {
  int line = ts.peek().line, col = ts.peek().col;
  Sort s{ts.expect_ident("sort name")};
  if (!sig.has_sort(s)) throw ParseError(line, col, "unknown sort " + s.name);
  return s;
}

inline void parse_op(TokenStream& ts, Signature& sig, bool function) {
  int line = ts.peek().line, col = ts.peek().col;
  OpDecl d;
  d.function = function;
  if (ts.at_keyword("infix")) {
    ts.next();
    d.infix = true;
  }
  const Token& t = ts.peek();
  if (t.kind == Tok::Sym || (t.kind == Tok::Ident && !ts.at_keyword()))
    d.name = ts.next().text;
  else
    ts.fail("expected operator name");
  if (ts.peek().kind == Tok::LParen) {
    ts.next();
    while (true) {
      d.args.push_back(sort_ref(ts, sig));
      if (ts.peek().kind == Tok::Comma) {
        ts.next();
        continue;
      }
      break;
    }
    if (ts.peek().kind != Tok::RParen) ts.fail("expected ')'");
    ts.next();
  }
  ts.expect_sym("->");
  d.result = sort_ref(ts, sig);
  if (d.infix && d.args.size() != 2) throw ParseError(line, col, "infix operator needs two arguments");
  if (d.infix != is_infix_name(d.name))
    throw ParseError(line, col, d.infix ? "infix operators must be symbolic" : "symbolic operators must be infix");
  if (d.function && d.args.empty()) throw ParseError(line, col, "function without arguments");
  try {
    sig.add_op(std::move(d));
  } catch (const MalformedInput& e) {
    throw ParseError(line, col, e.what());
  }
}

inline bool subset(const std::set<std::string>& a, const std::set<std::string>& b, std::string* missing) {
  for (const auto& v : a)
    if (!b.count(v)) {
      *missing = v;
      return false;
    }
  return true;
}

/// `//@ compiled proof=ID consolidated=N path=P`
inline std::optional<Provenance> parse_pragma(const std::string& text) {
  std::istringstream is(text);
  std::string word;
  if (!(is >> word) || word != "compiled") return std::nullopt;
  Provenance p;
  p.compiled = true;
  while (is >> word) {
    auto eq = word.find('=');
    if (eq == std::string::npos) continue;
    std::string k = word.substr(0, eq), v = word.substr(eq + 1);
    if (k == "proof") p.proof = v;
    else if (k == "path") p.path = v;
    else if (k == "consolidated") p.consolidated = std::stoul(v);
  }
  return p;
}

/// Drops rhs cells equal to their lhs counterpart.
inline Term changed_cells(const Term& lhs, const Term& rhs) {
  std::vector<Term> out;
  for (const auto& c : rhs.args()) {
    const Term* l = lhs.find_cell(c.name());
    if (!l || *l != c) out.push_back(c);
  }
  return Term::bag(std::move(out));
}
}  // namespace sem_detail

inline Semantics parse_semantics(std::string_view text) {
  using namespace sem_detail;
  TokenStream ts(text, keywords());
  Semantics sem;
  std::optional<Provenance> pending_prov;
  bool configured = false;
  std::set<std::string> rule_names;

  auto statement_error = [](const Token& at, const std::string& msg) {
    return ParseError(at.line, at.col, msg);
  };

  while (!ts.at_end()) {
    const Token start = ts.peek();
    if (start.kind == Tok::Pragma) {
      ts.next();
      if (auto p = parse_pragma(start.text)) pending_prov = p;
      continue;
    }
    if (!ts.at_keyword()) ts.fail("expected a declaration");
    std::string kw = ts.next().text;
    if (kw == "semantics") {
      sem.name = ts.expect_ident("semantics name");
    } else if (kw == "sort") {
      Sort s{ts.expect_ident("sort name")};
      if (!std::isupper(static_cast<unsigned char>(s.name[0])))
        throw statement_error(start, "sort names start with an upper-case letter");
      try {
        sem.sig.add_sort(s);
      } catch (const MalformedInput& e) {
        throw statement_error(start, e.what());
      }
    } else if (kw == "op" || kw == "func") {
      parse_op(ts, sem.sig, kw == "func");
    } else if (kw == "configuration") {
      if (configured) throw statement_error(start, "duplicate configuration");
      configured = true;
      Ast cells = ts.parse_cells(false);
      for (const auto& c : cells.kids) {
        const Ast& body = c.kids[0];
        if (body.k != Ast::K::Name || !body.annot.empty())
          throw ParseError(body.line, body.col, "cell body must be a sort name");
        Sort s{body.name};
        if (!sem.sig.has_sort(s)) throw ParseError(body.line, body.col, "unknown sort " + s.name);
        try {
          sem.sig.add_cell({c.name, s});
        } catch (const MalformedInput& e) {
          throw ParseError(c.line, c.col, e.what());
        }
      }
      if (!sem.sig.cell("k") || sem.sig.cell("k")->sort != Sort::k())
        throw statement_error(start, "configuration needs a <k> cell of sort K");
    } else if (kw == "eq") {
      Ast lhs = ts.parse_expr(0);
      ts.expect_sym("=");
      Ast rhs = ts.parse_expr(0);
      std::optional<Ast> req;
      if (ts.at_keyword("requires")) {
        ts.next();
        req = ts.parse_expr(0);
      }
      if (lhs.k != Ast::K::Call || !sem.sig.is_function(lhs.name))
        throw ParseError(lhs.line, lhs.col, "equation must define a declared function");
      Sort result = sem.sig.op(lhs.name)->result;
      Elaborator el(sem.sig);
      el.collect(lhs, result);
      el.collect(rhs, result);
      if (req) el.collect(*req, Sort::boolean());
      Equation e;
      e.lhs = el.build(lhs, result);
      e.rhs = el.build(rhs, result);
      if (req) e.guard = Constraint::of(el.build(*req, Sort::boolean()));
      std::string missing;
      auto lv = free_vars(e.lhs);
      if (!subset(free_vars(e.rhs), lv, &missing) || !subset(e.guard.free_vars(), lv, &missing))
        throw statement_error(start, "variable " + missing + " does not occur in the equation's left side");
      sem.equations.push_back(std::move(e));
    } else if (kw == "rule") {
      if (!configured) throw statement_error(start, "rule before configuration");
      Rule r;
      r.name = ts.expect_ident("rule name");
      if (!rule_names.insert(r.name).second) throw statement_error(start, "duplicate rule name " + r.name);
      Ast cells = ts.parse_cells(true);
      std::optional<Ast> req;
      if (ts.at_keyword("requires")) {
        ts.next();
        req = ts.parse_expr(0);
      }
      if (ts.at_keyword("priority")) {
        ts.next();
        if (ts.peek().kind != Tok::Int) ts.fail("expected a priority number");
        r.priority = static_cast<int>(ts.next().value);
      }
      Elaborator el(sem.sig);
      el.collect(cells, Sort::bag());
      if (req) el.collect(*req, Sort::boolean());
      r.lhs = el.build_side(cells, false, Sort::bag());
      r.rhs = changed_cells(r.lhs, el.build_side(cells, true, Sort::bag()));
      if (req) r.guard = Constraint::of(el.build(*req, Sort::boolean()));
      if (!r.lhs.find_cell("k")) throw statement_error(start, "rule " + r.name + " does not mention <k>");
      std::string missing;
      auto lv = free_vars(r.lhs);
      if (!subset(free_vars(r.rhs), lv, &missing) || !subset(r.guard.free_vars(), lv, &missing))
        throw statement_error(start, "rule " + r.name + ": variable " + missing + " does not occur on the left");
      if (pending_prov) {
        r.provenance = *pending_prov;
        pending_prov.reset();
      }
      sem.rules.push_back(std::move(r));
    } else {
      throw statement_error(start, "unexpected keyword " + kw);
    }
  }
  if (!configured && !sem.rules.empty()) throw MalformedInput("missing configuration");
  sem.reindex();
  return sem;
}

namespace sem_detail {
/// Completes a partial bag with `<prefix><label><suffix>` variables.
inline Term fill_cells(const Signature& sig, const Term& bag, const std::string& suffix) {
  std::vector<Term> cells(bag.args().begin(), bag.args().end());
  for (const auto& c : sig.cells())
    if (!bag.find_cell(c.label)) cells.push_back(Term::cell(c.label, Term::var("_" + c.label + suffix, c.sort)));
  return Term::bag(std::move(cells));
}

inline void check_cells(const Semantics& sem, const Ast& cells) {
  for (const auto& c : cells.kids)
    if (!sem.sig.cell(c.name)) throw ParseError(c.line, c.col, "undeclared cell <" + c.name + ">");
}
}  // namespace sem_detail

/// Parses a `.spec` file: `spec NAME`, `init CELLS [requires C]`,
/// `final CELLS [requires C]`, `cut C...`, `sameloop head [C...]|none`,
/// `terminal default|final`.
inline ProgramSpec parse_spec(std::string_view text, const Semantics& sem) {
  using namespace sem_detail;
  TokenStream ts(text, keywords());
  ProgramSpec spec;
  std::optional<Ast> init, final, init_req, final_req;
  while (!ts.at_end()) {
    const Token start = ts.peek();
    if (start.kind == Tok::Pragma) {
      ts.next();
      continue;
    }
    if (!ts.at_keyword()) ts.fail("expected a spec clause");
    std::string kw = ts.next().text;
    if (kw == "spec") {
      spec.name = ts.expect_ident("spec name");
    } else if (kw == "init" || kw == "final") {
      auto& slot = kw == "init" ? init : final;
      auto& req = kw == "init" ? init_req : final_req;
      if (slot) throw ParseError(start.line, start.col, "duplicate " + kw);
      slot = ts.parse_cells(false);
      check_cells(sem, *slot);
      if (ts.at_keyword("requires")) {
        ts.next();
        req = ts.parse_expr(0);
      }
    } else if (kw == "cut") {
      while (ts.peek().kind == Tok::Ident && !ts.at_keyword()) {
        const Token t = ts.next();
        if (!sem.sig.op(t.text)) throw ParseError(t.line, t.col, "unknown constructor " + t.text);
        spec.cut.insert(t.text);
      }
    } else if (kw == "sameloop") {
      std::string m = ts.expect_ident("head or none");
      if (m == "head") {
        spec.sameloop = SameloopMode::Head;
        while (ts.peek().kind == Tok::Ident && !ts.at_keyword()) {
          const Token t = ts.next();
          if (!sem.sig.op(t.text)) throw ParseError(t.line, t.col, "unknown constructor " + t.text);
          spec.loop_heads.insert(t.text);
        }
      } else if (m == "none") spec.sameloop = SameloopMode::None;
      else throw ParseError(start.line, start.col, "sameloop takes head or none");
    } else if (kw == "terminal") {
      std::string m = ts.expect_ident("default or final");
      if (m == "default") spec.terminal = TerminalMode::FinalOrStuck;
      else if (m == "final") spec.terminal = TerminalMode::Final;
      else throw ParseError(start.line, start.col, "terminal takes default or final");
    } else {
      throw ParseError(start.line, start.col, "unexpected keyword " + kw);
    }
  }
  if (!init || !final) throw MalformedInput("spec needs both init and final");
  Elaborator el(sem.sig);
  el.collect(*init, Sort::bag());
  el.collect(*final, Sort::bag());
  if (init_req) el.collect(*init_req, Sort::boolean());
  if (final_req) el.collect(*final_req, Sort::boolean());
  auto norm = sem.normalizer();
  Term ic = sem.normalize(fill_cells(sem.sig, el.build(*init, Sort::bag()), ""));
  Term fc = sem.normalize(fill_cells(sem.sig, el.build(*final, Sort::bag()), "_end"));
  Constraint icon, fcon;
  if (init_req) icon = Constraint::of(el.build(*init_req, Sort::boolean())).normalized(norm);
  if (final_req) fcon = Constraint::of(el.build(*final_req, Sort::boolean())).normalized(norm);
  for (const Term* t : {&ic, &fc})
    if (auto e = configuration_error(sem.sig, *t)) throw MalformedInput(*e);
  spec.init = {ic, icon};
  spec.final = {fc, fcon};
  spec.init_vars = free_vars(ic);
  for (const auto& v : icon.free_vars()) spec.init_vars.insert(v);
  return spec;
}

/// Parses a complete ground configuration (a program to run).
inline Term parse_config(std::string_view text, const Semantics& sem) {
  TokenStream ts(text, sem_detail::keywords());
  Ast cells = ts.parse_cells(false);
  if (!ts.at_end()) ts.fail("trailing input after configuration");
  sem_detail::check_cells(sem, cells);
  Elaborator el(sem.sig);
  el.collect(cells, Sort::bag());
  Term t = sem.normalize(el.build(cells, Sort::bag()));
  if (auto e = configuration_error(sem.sig, t)) throw MalformedInput(*e);
  if (!t.is_ground()) throw MalformedInput("program configuration must be ground");
  return t;
}

/// Adds compiled rules at the compiled priority band. Names already in
/// use get a `-2`, `-3`, ... suffix.
inline Semantics integrate(const Semantics& sem, const std::vector<CompiledRule>& compiled) {
  Semantics out = sem;
  for (const auto& c : compiled) {
    Rule r = c.rule;
    for (const Term* side : {&r.lhs, &r.rhs})
      if (auto e = sort_error(out.sig, *side)) throw MalformedInput("compiled rule " + r.name + ": " + *e);
    if (!r.lhs.find_cell("k")) throw MalformedInput("compiled rule " + r.name + " does not mention <k>");
    r.priority = kCompiledPriority;
    r.provenance.compiled = true;
    if (out.rule(r.name)) {
      std::string base = r.name;
      for (int n = 2;; ++n) {
        std::string cand = base + "-" + std::to_string(n);
        if (!out.rule(cand)) {
          r.name = cand;
          break;
        }
      }
    }
    out.rules.push_back(std::move(r));
  }
  out.reindex();
  return out;
}

namespace sem_detail {
inline std::string op_decl_text(const OpDecl& d) {
  std::string s = d.function ? "func " : "op ";
  if (d.infix) s += "infix ";
  s += d.name;
  if (!d.args.empty()) {
    s += '(';
    for (std::size_t i = 0; i < d.args.size(); ++i) s += (i ? ", " : "") + d.args[i].name;
    s += ')';
  }
  return s + " -> " + d.result.name;
}
}  // namespace sem_detail

inline std::string rule_text(const Semantics& sem, const Rule& r) {
  Printer pr(&sem.sig);
  std::ostringstream os;
  if (r.provenance.compiled)
    os << "//@ compiled proof=" << (r.provenance.proof.empty() ? "-" : r.provenance.proof)
       << " consolidated=" << r.provenance.consolidated
       << " path=" << (r.provenance.path.empty() ? "-" : r.provenance.path) << '\n';
  os << "rule " << r.name << '\n';
  for (const auto& c : r.lhs.args()) {
    Sort s = sem.sig.cell(c.name()) ? sem.sig.cell(c.name())->sort : c.body().sort();
    os << "  <" << c.name() << "> " << pr(c.body(), s);
    if (const Term* rc = r.rhs.find_cell(c.name())) os << " => " << pr(rc->body(), s);
    os << " </" << c.name() << ">\n";
  }
  if (!r.guard.is_true()) os << "  requires " << pr(r.guard.to_term(), Sort::boolean()) << '\n';
  if (r.priority != kHandwrittenPriority) os << "  priority " << r.priority << '\n';
  return os.str();
}

/// Canonical `.sem` text; parse_semantics(to_text(s)) reproduces s.
inline std::string to_text(const Semantics& sem) {
  Printer pr(&sem.sig);
  std::ostringstream os;
  if (!sem.name.empty()) os << "semantics " << sem.name << "\n\n";
  for (const auto& s : sem.sig.user_sorts()) os << "sort " << s.name << '\n';
  if (!sem.sig.user_sorts().empty()) os << '\n';
  auto ops = sem.sig.user_ops();
  for (const OpDecl* d : ops) os << sem_detail::op_decl_text(*d) << '\n';
  if (!ops.empty()) os << '\n';
  if (!sem.sig.cells().empty()) {
    os << "configuration";
    for (const auto& c : sem.sig.cells()) os << " <" << c.label << "> " << c.sort.name << " </" << c.label << '>';
    os << "\n\n";
  }
  for (const auto& e : sem.equations) {
    Sort s = e.lhs.sort();
    os << "eq " << pr(e.lhs, s) << " = " << pr(e.rhs, s);
    if (!e.guard.is_true()) os << "\n  requires " << pr(e.guard.to_term(), Sort::boolean());
    os << '\n';
  }
  if (!sem.equations.empty()) os << '\n';
  for (std::size_t i = 0; i < sem.rules.size(); ++i) {
    if (i) os << '\n';
    os << rule_text(sem, sem.rules[i]);
  }
  return os.str();
}

}  // namespace prooforge
