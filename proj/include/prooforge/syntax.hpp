#pragma once

// Textual form of terms: lexer, expression parser, sort elaboration and the
// canonical printer. print(parse(s)) is a fixpoint for printed terms.

#include "prooforge/signature.hpp"

#include <cctype>
#include <sstream>

namespace prooforge {

class ParseError : public MalformedInput {
 public:
  ParseError(int line, int col, const std::string& msg)
      : MalformedInput(std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
        line_(line),
        col_(col) {}
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_, col_;
};

enum class Tok { Ident, Int, Sym, LParen, RParen, Comma, CellOpen, CellClose, Pragma, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  BigInt value;
  std::string annot;  // `X:Sort`
  int line = 1, col = 1;
};

namespace syntax_detail {
inline bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '#' || c == '.';
}
inline bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '#' || c == '.' ||
         c == '-' || c == '\'';
}
inline bool sym_char(char c) { return std::string_view("~>=</*+-:;|&!?@$^%").find(c) != std::string_view::npos; }
}  // namespace syntax_detail

inline std::vector<Token> lex(std::string_view src, const std::set<std::string>& keywords) {
  using namespace syntax_detail;
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto value_like = [&]() {
    if (out.empty()) return false;
    const Token& p = out.back();
    if (p.kind == Tok::Int || p.kind == Tok::RParen || p.kind == Tok::CellClose) return true;
    return p.kind == Tok::Ident && !keywords.count(p.text);
  };
  auto ident_len = [&](std::size_t from) {
    std::size_t j = from;
    while (j < src.size() && ident_char(src[j])) ++j;
    return j - from;
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (src.substr(i, 3) == "//@") {
      std::size_t e = src.find('\n', i);
      if (e == std::string_view::npos) e = src.size();
      t.kind = Tok::Pragma;
      t.text = std::string(src.substr(i + 3, e - i - 3));
      advance(e - i);
      out.push_back(std::move(t));
      continue;
    }
    if (src.substr(i, 2) == "//") {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (c == '(' || c == ')' || c == ',') {
      t.kind = c == '(' ? Tok::LParen : c == ')' ? Tok::RParen : Tok::Comma;
      t.text = std::string(1, c);
      advance(1);
      out.push_back(std::move(t));
      continue;
    }
    if (c == '<') {
      bool close = i + 1 < src.size() && src[i + 1] == '/';
      std::size_t start = i + (close ? 2 : 1);
      if (start < src.size() && std::isalpha(static_cast<unsigned char>(src[start]))) {
        std::size_t n = ident_len(start);
        if (start + n < src.size() && src[start + n] == '>') {
          t.kind = close ? Tok::CellClose : Tok::CellOpen;
          t.text = std::string(src.substr(start, n));
          advance(start + n + 1 - i);
          out.push_back(std::move(t));
          continue;
        }
      }
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])) &&
         !value_like())) {
      std::size_t j = i + 1;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Tok::Int;
      t.text = std::string(src.substr(i, j - i));
      t.value = BigInt(t.text);
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (ident_start(c)) {
      std::size_t n = ident_len(i);
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(i, n));
      advance(n);
      if (i + 1 < src.size() && src[i] == ':' && std::isalpha(static_cast<unsigned char>(src[i + 1]))) {
        std::size_t m = 1;
        while (i + m < src.size() && std::isalnum(static_cast<unsigned char>(src[i + m]))) ++m;
        t.annot = std::string(src.substr(i + 1, m - 1));
        advance(m);
      }
      out.push_back(std::move(t));
      continue;
    }
    if (sym_char(c)) {
      std::size_t j = i;
      while (j < src.size() && sym_char(src[j])) ++j;
      std::string run(src.substr(i, j - i));
      static const std::set<std::string> int_ops{"+", "-", "*", "/", "%", "<", "<=", ">", ">=", "==", "=/="};
      auto suffix = [&](std::string_view s) {
        return src.substr(j, s.size()) == s &&
               (j + s.size() >= src.size() || !ident_char(src[j + s.size()]));
      };
      if (int_ops.count(run) && suffix("Int")) {
        run += "Int";
        j += 3;
      } else if ((run == "==" || run == "=/=") && suffix("K")) {
        run += "K";
        j += 1;
      }
      t.kind = Tok::Sym;
      t.text = run;
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    throw ParseError(line, col, std::string("unexpected character '") + c + "'");
  }
  Token end;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

/// Untyped syntax tree produced by the parser.
struct Ast {
  enum class K { Name, Int, Call, Cell, Bag, Rewrite } k = K::Name;
  std::string name;
  std::string annot;
  BigInt value;
  std::vector<Ast> kids;
  int line = 0, col = 0;
};

/// Recursive-descent parser over a token stream. Expressions end at any
/// reserved keyword, so statement parsers can sit on top of it.
class TokenStream {
 public:
  TokenStream(std::string_view src, std::set<std::string> keywords)
      : keywords_(std::move(keywords)), toks_(lex(src, keywords_)) {}

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  Token next() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == Tok::End; }
  bool at_keyword(std::string_view kw = {}) const {
    const Token& t = peek();
    if (t.kind != Tok::Ident || !keywords_.count(t.text)) return false;
    return kw.empty() || t.text == kw;
  }
  bool at_sym(std::string_view s) const { return peek().kind == Tok::Sym && peek().text == s; }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(peek().line, peek().col, msg); }
  void expect_sym(std::string_view s) {
    if (!at_sym(s)) fail("expected '" + std::string(s) + "'");
    next();
  }
  std::string expect_ident(const char* what = "identifier") {
    if (peek().kind != Tok::Ident || keywords_.count(peek().text)) fail(std::string("expected ") + what);
    return next().text;
  }

  Ast parse_expr(int min_prec = 0);
  /// `<l> e </l>` cells; with `rewrites`, bodies may be `e => e`.
  Ast parse_cells(bool rewrites);

 private:
  std::optional<std::string> binary_op() const;
  Ast parse_primary();

  std::set<std::string> keywords_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

inline std::optional<std::string> TokenStream::binary_op() const {
  const Token& t = peek();
  if (t.kind == Tok::Ident && (t.text == "andBool" || t.text == "orBool")) return t.text;
  if (t.kind != Tok::Sym || t.text == "=>" || t.text == "=") return std::nullopt;
  static const std::map<std::string, std::string> alias{
      {"+", "+Int"}, {"-", "-Int"},  {"*", "*Int"},   {"/", "/Int"},   {"%", "%Int"},
      {"<", "<Int"}, {"<=", "<=Int"}, {">", ">Int"}, {">=", ">=Int"}, {"==", "==Int"},
      {"=/=", "=/=Int"}};
  if (auto it = alias.find(t.text); it != alias.end()) return it->second;
  return t.text;
}

inline Ast TokenStream::parse_primary() {
  const Token& t = peek();
  Ast a;
  a.line = t.line;
  a.col = t.col;
  switch (t.kind) {
    case Tok::Int:
      a.k = Ast::K::Int;
      a.value = next().value;
      return a;
    case Tok::LParen: {
      next();
      Ast inner = parse_expr(0);
      if (peek().kind != Tok::RParen) fail("expected ')'");
      next();
      return inner;
    }
    case Tok::Ident: {
      if (keywords_.count(t.text)) fail("unexpected keyword '" + t.text + "'");
      Token id = next();
      if (id.text == "notBool") {
        a.k = Ast::K::Call;
        a.name = "notBool";
        a.kids.push_back(parse_expr(5));
        return a;
      }
      a.name = id.text;
      a.annot = id.annot;
      if (peek().kind == Tok::LParen) {
        next();
        a.k = Ast::K::Call;
        if (peek().kind != Tok::RParen) {
          while (true) {
            a.kids.push_back(parse_expr(0));
            if (peek().kind == Tok::Comma) {
              next();
              continue;
            }
            break;
          }
        }
        if (peek().kind != Tok::RParen) fail("expected ')' after arguments of " + a.name);
        next();
      }
      return a;
    }
    default:
      fail(t.kind == Tok::End ? "unexpected end of input" : "unexpected '" + t.text + "'");
  }
}

inline Ast TokenStream::parse_expr(int min_prec) {
  Ast lhs = parse_primary();
  while (true) {
    auto op = binary_op();
    if (!op) break;
    int p = infix_precedence(*op);
    if (p < min_prec) break;
    Token t = next();
    int rmin = infix_right_assoc(*op) ? p : p + 1;
    Ast rhs = parse_expr(rmin);
    Ast call;
    call.k = Ast::K::Call;
    call.name = *op;
    call.line = t.line;
    call.col = t.col;
    call.kids = {std::move(lhs), std::move(rhs)};
    lhs = std::move(call);
    if (is_cmp_op(*op) || *op == ops::keq || *op == ops::kne) {
      auto again = binary_op();
      if (again && infix_precedence(*again) == 5) fail("comparisons do not associate");
    }
  }
  return lhs;
}

inline Ast TokenStream::parse_cells(bool rewrites) {
  Ast bag;
  bag.k = Ast::K::Bag;
  bag.line = peek().line;
  bag.col = peek().col;
  while (peek().kind == Tok::CellOpen) {
    Token open = next();
    Ast cell;
    cell.k = Ast::K::Cell;
    cell.name = open.text;
    cell.line = open.line;
    cell.col = open.col;
    Ast body = parse_expr(0);
    if (rewrites && at_sym("=>")) {
      next();
      Ast rw;
      rw.k = Ast::K::Rewrite;
      rw.line = body.line;
      rw.col = body.col;
      rw.kids.push_back(std::move(body));
      rw.kids.push_back(parse_expr(0));
      body = std::move(rw);
    }
    if (peek().kind != Tok::CellClose || peek().text != open.text)
      fail("expected </" + open.text + ">");
    next();
    cell.kids.push_back(std::move(body));
    bag.kids.push_back(std::move(cell));
  }
  if (bag.kids.empty()) fail("expected a cell");
  return bag;
}

// ---------------------------------------------------------------------------
// Elaboration: untyped syntax to sorted terms.

class Elaborator {
 public:
  explicit Elaborator(const Signature& sig) : sig_(sig) {}

  /// Pass 1 over every tree of a unit (rule, spec, ...).
  void collect(const Ast& a, const Sort& expected);
  /// Pass 2, after all collect() calls of the unit.
  Term build(const Ast& a, const Sort& expected);
  /// Builds one side of a cell tree containing `=>`.
  Term build_side(const Ast& a, bool right, const Sort& expected);

  std::map<std::string, Sort> var_sorts() const {
    std::map<std::string, Sort> out = inferred_;
    for (auto& [k, v] : annotated_) out.insert_or_assign(k, v);
    return out;
  }

 private:
  bool is_var_name(const std::string& n) const {
    return !n.empty() && (std::isupper(static_cast<unsigned char>(n[0])) || n[0] == '_');
  }
  [[noreturn]] void fail(const Ast& a, const std::string& msg) const {
    throw ParseError(a.line, a.col, msg);
  }
  const OpDecl& decl(const Ast& a) const {
    const OpDecl* d = sig_.op(a.name);
    if (!d) fail(a, "unknown operator " + a.name);
    if (d->args.size() != a.kids.size())
      fail(a, a.name + " expects " + std::to_string(d->args.size()) + " arguments");
    return *d;
  }
  Sort meet(const Ast& at, const Sort& a, const Sort& b) const {
    if (sort_leq(a, b)) return a;
    if (sort_leq(b, a)) return b;
    fail(at, "conflicting sorts " + a.name + " and " + b.name + " for " + at.name);
  }
  Term coerce(const Ast& a, Term t, const Sort& expected) const {
    if (sort_leq(t.sort(), expected)) return t;
    if (expected == Sort::k() && sort_leq(t.sort(), Sort::kitem())) return kseq(std::move(t), kdot());
    fail(a, "expected sort " + expected.name + ", found " + t.sort().name);
  }

  const Signature& sig_;
  std::map<std::string, Sort> annotated_;
  std::map<std::string, Sort> inferred_;
};

inline void Elaborator::collect(const Ast& a, const Sort& expected) {
  switch (a.k) {
    case Ast::K::Int:
      return;
    case Ast::K::Name: {
      if (a.name == "true" || a.name == "false") return;
      if (const OpDecl* d = sig_.op(a.name); d && d->args.empty()) return;
      if (!is_var_name(a.name)) fail(a, "unknown constructor " + a.name);
      if (!a.annot.empty()) {
        Sort s{a.annot};
        if (!sig_.has_sort(s)) fail(a, "unknown sort " + a.annot);
        auto [it, ins] = annotated_.emplace(a.name, s);
        if (!ins && it->second != s) fail(a, "conflicting annotations for " + a.name);
        return;
      }
      auto it = inferred_.find(a.name);
      if (it == inferred_.end())
        inferred_.emplace(a.name, expected);
      else
        it->second = meet(a, it->second, expected);
      return;
    }
    case Ast::K::Call: {
      const OpDecl& d = decl(a);
      for (std::size_t i = 0; i < a.kids.size(); ++i) collect(a.kids[i], d.args[i]);
      return;
    }
    case Ast::K::Cell: {
      const CellDecl* c = sig_.cell(a.name);
      if (!c) fail(a, "undeclared cell <" + a.name + ">");
      collect(a.kids[0], c->sort);
      return;
    }
    case Ast::K::Bag:
      for (const auto& k : a.kids) collect(k, Sort::cell());
      return;
    case Ast::K::Rewrite:
      collect(a.kids[0], expected);
      collect(a.kids[1], expected);
      return;
  }
}

inline Term Elaborator::build(const Ast& a, const Sort& expected) {
  switch (a.k) {
    case Ast::K::Int:
      return coerce(a, Term::integer(a.value), expected);
    case Ast::K::Name: {
      if (a.name == "true" || a.name == "false") return coerce(a, Term::boolean(a.name == "true"), expected);
      if (const OpDecl* d = sig_.op(a.name); d && d->args.empty())
        return coerce(a, Term::app(d->name, {}, d->result), expected);
      Sort s = expected;
      if (auto it = annotated_.find(a.name); it != annotated_.end()) s = it->second;
      else if (auto jt = inferred_.find(a.name); jt != inferred_.end()) s = jt->second;
      return coerce(a, Term::var(a.name, s), expected);
    }
    case Ast::K::Call: {
      const OpDecl& d = decl(a);
      std::vector<Term> args;
      for (std::size_t i = 0; i < a.kids.size(); ++i) args.push_back(build(a.kids[i], d.args[i]));
      return coerce(a, Term::app(d.name, std::move(args), d.result), expected);
    }
    case Ast::K::Cell: {
      const CellDecl* c = sig_.cell(a.name);
      if (!c) fail(a, "undeclared cell <" + a.name + ">");
      return Term::cell(a.name, build(a.kids[0], c->sort));
    }
    case Ast::K::Bag: {
      std::vector<Term> cells;
      for (const auto& k : a.kids) cells.push_back(build(k, Sort::cell()));
      try {
        return Term::bag(std::move(cells));
      } catch (const MalformedInput& e) {
        fail(a, e.what());
      }
    }
    case Ast::K::Rewrite:
      fail(a, "'=>' is only allowed at the top of a rule cell");
  }
  fail(a, "bad syntax");
}

inline Term Elaborator::build_side(const Ast& a, bool right, const Sort& expected) {
  if (a.k == Ast::K::Rewrite) return build(a.kids[right ? 1 : 0], expected);
  if (a.k == Ast::K::Cell) {
    const CellDecl* c = sig_.cell(a.name);
    if (!c) fail(a, "undeclared cell <" + a.name + ">");
    return Term::cell(a.name, build_side(a.kids[0], right, c->sort));
  }
  if (a.k == Ast::K::Bag) {
    std::vector<Term> cells;
    for (const auto& k : a.kids) cells.push_back(build_side(k, right, Sort::cell()));
    try {
      return Term::bag(std::move(cells));
    } catch (const MalformedInput& e) {
      fail(a, e.what());
    }
  }
  return build(a, expected);
}

/// Parses a standalone expression of the given sort.
inline Term parse_term(const Signature& sig, std::string_view text, const Sort& expected) {
  TokenStream ts(text, {});
  Ast a = ts.peek().kind == Tok::CellOpen ? ts.parse_cells(false) : ts.parse_expr(0);
  if (!ts.at_end()) ts.fail("trailing input");
  Elaborator el(sig);
  el.collect(a, expected);
  return el.build(a, a.k == Ast::K::Bag ? Sort::bag() : expected);
}

// ---------------------------------------------------------------------------
// Canonical printer

class Printer {
 public:
  /// With a signature, variables are annotated where their sort differs
  /// from the sort their position implies.
  explicit Printer(const Signature* sig = nullptr) : sig_(sig) {}

  std::string operator()(const Term& t, const Sort& expected = Sort::kitem()) const {
    std::ostringstream os;
    emit(os, t, expected, 0);
    return os.str();
  }

 private:
  static int precedence(const Term& t) {
    if (t.is_app(ops::bnot)) return 4;
    if (t.is_app() && t.args().size() == 2 && is_infix_name(t.name())) return infix_precedence(t.name());
    if (t.is_int() && t.value() < 0) return 9;
    return 100;
  }
  std::vector<Sort> arg_sorts(const Term& t) const {
    if (sig_)
      if (const OpDecl* d = sig_->op(t.name())) return d->args;
    std::vector<Sort> out;
    for (const auto& a : t.args()) out.push_back(a.sort());
    return out;
  }

  void emit(std::ostream& os, const Term& t, const Sort& expected, int min_prec) const {
    bool paren = precedence(t) < min_prec;
    if (paren) os << '(';
    emit_bare(os, t, expected);
    if (paren) os << ')';
  }

  void emit_bare(std::ostream& os, const Term& t, const Sort& expected) const {
    switch (t.kind()) {
      case Kind::Var:
        os << t.name();
        if (sig_ && t.sort() != expected) os << ':' << t.sort().name;
        return;
      case Kind::IntLit:
        os << t.value();
        return;
      case Kind::BoolLit:
        os << (t.flag() ? "true" : "false");
        return;
      case Kind::Cell:
        os << '<' << t.name() << "> ";
        emit(os, t.body(), cell_sort(t), 0);
        os << " </" << t.name() << '>';
        return;
      case Kind::Bag: {
        bool first = true;
        for (const auto& c : t.args()) {
          if (!first) os << ' ';
          first = false;
          emit_bare(os, c, Sort::cell());
        }
        return;
      }
      case Kind::App:
        break;
    }
    if (t.is_app(ops::kseq)) {
      // A lone variable would read back as a K variable.
      if (t.args()[0].is_var() && t.args()[1].is_app(ops::kdot)) {
        emit_bare(os, t.args()[0], Sort::k());
        return;
      }
      const Term* cur = &t;
      bool first = true;
      while (cur->is_app(ops::kseq)) {
        if (!first) os << " ~> ";
        first = false;
        emit(os, cur->args()[0], Sort::kitem(), 2);
        cur = &cur->args()[1];
      }
      if (!cur->is_app(ops::kdot)) {
        os << " ~> ";
        emit(os, *cur, Sort::k(), 2);
      }
      return;
    }
    auto sorts = arg_sorts(t);
    if (t.is_app(ops::bnot)) {
      os << "notBool ";
      emit(os, t.args()[0], sorts[0], 5);
      return;
    }
    if (t.args().size() == 2 && is_infix_name(t.name())) {
      int p = infix_precedence(t.name());
      bool right = infix_right_assoc(t.name());
      bool nonassoc = p == 5;
      emit(os, t.args()[0], sorts[0], right || nonassoc ? p + 1 : p);
      os << ' ' << t.name() << ' ';
      emit(os, t.args()[1], sorts[1], right ? p : p + 1);
      return;
    }
    os << t.name();
    if (t.args().empty()) return;
    os << '(';
    for (std::size_t i = 0; i < t.args().size(); ++i) {
      if (i) os << ", ";
      emit(os, t.args()[i], sorts[i], 0);
    }
    os << ')';
  }

  Sort cell_sort(const Term& c) const {
    if (sig_)
      if (const CellDecl* d = sig_->cell(c.name())) return d->sort;
    return c.body().sort();
  }

  const Signature* sig_;
};

inline std::string to_string(const Term& t) { return Printer()(t); }

}  // namespace prooforge
