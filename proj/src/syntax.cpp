#include "pgame/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "pgame/normal.hpp"

namespace pgame {

SyntaxError::SyntaxError(const std::string& message, std::string origin, int line, int column)
    : Error(origin + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      origin_(std::move(origin)),
      line_(line),
      column_(column) {}

namespace {

enum class Tok { Name, Nat, Arrow, DArrow, And, Or, LParen, RParen, Comma, Dot, Eq, Colon, Star, Slash, Assign, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Natural value = 0;
  int line = 1;
  int col = 1;
  std::size_t offset = 0;
  std::size_t end = 0;
};

bool name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

std::vector<Token> lex(const SourceText& src) {
  std::vector<Token> out;
  const std::string& s = src.text;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    t.offset = i;
    if (c == '#' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
      // engine-minted constant such as #0
      std::size_t j = i + 1;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      t.kind = Tok::Name;
      t.text = s.substr(i, j - i);
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (c == '#') {
      while (i < s.size() && s[i] != '\n') advance(1);
      continue;
    }
    if (name_start(c)) {
      std::size_t j = i;
      while (j < s.size() && name_char(s[j])) ++j;
      t.kind = Tok::Name;
      t.text = s.substr(i, j - i);
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      Natural v = 0;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
        Natural d = static_cast<Natural>(s[j] - '0');
        if (v > (std::numeric_limits<Natural>::max() - d) / 10)
          throw SyntaxError("integer literal too large", src.origin, line, col);
        v = v * 10 + d;
        ++j;
      }
      t.kind = Tok::Nat;
      t.value = v;
      t.text = s.substr(i, j - i);
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    auto starts = [&](std::string_view p) { return s.compare(i, p.size(), p) == 0; };
    struct Sym {
      std::string_view text;
      Tok kind;
    };
    static constexpr Sym syms[] = {
        {"<->", Tok::DArrow}, {"->", Tok::Arrow}, {":=", Tok::Assign}, {"/\\", Tok::And}, {"\\/", Tok::Or},
        {"(", Tok::LParen},   {")", Tok::RParen}, {",", Tok::Comma},   {".", Tok::Dot},    {"=", Tok::Eq},
        {":", Tok::Colon},    {"*", Tok::Star},   {"/", Tok::Slash},
    };
    bool matched = false;
    for (const auto& sym : syms) {
      if (starts(sym.text)) {
        t.kind = sym.kind;
        t.text = std::string(sym.text);
        advance(sym.text.size());
        out.push_back(std::move(t));
        matched = true;
        break;
      }
    }
    if (!matched) throw SyntaxError(std::string("unexpected character '") + c + "'", src.origin, line, col);
  }
  for (auto& t : out) t.end = t.offset + t.text.size();
  Token end;
  end.kind = Tok::End;
  end.line = line;
  end.col = col;
  end.offset = s.size();
  end.end = s.size();
  out.push_back(end);
  return out;
}

bool is_keyword(std::string_view n) {
  return n == "forall" || n == "exists" || n == "not" || n == "false" || n == "xor" || n == "pred" || n == "fun" ||
         n == "const" || n == "formula" || n == "ack" || n == "int";
}

// Untyped term as written.
struct PTerm {
  Token tok;
  bool applied = false;
  std::vector<PTerm> args;
};

struct Binder {
  std::string name;
  std::optional<Sort> sort;
  const Token* at = nullptr;
};

class Parser {
 public:
  Parser(const SourceText& src, std::vector<Token> toks) : src_(src), toks_(std::move(toks)) {}

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_word(std::string_view w) const { return at(Tok::Name) && peek().text == w; }
  const Token& take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw SyntaxError(msg, src_.origin, t.line, t.col);
  }
  [[noreturn]] void fail(const std::string& msg) const { fail(peek(), msg); }

  std::string describe(const Token& t) const {
    if (t.kind == Tok::End) return "end of input";
    return "'" + t.text + "'";
  }

  const Token& expect(Tok k, std::string_view what) {
    if (!at(k)) fail("expected " + std::string(what) + ", found " + describe(peek()));
    return take();
  }

  std::string expect_name(std::string_view what) {
    if (!at(Tok::Name) || is_keyword(peek().text))
      fail("expected " + std::string(what) + ", found " + describe(peek()));
    return take().text;
  }

  // ---- signature ----

  Sort parse_sort() {
    if (at_word("ack")) {
      take();
      return Sort::Ack;
    }
    if (at_word("int")) {
      take();
      return Sort::Int;
    }
    fail("expected sort 'ack' or 'int', found " + describe(peek()));
  }

  void parse_declaration(Signature& sig) {
    const Token& kw = take();
    try {
      if (kw.text == "pred") {
        std::string name = expect_name("predicate name");
        expect(Tok::Colon, "':'");
        std::vector<Sort> sorts;
        if (at(Tok::LParen)) {
          take();
          expect(Tok::RParen, "')'");
        } else {
          sorts.push_back(parse_sort());
          while (at(Tok::Star)) {
            take();
            sorts.push_back(parse_sort());
          }
        }
        sig.add_predicate(name, std::move(sorts));
      } else if (kw.text == "fun") {
        std::string name = expect_name("function name");
        expect(Tok::Slash, "'/'");
        Natural arity = expect(Tok::Nat, "arity").value;
        expect(Tok::Eq, "'='");
        std::string builtin = expect_name("builtin (zero, succ, add, mul)");
        if (!builtin_evaluator(builtin, arity))
          fail(kw, "unknown builtin '" + builtin + "' of arity " + std::to_string(arity));
        sig.add_builtin_function(name, arity, builtin);
      } else {
        sig.add_constant(expect_name("constant name"));
        while (at(Tok::Comma)) {
          take();
          sig.add_constant(expect_name("constant name"));
        }
      }
    } catch (const SyntaxError&) {
      throw;
    } catch (const Error& e) {
      fail(kw, e.what());
    }
  }

  bool at_declaration() const { return at_word("pred") || at_word("fun") || at_word("const"); }

  // ---- formulas ----

  void begin_formula(const Signature* sig, bool allow_free) {
    sig_ = sig;
    allow_free_ = allow_free;
    scope_.clear();
  }

  Formula formula() {
    if (guard_ahead()) {
      PTerm l = pterm();
      take();  // '='
      PTerm r = pterm();
      if (!at(Tok::Arrow)) fail("an equation must be followed by '->'");
      take();
      Term lt = build_term(l, Sort::Int);
      Term rt = build_term(r, Sort::Int);
      return Formula::guard(std::move(lt), std::move(rt), formula());
    }
    std::vector<Formula> items{iff()};
    while (at(Tok::Comma)) {
      take();
      items.push_back(iff());
    }
    if (at(Tok::Arrow)) {
      take();
      Formula concl = formula();
      return Formula::implies_chain(items, std::move(concl));
    }
    if (items.size() > 1) fail("a premise list must be followed by '->'");
    return items.front();
  }

  // NAME/NAT term followed by '=' starts a guard.
  bool guard_ahead() {
    if (!at(Tok::Name) && !at(Tok::Nat)) return false;
    if (at(Tok::Name) && is_keyword(peek().text)) return false;
    std::size_t save = pos_;
    bool ok = false;
    try {
      skip_term();
      ok = at(Tok::Eq);
    } catch (const SyntaxError&) {
      ok = false;
    }
    pos_ = save;
    return ok;
  }

  void skip_term() {
    if (at(Tok::Nat)) {
      take();
      return;
    }
    expect(Tok::Name, "term");
    if (at(Tok::LParen)) {
      take();
      skip_term();
      while (at(Tok::Comma)) {
        take();
        skip_term();
      }
      expect(Tok::RParen, "')'");
    }
  }

  Formula iff() {
    Formula f = disj();
    for (;;) {
      if (at(Tok::DArrow)) {
        take();
        f = Formula::iff(f, disj());
      } else if (at_word("xor")) {
        take();
        f = Formula::exclusive_or(f, disj());
      } else {
        return f;
      }
    }
  }

  Formula disj() {
    Formula f = conj();
    while (at(Tok::Or)) {
      take();
      f = Formula::disj(f, conj());
    }
    return f;
  }

  Formula conj() {
    Formula f = unary();
    while (at(Tok::And)) {
      take();
      f = Formula::conj(f, unary());
    }
    return f;
  }

  Formula unary() {
    if (at_word("not")) {
      take();
      return Formula::negation(unary());
    }
    if (at_word("forall") || at_word("exists")) {
      bool universal = take().text == "forall";
      std::vector<const Token*> names;
      std::vector<std::optional<Sort>> sorts;
      do {
        if (!at(Tok::Name) || is_keyword(peek().text))
          fail("expected variable name, found " + describe(peek()));
        names.push_back(&take());
        sorts.emplace_back();
        if (at(Tok::Colon)) {
          take();
          sorts.back() = parse_sort();
        }
      } while (at(Tok::Name) && !is_keyword(peek().text));
      expect(Tok::Dot, "'.'");
      const std::size_t base = scope_.size();
      for (std::size_t k = 0; k < names.size(); ++k) scope_.push_back(Binder{names[k]->text, sorts[k], names[k]});
      Formula body = unary();
      for (std::size_t k = names.size(); k-- > 0;) {
        Variable v{scope_[base + k].name, scope_[base + k].sort.value_or(Sort::Ack)};
        body = universal ? Formula::forall(std::move(v), std::move(body)) : Formula::exists(std::move(v), std::move(body));
      }
      scope_.resize(base);
      return body;
    }
    return atom();
  }

  Formula atom() {
    if (at(Tok::LParen)) {
      take();
      Formula f = formula();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (at_word("false")) {
      take();
      return Formula::falsum();
    }
    if (!at(Tok::Name) || is_keyword(peek().text)) fail("expected formula, found " + describe(peek()));
    const Token& name = take();
    const std::vector<Sort>* sorts = sig_->predicate(name.text);
    if (!sorts) fail(name, "unknown predicate '" + name.text + "'");
    std::vector<PTerm> args;
    if (at(Tok::LParen)) {
      take();
      args.push_back(pterm());
      while (at(Tok::Comma)) {
        take();
        args.push_back(pterm());
      }
      expect(Tok::RParen, "')'");
    }
    if (args.size() != sorts->size())
      fail(name, "predicate '" + name.text + "' expects " + std::to_string(sorts->size()) + " argument(s), got " +
                     std::to_string(args.size()));
    std::vector<Term> terms;
    for (std::size_t k = 0; k < args.size(); ++k) terms.push_back(build_term(args[k], (*sorts)[k]));
    return Formula::atom(name.text, std::move(terms));
  }

  PTerm pterm() {
    PTerm t;
    if (at(Tok::Nat)) {
      t.tok = take();
      return t;
    }
    if (!at(Tok::Name) || is_keyword(peek().text)) fail("expected term, found " + describe(peek()));
    t.tok = take();
    if (at(Tok::LParen)) {
      take();
      t.applied = true;
      t.args.push_back(pterm());
      while (at(Tok::Comma)) {
        take();
        t.args.push_back(pterm());
      }
      expect(Tok::RParen, "')'");
    }
    return t;
  }

  Binder* lookup(const std::string& name) {
    for (std::size_t k = scope_.size(); k-- > 0;)
      if (scope_[k].name == name) return &scope_[k];
    return nullptr;
  }

  Term build_term(const PTerm& p, Sort expected) {
    const Token& t = p.tok;
    if (t.kind == Tok::Nat) {
      if (expected != Sort::Int) fail(t, "integer literal in an ack position");
      return Term::int_lit(t.value);
    }
    if (p.applied) {
      const FunctionSymbol* fn = sig_->function(t.text);
      if (!fn) fail(t, "unknown function '" + t.text + "'");
      if (expected != Sort::Int) fail(t, "function application '" + t.text + "' in an ack position");
      if (fn->arity != p.args.size())
        fail(t, "function '" + t.text + "' expects " + std::to_string(fn->arity) + " argument(s), got " +
                    std::to_string(p.args.size()));
      std::vector<Term> args;
      for (const auto& a : p.args) args.push_back(build_term(a, Sort::Int));
      return Term::app(t.text, std::move(args));
    }
    if (Binder* b = lookup(t.text)) {
      if (b->sort && *b->sort != expected)
        fail(t, "variable '" + t.text + "' used as " + std::string(to_string(expected)) + " but bound as " +
                    std::string(to_string(*b->sort)));
      b->sort = expected;
      return Term::var(Variable{t.text, expected});
    }
    if (expected == Sort::Ack && sig_->has_constant(t.text)) return Term::constant(t.text);
    if (expected == Sort::Int) {
      const FunctionSymbol* fn = sig_->function(t.text);
      if (fn && fn->arity == 0) return Term::app(t.text, {});
    }
    if (sig_->declares(t.text))
      fail(t, "'" + t.text + "' cannot be used as " + std::string(to_string(expected)) + " term");
    if (allow_free_) return Term::var(Variable{t.text, expected});
    fail(t, "unresolved name '" + t.text + "'");
  }

  std::size_t offset() const { return peek().offset; }
  std::size_t consumed_end() const { return pos_ ? toks_[pos_ - 1].end : 0; }

 private:
  const SourceText& src_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const Signature* sig_ = nullptr;
  bool allow_free_ = false;
  std::vector<Binder> scope_;
};

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

}  // namespace

Signature parse_signature(const SourceText& src) {
  Parser p(src, lex(src));
  Signature sig;
  while (!p.at(Tok::End)) {
    if (!p.at_declaration()) p.fail("expected 'pred', 'fun' or 'const', found " + p.describe(p.peek()));
    p.parse_declaration(sig);
  }
  return sig;
}

Formula parse_formula(const SourceText& src, const Signature& sig, const ParseOptions& options) {
  Parser p(src, lex(src));
  p.begin_formula(&sig, options.allow_free_variables);
  if (p.at(Tok::End)) p.fail("empty formula");
  Formula f = p.formula();
  if (!p.at(Tok::End)) p.fail("unexpected " + p.describe(p.peek()) + " after formula");
  return f;
}

Formula parse_core_formula(std::string_view text, const Signature& sig, const ParseOptions& options) {
  return expand_sugar(parse_formula(SourceText{std::string(text)}, sig, options));
}

// ---- printing ----

std::string print_term(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::IntLit:
      return std::to_string(t.value());
    case Term::Kind::FunApp: {
      if (t.args().empty()) return t.name();
      std::string s = t.name() + "(";
      for (std::size_t k = 0; k < t.args().size(); ++k) {
        if (k) s += ", ";
        s += print_term(t.args()[k]);
      }
      return s + ")";
    }
    default:
      return t.name();
  }
}

namespace {

struct Glyphs {
  std::string_view arrow, darrow, conj, disj, neg, xr, bottom, all, ex;
};

constexpr Glyphs kAscii{" -> ", " <-> ", " /\\ ", " \\/ ", "not ", " xor ", "false", "forall ", "exists "};
constexpr Glyphs kUnicode{" → ", " ↔ ", " ∧ ", " ∨ ", "¬", " ⊕ ", "⊥", "∀", "∃"};

// 0: implication/guard, 1: iff/xor, 2: or, 3: and, 4: unary/atomic
int level(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Implies:
    case K::Guard:
      return 0;
    case K::Iff:
    case K::Xor:
      return 1;
    case K::Or:
      return 2;
    case K::And:
      return 3;
    default:
      return 4;
  }
}

class Printer {
 public:
  explicit Printer(const PrintOptions& o) : g_(o.unicode ? kUnicode : kAscii) {}

  std::string print(const Formula& f, int min_level) {
    std::string s = raw(f);
    return level(f) < min_level ? "(" + s + ")" : s;
  }

  std::string raw(const Formula& f) {
    using K = Formula::Kind;
    switch (f.kind()) {
      case K::Falsum:
        return std::string(g_.bottom);
      case K::Atom: {
        if (f.args().empty()) return f.predicate();
        std::string s = f.predicate() + "(";
        for (std::size_t k = 0; k < f.args().size(); ++k) {
          if (k) s += ", ";
          s += print_term(f.args()[k]);
        }
        return s + ")";
      }
      case K::Implies: {
        const Formula& a = f.first();
        bool wrap = level(a) == 0 || a.kind() == K::Forall || a.kind() == K::Exists;
        std::string left = wrap ? "(" + raw(a) + ")" : raw(a);
        return left + std::string(g_.arrow) + raw(f.second());
      }
      case K::Guard:
        return print_term(f.guard_left()) + " = " + print_term(f.guard_right()) + std::string(g_.arrow) +
               raw(f.body());
      case K::Forall:
      case K::Exists: {
        std::string head = std::string(f.kind() == K::Forall ? g_.all : g_.ex) + f.bound().name;
        if (f.bound().sort == Sort::Int && !free_vars(f.body()).count(f.bound())) head += " : int";
        head += ". ";
        return head + print(f.body(), 4);
      }
      case K::Not:
        return std::string(g_.neg) + print(f.body(), 4);
      case K::And:
        return print(f.first(), 3) + std::string(g_.conj) + print(f.second(), 4);
      case K::Or:
        return print(f.first(), 2) + std::string(g_.disj) + print(f.second(), 3);
      case K::Iff:
        return print(f.first(), 1) + std::string(g_.darrow) + print(f.second(), 2);
      case K::Xor:
        return print(f.first(), 1) + std::string(g_.xr) + print(f.second(), 2);
    }
    return {};
  }

 private:
  Glyphs g_;
};

// A binder whose name equals a constant in its scope would be misread on
// reparse; give it a fresh name.
Formula avoid_constant_capture(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Falsum:
    case K::Atom:
      return f;
    case K::Forall:
    case K::Exists: {
      Formula body = avoid_constant_capture(f.body());
      Variable v = f.bound();
      auto consts = constants_of(body);
      if (std::find(consts.begin(), consts.end(), v.name) != consts.end()) {
        std::set<std::string> used = variable_names(body);
        used.insert(consts.begin(), consts.end());
        FreshNames names{std::move(used)};
        Variable renamed{names.next(v.sort), v.sort};
        body = replace_free(body, v, Term::var(renamed));
        v = renamed;
      }
      return f.kind() == K::Forall ? Formula::forall(v, body) : Formula::exists(v, body);
    }
    case K::Guard:
      return Formula::guard(f.guard_left(), f.guard_right(), avoid_constant_capture(f.body()));
    case K::Not:
      return Formula::negation(avoid_constant_capture(f.body()));
    case K::Implies:
      return Formula::implies(avoid_constant_capture(f.first()), avoid_constant_capture(f.second()));
    case K::And:
      return Formula::conj(avoid_constant_capture(f.first()), avoid_constant_capture(f.second()));
    case K::Or:
      return Formula::disj(avoid_constant_capture(f.first()), avoid_constant_capture(f.second()));
    case K::Iff:
      return Formula::iff(avoid_constant_capture(f.first()), avoid_constant_capture(f.second()));
    case K::Xor:
      return Formula::exclusive_or(avoid_constant_capture(f.first()), avoid_constant_capture(f.second()));
  }
  return f;
}

}  // namespace

std::string print_formula(const Formula& f, const PrintOptions& options) {
  Printer p(options);
  return p.raw(avoid_constant_capture(f));
}

std::string print_signature(const Signature& sig) {
  std::ostringstream os;
  for (const auto& [name, sorts] : sig.predicates()) {
    os << "pred " << name << " : ";
    if (sorts.empty()) os << "()";
    for (std::size_t k = 0; k < sorts.size(); ++k) os << (k ? " * " : "") << to_string(sorts[k]);
    os << "\n";
  }
  for (const auto& [name, fn] : sig.functions()) {
    if (name == "0" || name == "s" || fn.builtin.empty()) continue;
    os << "fun " << name << " / " << fn.arity << " = " << fn.builtin << "\n";
  }
  if (!sig.constants().empty()) {
    os << "const ";
    bool first = true;
    for (const auto& c : sig.constants()) {
      os << (first ? "" : ", ") << c;
      first = false;
    }
    os << "\n";
  }
  return os.str();
}

// ---- documents ----

const NamedFormula* Document::find(std::string_view name) const {
  for (const auto& nf : formulas)
    if (nf.name == name) return &nf;
  return nullptr;
}

const NamedFormula& Document::get(std::string_view name) const {
  if (const auto* nf = find(name)) return *nf;
  throw Error("no formula named '" + std::string(name) + "' in " + origin);
}

Document parse_document(const SourceText& src) {
  Parser p(src, lex(src));
  auto sig = std::make_shared<Signature>();
  while (p.at_declaration()) p.parse_declaration(*sig);
  Document doc;
  doc.origin = src.origin;
  while (!p.at(Tok::End)) {
    if (!p.at_word("formula")) p.fail("expected 'formula', found " + p.describe(p.peek()));
    const Token kw = p.take();
    std::string name = p.expect_name("formula name");
    if (doc.find(name)) p.fail(kw, "duplicate formula name '" + name + "'");
    p.expect(Tok::Assign, "':='");
    std::size_t begin = p.offset();
    p.begin_formula(sig.get(), false);
    Formula f = p.formula();
    std::size_t end = p.consumed_end();
    if (!p.at(Tok::End) && !p.at_word("formula"))
      p.fail("unexpected " + p.describe(p.peek()) + " after formula");
    std::string text = trim(std::string_view(src.text).substr(begin, end - begin));
    doc.formulas.push_back(NamedFormula{std::move(name), std::move(f), std::move(text), kw.line});
  }
  doc.signature = std::move(sig);
  return doc;
}

Document load_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_document(SourceText{ss.str(), path.string()});
}

NormalFormula parse_game_formula(std::string_view text, const Signature& sig) {
  ParseOptions opts;
  opts.allow_free_variables = true;
  Formula f = expand_sugar(parse_formula(SourceText{std::string(text), "<move>"}, sig, opts), sig);
  std::map<Variable, Term> binding;
  for (const auto& v : free_vars(f)) {
    if (v.sort == Sort::Int) throw Error("unbound integer name '" + v.name + "' in move formula");
    binding.insert_or_assign(v, Term::constant(v.name));
  }
  if (!binding.empty()) f = substitute(f, binding);
  return is_normal(f) ? NormalFormula(f) : normalize(f);
}

}  // namespace pgame
