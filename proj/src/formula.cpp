#include "pgame/formula.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace pgame {

std::string_view to_string(Sort s) { return s == Sort::Ack ? "ack" : "int"; }

// ---------------------------------------------------------------------------
// Signature

namespace {

Natural checked_add(Natural a, Natural b) {
  if (a > std::numeric_limits<Natural>::max() - b) throw Error("integer overflow in term evaluation");
  return a + b;
}

Natural checked_mul(Natural a, Natural b) {
  if (a != 0 && b > std::numeric_limits<Natural>::max() / a)
    throw Error("integer overflow in term evaluation");
  return a * b;
}

}  // namespace

Evaluator builtin_evaluator(std::string_view builtin, std::size_t arity) {
  if (builtin == "zero" && arity == 0) return [](std::span<const Natural>) -> Natural { return 0; };
  if (builtin == "succ" && arity == 1)
    return [](std::span<const Natural> a) { return checked_add(a[0], 1); };
  if (builtin == "add" && arity == 2)
    return [](std::span<const Natural> a) { return checked_add(a[0], a[1]); };
  if (builtin == "mul" && arity == 2)
    return [](std::span<const Natural> a) { return checked_mul(a[0], a[1]); };
  return {};
}

Signature::Signature() {
  add_builtin_function("0", 0, "zero");
  add_builtin_function("s", 1, "succ");
}

void Signature::claim(const std::string& name) {
  if (name.empty()) throw Error("empty symbol name");
  if (declares(name)) throw Error("duplicate name '" + name + "'");
}

void Signature::add_predicate(const std::string& name, std::vector<Sort> sorts) {
  claim(name);
  predicates_.emplace(name, std::move(sorts));
}

void Signature::add_function(const std::string& name, std::size_t arity, Evaluator eval) {
  claim(name);
  if (!eval) throw Error("function '" + name + "' has no evaluator");
  functions_.emplace(name, FunctionSymbol{name, arity, "", std::move(eval)});
}

void Signature::add_builtin_function(const std::string& name, std::size_t arity,
                                     const std::string& builtin) {
  auto eval = builtin_evaluator(builtin, arity);
  if (!eval) throw Error("unknown builtin '" + builtin + "' of arity " + std::to_string(arity));
  claim(name);
  functions_.emplace(name, FunctionSymbol{name, arity, builtin, std::move(eval)});
}

void Signature::add_constant(const std::string& name) {
  claim(name);
  constants_.insert(name);
}

const std::vector<Sort>* Signature::predicate(std::string_view name) const {
  auto it = predicates_.find(name);
  return it == predicates_.end() ? nullptr : &it->second;
}

const FunctionSymbol* Signature::function(std::string_view name) const {
  auto it = functions_.find(name);
  return it == functions_.end() ? nullptr : &it->second;
}

bool Signature::has_constant(std::string_view name) const { return constants_.contains(name); }

bool Signature::declares(std::string_view name) const {
  return predicates_.contains(name) || functions_.contains(name) || constants_.contains(name);
}

// ---------------------------------------------------------------------------
// Term

struct Term::Node {
  Kind kind;
  std::string name;
  Natural value = 0;
  std::vector<Term> args;
  bool closed = true;
};

Term Term::int_var(std::string name) {
  return Term(std::make_shared<const Node>(Node{Kind::IntVar, std::move(name), 0, {}, false}));
}

Term Term::int_lit(Natural value) {
  return Term(std::make_shared<const Node>(Node{Kind::IntLit, {}, value, {}, true}));
}

Term Term::app(std::string function, std::vector<Term> args) {
  bool closed = std::all_of(args.begin(), args.end(), [](const Term& t) { return t.is_closed(); });
  return Term(std::make_shared<const Node>(Node{Kind::FunApp, std::move(function), 0, std::move(args), closed}));
}

Term Term::ack_var(std::string name) {
  return Term(std::make_shared<const Node>(Node{Kind::AckVar, std::move(name), 0, {}, false}));
}

Term Term::constant(std::string name) {
  return Term(std::make_shared<const Node>(Node{Kind::AckConst, std::move(name), 0, {}, true}));
}

Term Term::var(const Variable& v) { return v.sort == Sort::Ack ? ack_var(v.name) : int_var(v.name); }

Term::Kind Term::kind() const { return node_->kind; }

Sort Term::sort() const {
  return (node_->kind == Kind::AckVar || node_->kind == Kind::AckConst) ? Sort::Ack : Sort::Int;
}

const std::string& Term::name() const { return node_->name; }
Natural Term::value() const { return node_->value; }
std::span<const Term> Term::args() const { return node_->args; }
bool Term::is_closed() const { return node_->closed; }

// ---------------------------------------------------------------------------
// Formula

struct Formula::Node {
  Kind kind = Kind::Falsum;
  std::string predicate;
  Variable var;
  std::vector<Term> terms;
  std::vector<Formula> sub;
  bool core = true;
};

Formula::Formula() {
  static const auto falsum_node = std::make_shared<const Node>();
  node_ = falsum_node;
}

Formula Formula::falsum() { return Formula(); }

Formula Formula::atom(std::string predicate, std::vector<Term> args) {
  Node n;
  n.kind = Kind::Atom;
  n.predicate = std::move(predicate);
  n.terms = std::move(args);
  return Formula(std::make_shared<const Node>(std::move(n)));
}

Formula Formula::implies(Formula premise, Formula conclusion) {
  Node n;
  n.kind = Kind::Implies;
  n.core = premise.is_core() && conclusion.is_core();
  n.sub = {std::move(premise), std::move(conclusion)};
  return Formula(std::make_shared<const Node>(std::move(n)));
}

Formula Formula::implies_chain(std::span<const Formula> premises, Formula conclusion) {
  Formula out = std::move(conclusion);
  for (auto it = premises.rbegin(); it != premises.rend(); ++it) out = implies(*it, out);
  return out;
}

Formula Formula::forall(Variable v, Formula body) {
  Node n;
  n.kind = Kind::Forall;
  n.var = std::move(v);
  n.core = body.is_core();
  n.sub = {std::move(body)};
  return Formula(std::make_shared<const Node>(std::move(n)));
}

Formula Formula::forall(std::span<const Variable> vs, Formula body) {
  for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = forall(*it, body);
  return body;
}

Formula Formula::guard(Term left, Term right, Formula body) {
  Node n;
  n.kind = Kind::Guard;
  n.terms = {std::move(left), std::move(right)};
  n.core = body.is_core();
  n.sub = {std::move(body)};
  return Formula(std::make_shared<const Node>(std::move(n)));
}

Formula Formula::negation(Formula f) {
  Node n;
  n.kind = Kind::Not;
  n.core = false;
  n.sub = {std::move(f)};
  return Formula(std::make_shared<const Node>(std::move(n)));
}

#define PGAME_BINARY_SUGAR(fn, K)                                  \
  Formula Formula::fn(Formula f, Formula g) {                      \
    Node n;                                                        \
    n.kind = Kind::K;                                              \
    n.core = false;                                                \
    n.sub = {std::move(f), std::move(g)};                          \
    return Formula(std::make_shared<const Node>(std::move(n)));    \
  }

PGAME_BINARY_SUGAR(conj, And)
PGAME_BINARY_SUGAR(disj, Or)
PGAME_BINARY_SUGAR(iff, Iff)
PGAME_BINARY_SUGAR(exclusive_or, Xor)
#undef PGAME_BINARY_SUGAR

Formula Formula::exists(Variable v, Formula body) {
  Node n;
  n.kind = Kind::Exists;
  n.var = std::move(v);
  n.core = false;
  n.sub = {std::move(body)};
  return Formula(std::make_shared<const Node>(std::move(n)));
}

Formula::Kind Formula::kind() const { return node_->kind; }
bool Formula::is_core() const { return node_->core; }

const std::string& Formula::predicate() const {
  if (kind() != Kind::Atom) throw std::logic_error("predicate() on non-atom");
  return node_->predicate;
}

std::span<const Term> Formula::args() const {
  if (kind() != Kind::Atom) throw std::logic_error("args() on non-atom");
  return node_->terms;
}

const Formula& Formula::first() const {
  if (node_->sub.empty()) throw std::logic_error("first() on atomic formula");
  return node_->sub[0];
}

const Formula& Formula::second() const {
  if (node_->sub.size() < 2) throw std::logic_error("second() on non-binary formula");
  return node_->sub[1];
}

const Variable& Formula::bound() const {
  if (kind() != Kind::Forall && kind() != Kind::Exists) throw std::logic_error("bound() on non-binder");
  return node_->var;
}

const Term& Formula::guard_left() const {
  if (kind() != Kind::Guard) throw std::logic_error("guard_left() on non-guard");
  return node_->terms[0];
}

const Term& Formula::guard_right() const {
  if (kind() != Kind::Guard) throw std::logic_error("guard_right() on non-guard");
  return node_->terms[1];
}

// ---------------------------------------------------------------------------
// Variables and constants

namespace {

void collect_free(const Term& t, const std::vector<std::string>& bound, std::set<Variable>& out) {
  switch (t.kind()) {
    case Term::Kind::IntVar:
    case Term::Kind::AckVar:
      if (std::find(bound.begin(), bound.end(), t.name()) == bound.end())
        out.insert(Variable{t.name(), t.sort()});
      break;
    case Term::Kind::FunApp:
      for (const auto& a : t.args()) collect_free(a, bound, out);
      break;
    default:
      break;
  }
}

void collect_free(const Formula& f, std::vector<std::string>& bound, std::set<Variable>& out) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Falsum:
      return;
    case K::Atom:
      for (const auto& a : f.args()) collect_free(a, bound, out);
      return;
    case K::Forall:
    case K::Exists:
      bound.push_back(f.bound().name);
      collect_free(f.body(), bound, out);
      bound.pop_back();
      return;
    case K::Guard:
      collect_free(f.guard_left(), bound, out);
      collect_free(f.guard_right(), bound, out);
      collect_free(f.body(), bound, out);
      return;
    case K::Not:
      collect_free(f.first(), bound, out);
      return;
    default:
      collect_free(f.first(), bound, out);
      collect_free(f.second(), bound, out);
      return;
  }
}

template <typename TermFn, typename VarFn>
void walk(const Formula& f, TermFn&& on_term, VarFn&& on_binder) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Falsum:
      return;
    case K::Atom:
      for (const auto& a : f.args()) on_term(a);
      return;
    case K::Forall:
    case K::Exists:
      on_binder(f.bound());
      walk(f.body(), on_term, on_binder);
      return;
    case K::Guard:
      on_term(f.guard_left());
      on_term(f.guard_right());
      walk(f.body(), on_term, on_binder);
      return;
    case K::Not:
      walk(f.first(), on_term, on_binder);
      return;
    default:
      walk(f.first(), on_term, on_binder);
      walk(f.second(), on_term, on_binder);
      return;
  }
}

template <typename Fn>
void walk_term(const Term& t, Fn&& fn) {
  fn(t);
  for (const auto& a : t.args()) walk_term(a, fn);
}

}  // namespace

std::set<Variable> free_vars(const Term& t) {
  std::set<Variable> out;
  collect_free(t, {}, out);
  return out;
}

std::set<Variable> free_vars(const Formula& f) {
  std::set<Variable> out;
  std::vector<std::string> bound;
  collect_free(f, bound, out);
  return out;
}

bool is_closed(const Formula& f) { return free_vars(f).empty(); }

std::vector<std::string> constants_of(const Formula& f) {
  std::vector<std::string> out;
  walk(
      f,
      [&](const Term& t) {
        walk_term(t, [&](const Term& s) {
          if (s.kind() == Term::Kind::AckConst && std::find(out.begin(), out.end(), s.name()) == out.end())
            out.push_back(s.name());
        });
      },
      [](const Variable&) {});
  return out;
}

std::set<Natural> literals_of(const Formula& f) {
  std::set<Natural> out;
  walk(
      f,
      [&](const Term& t) {
        walk_term(t, [&](const Term& s) {
          if (s.kind() == Term::Kind::IntLit) out.insert(s.value());
        });
      },
      [](const Variable&) {});
  return out;
}

std::set<std::string> variable_names(const Formula& f) {
  std::set<std::string> out;
  walk(
      f,
      [&](const Term& t) {
        walk_term(t, [&](const Term& s) {
          if (s.is_variable()) out.insert(s.name());
        });
      },
      [&](const Variable& v) { out.insert(v.name); });
  return out;
}

// ---------------------------------------------------------------------------
// Substitution

namespace {

Term subst_term(const Term& t, const std::map<std::string, Term>& b) {
  switch (t.kind()) {
    case Term::Kind::IntVar:
    case Term::Kind::AckVar: {
      auto it = b.find(t.name());
      return it == b.end() ? t : it->second;
    }
    case Term::Kind::FunApp: {
      if (t.is_closed()) return t;
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (const auto& a : t.args()) args.push_back(subst_term(a, b));
      return Term::app(t.name(), std::move(args));
    }
    default:
      return t;
  }
}

Formula subst(const Formula& f, const std::map<std::string, Term>& b) {
  if (b.empty()) return f;
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Falsum:
      return f;
    case K::Atom: {
      std::vector<Term> args;
      args.reserve(f.args().size());
      for (const auto& a : f.args()) args.push_back(subst_term(a, b));
      return Formula::atom(f.predicate(), std::move(args));
    }
    case K::Forall:
    case K::Exists: {
      auto inner = b;
      inner.erase(f.bound().name);
      if (inner.empty()) return f;
      Variable bound = f.bound();
      Formula body = f.body();
      std::set<std::string> incoming;
      for (const auto& [name, t] : inner)
        if (!t.is_closed())
          for (const auto& v : free_vars(t)) incoming.insert(v.name);
      if (incoming.count(bound.name)) {
        std::set<std::string> used = variable_names(body);
        used.insert(incoming.begin(), incoming.end());
        std::string fresh;
        for (int k = 1; used.count(fresh = bound.name + std::to_string(k)); ++k) {
        }
        const Variable renamed{fresh, bound.sort};
        body = subst(body, {{bound.name, Term::var(renamed)}});
        bound = renamed;
      }
      body = subst(body, inner);
      return f.kind() == K::Forall ? Formula::forall(bound, body) : Formula::exists(bound, body);
    }
    case K::Guard:
      return Formula::guard(subst_term(f.guard_left(), b), subst_term(f.guard_right(), b), subst(f.body(), b));
    case K::Implies:
      return Formula::implies(subst(f.first(), b), subst(f.second(), b));
    case K::Not:
      return Formula::negation(subst(f.first(), b));
    case K::And:
      return Formula::conj(subst(f.first(), b), subst(f.second(), b));
    case K::Or:
      return Formula::disj(subst(f.first(), b), subst(f.second(), b));
    case K::Iff:
      return Formula::iff(subst(f.first(), b), subst(f.second(), b));
    case K::Xor:
      return Formula::exclusive_or(subst(f.first(), b), subst(f.second(), b));
  }
  return f;
}

}  // namespace

Formula substitute(const Formula& f, const std::map<Variable, Term>& binding) {
  std::map<std::string, Term> b;
  for (const auto& [v, t] : binding) {
    if (!t.is_closed()) throw SortError("substituted value for '" + v.name + "' is not closed", "");
    if (t.sort() != v.sort)
      throw SortError("value for '" + v.name + "' has sort " + std::string(to_string(t.sort())) +
                          ", expected " + std::string(to_string(v.sort)),
                      "");
    b.emplace(v.name, t);
  }
  return subst(f, b);
}

Formula replace_free(const Formula& f, const Variable& v, const Term& t) {
  return subst(f, {{v.name, t}});
}

Term replace_free(const Term& term, const Variable& v, const Term& t) {
  return subst_term(term, {{v.name, t}});
}

// ---------------------------------------------------------------------------
// Canonical keys

namespace {

struct KeyWriter {
  std::string& out;
  const ConstantRenaming* renaming;
  std::vector<std::string> binders;

  void term(const Term& t) {
    switch (t.kind()) {
      case Term::Kind::IntVar:
      case Term::Kind::AckVar: {
        auto it = std::find(binders.rbegin(), binders.rend(), t.name());
        if (it != binders.rend()) {
          out += '#';
          out += std::to_string(it - binders.rbegin());
        } else {
          out += t.kind() == Term::Kind::IntVar ? "vi:" : "va:";
          out += t.name();
        }
        return;
      }
      case Term::Kind::IntLit:
        out += std::to_string(t.value());
        return;
      case Term::Kind::AckConst: {
        out += "c:";
        if (renaming) {
          auto it = renaming->find(t.name());
          out += it == renaming->end() ? t.name() : it->second;
        } else {
          out += t.name();
        }
        return;
      }
      case Term::Kind::FunApp:
        out += "f:";
        out += t.name();
        out += '(';
        for (std::size_t i = 0; i < t.args().size(); ++i) {
          if (i) out += ',';
          term(t.args()[i]);
        }
        out += ')';
        return;
    }
  }

  void formula(const Formula& f) {
    using K = Formula::Kind;
    switch (f.kind()) {
      case K::Falsum:
        out += 'F';
        return;
      case K::Atom:
        out += 'A';
        out += f.predicate();
        out += '(';
        for (std::size_t i = 0; i < f.args().size(); ++i) {
          if (i) out += ',';
          term(f.args()[i]);
        }
        out += ')';
        return;
      case K::Forall:
      case K::Exists:
        out += f.kind() == K::Forall ? 'Q' : 'E';
        out += f.bound().sort == Sort::Ack ? 'a' : 'i';
        out += '(';
        binders.push_back(f.bound().name);
        formula(f.body());
        binders.pop_back();
        out += ')';
        return;
      case K::Guard:
        out += "G(";
        term(f.guard_left());
        out += '=';
        term(f.guard_right());
        out += ',';
        formula(f.body());
        out += ')';
        return;
      case K::Not:
        out += "N(";
        formula(f.first());
        out += ')';
        return;
      default: {
        char tag = f.kind() == K::Implies ? 'I'
                   : f.kind() == K::And   ? '&'
                   : f.kind() == K::Or    ? '|'
                   : f.kind() == K::Iff   ? '='
                                          : '^';
        out += tag;
        out += '(';
        formula(f.first());
        out += ',';
        formula(f.second());
        out += ')';
        return;
      }
    }
  }
};

}  // namespace

std::string canonical_key(const Formula& f, const ConstantRenaming* renaming) {
  std::string out;
  out.reserve(64);
  KeyWriter w{out, renaming, {}};
  w.formula(f);
  return out;
}

std::string canonical_key(const Term& t, const ConstantRenaming* renaming) {
  std::string out;
  KeyWriter w{out, renaming, {}};
  w.term(t);
  return out;
}

bool alpha_equal(const Formula& f, const Formula& g) {
  return f.same_node(g) || canonical_key(f) == canonical_key(g);
}

// ---------------------------------------------------------------------------
// Integer terms

namespace {

Natural eval(const Term& t, const Signature& sig, std::size_t& budget) {
  switch (t.kind()) {
    case Term::Kind::IntLit:
      return t.value();
    case Term::Kind::FunApp: {
      const FunctionSymbol* fs = sig.function(t.name());
      if (!fs) throw Error("unknown function symbol '" + t.name() + "'");
      if (fs->arity != t.args().size())
        throw SortError("function '" + t.name() + "' expects " + std::to_string(fs->arity) + " arguments", "");
      if (budget == 0) throw Error("evaluation budget exceeded");
      --budget;
      std::vector<Natural> vals;
      vals.reserve(t.args().size());
      for (const auto& a : t.args()) vals.push_back(eval(a, sig, budget));
      return fs->eval(vals);
    }
    case Term::Kind::IntVar:
      throw Error("cannot evaluate term with free variable '" + t.name() + "'");
    default:
      throw SortError("cannot evaluate an acknowledgement term as an integer", "");
  }
}

}  // namespace

Natural evaluate_term(const Term& t, const Signature& sig) {
  std::size_t budget = sig.eval_budget;
  return eval(t, sig, budget);
}

Term evaluate_closed_subterms(const Term& t, const Signature& sig) {
  if (t.kind() != Term::Kind::FunApp) return t;
  if (t.is_closed()) return Term::int_lit(evaluate_term(t, sig));
  std::vector<Term> args;
  args.reserve(t.args().size());
  for (const auto& a : t.args()) args.push_back(evaluate_closed_subterms(a, sig));
  return Term::app(t.name(), std::move(args));
}

namespace {

bool has_fun_app(const Formula& f) {
  bool found = false;
  walk(
      f, [&](const Term& t) { found = found || t.kind() == Term::Kind::FunApp; }, [](const Variable&) {});
  return found;
}

Formula eval_closed(const Formula& f, const Signature& sig) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Falsum:
      return f;
    case K::Atom: {
      std::vector<Term> args;
      for (const auto& a : f.args()) args.push_back(evaluate_closed_subterms(a, sig));
      return Formula::atom(f.predicate(), std::move(args));
    }
    case K::Forall:
      return Formula::forall(f.bound(), eval_closed(f.body(), sig));
    case K::Exists:
      return Formula::exists(f.bound(), eval_closed(f.body(), sig));
    case K::Guard:
      return Formula::guard(evaluate_closed_subterms(f.guard_left(), sig),
                            evaluate_closed_subterms(f.guard_right(), sig), eval_closed(f.body(), sig));
    case K::Implies:
      return Formula::implies(eval_closed(f.first(), sig), eval_closed(f.second(), sig));
    case K::Not:
      return Formula::negation(eval_closed(f.first(), sig));
    case K::And:
      return Formula::conj(eval_closed(f.first(), sig), eval_closed(f.second(), sig));
    case K::Or:
      return Formula::disj(eval_closed(f.first(), sig), eval_closed(f.second(), sig));
    case K::Iff:
      return Formula::iff(eval_closed(f.first(), sig), eval_closed(f.second(), sig));
    case K::Xor:
      return Formula::exclusive_or(eval_closed(f.first(), sig), eval_closed(f.second(), sig));
  }
  return f;
}

}  // namespace

Formula evaluate_closed_terms(const Formula& f, const Signature& sig) {
  if (!has_fun_app(f)) return f;
  return eval_closed(f, sig);
}

// ---------------------------------------------------------------------------
// Sort checking

namespace {

struct SortChecker {
  const Signature& sig;
  std::vector<Variable> binders;
  std::vector<int> path;

  std::string where() const {
    std::string s = "root";
    for (int p : path) s += "." + std::to_string(p);
    return s;
  }

  void check_term(const Term& t, Sort expected) {
    if (t.sort() != expected)
      throw SortError("term of sort " + std::string(to_string(t.sort())) + " where " +
                          std::string(to_string(expected)) + " is expected",
                      where());
    switch (t.kind()) {
      case Term::Kind::IntVar:
      case Term::Kind::AckVar: {
        auto it = std::find_if(binders.rbegin(), binders.rend(),
                               [&](const Variable& v) { return v.name == t.name(); });
        if (it != binders.rend() && it->sort != t.sort())
          throw SortError("variable '" + t.name() + "' is bound with sort " + std::string(to_string(it->sort)),
                          where());
        return;
      }
      case Term::Kind::FunApp: {
        const FunctionSymbol* fs = sig.function(t.name());
        if (!fs) throw SortError("unknown function symbol '" + t.name() + "'", where());
        if (fs->arity != t.args().size())
          throw SortError("function '" + t.name() + "' expects " + std::to_string(fs->arity) + " arguments",
                          where());
        for (const auto& a : t.args()) check_term(a, Sort::Int);
        return;
      }
      default:
        return;
    }
  }

  void check(const Formula& f) {
    using K = Formula::Kind;
    switch (f.kind()) {
      case K::Falsum:
        return;
      case K::Atom: {
        const auto* sorts = sig.predicate(f.predicate());
        if (!sorts) throw SortError("unknown predicate '" + f.predicate() + "'", where());
        if (sorts->size() != f.args().size())
          throw SortError("predicate '" + f.predicate() + "' expects " + std::to_string(sorts->size()) +
                              " arguments, got " + std::to_string(f.args().size()),
                          where());
        for (std::size_t i = 0; i < sorts->size(); ++i) check_term(f.args()[i], (*sorts)[i]);
        return;
      }
      case K::Forall:
      case K::Exists:
        binders.push_back(f.bound());
        path.push_back(0);
        check(f.body());
        path.pop_back();
        binders.pop_back();
        return;
      case K::Guard:
        check_term(f.guard_left(), Sort::Int);
        check_term(f.guard_right(), Sort::Int);
        path.push_back(0);
        check(f.body());
        path.pop_back();
        return;
      case K::Not:
        path.push_back(0);
        check(f.first());
        path.pop_back();
        return;
      default:
        path.push_back(0);
        check(f.first());
        path.back() = 1;
        check(f.second());
        path.pop_back();
        return;
    }
  }
};

}  // namespace

void check_well_sorted(const Formula& f, const Signature& sig) {
  SortChecker c{sig, {}, {}};
  c.check(f);
}

// ---------------------------------------------------------------------------
// Sugar

Formula expand_sugar(const Formula& f) {
  if (f.is_core()) return f;
  using K = Formula::Kind;
  const Formula bot = Formula::falsum();
  auto neg = [&](Formula x) { return Formula::implies(std::move(x), bot); };
  switch (f.kind()) {
    case K::Implies:
      return Formula::implies(expand_sugar(f.first()), expand_sugar(f.second()));
    case K::Forall:
      return Formula::forall(f.bound(), expand_sugar(f.body()));
    case K::Guard:
      return Formula::guard(f.guard_left(), f.guard_right(), expand_sugar(f.body()));
    case K::Not:
      return neg(expand_sugar(f.first()));
    case K::And: {
      // (F, G -> false) -> false
      auto a = expand_sugar(f.first());
      auto b = expand_sugar(f.second());
      return neg(Formula::implies(a, neg(b)));
    }
    case K::Or: {
      // not F, not G -> false
      auto a = expand_sugar(f.first());
      auto b = expand_sugar(f.second());
      return Formula::implies(neg(a), neg(neg(b)));
    }
    case K::Iff: {
      // (F -> G), (G -> F) -> false) -> false
      auto a = expand_sugar(f.first());
      auto b = expand_sugar(f.second());
      return neg(Formula::implies(Formula::implies(a, b), neg(Formula::implies(b, a))));
    }
    case K::Xor:
      return expand_sugar(Formula::iff(Formula::negation(f.first()), f.second()));
    case K::Exists:
      // forall x (F -> false) -> false
      return neg(Formula::forall(f.bound(), neg(expand_sugar(f.body()))));
    default:
      return f;
  }
}

Formula expand_sugar(const Formula& f, const Signature& sig) {
  check_well_sorted(f, sig);
  return expand_sugar(f);
}

Formula rename_predicates(const Formula& f, const std::map<std::string, std::string>& names) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Falsum:
      return f;
    case K::Atom: {
      auto it = names.find(f.predicate());
      if (it == names.end()) return f;
      return Formula::atom(it->second, std::vector<Term>(f.args().begin(), f.args().end()));
    }
    case K::Forall:
      return Formula::forall(f.bound(), rename_predicates(f.body(), names));
    case K::Exists:
      return Formula::exists(f.bound(), rename_predicates(f.body(), names));
    case K::Guard:
      return Formula::guard(f.guard_left(), f.guard_right(), rename_predicates(f.body(), names));
    case K::Not:
      return Formula::negation(rename_predicates(f.first(), names));
    case K::Implies:
      return Formula::implies(rename_predicates(f.first(), names), rename_predicates(f.second(), names));
    case K::And:
      return Formula::conj(rename_predicates(f.first(), names), rename_predicates(f.second(), names));
    case K::Or:
      return Formula::disj(rename_predicates(f.first(), names), rename_predicates(f.second(), names));
    case K::Iff:
      return Formula::iff(rename_predicates(f.first(), names), rename_predicates(f.second(), names));
    case K::Xor:
      return Formula::exclusive_or(rename_predicates(f.first(), names), rename_predicates(f.second(), names));
  }
  return f;
}

std::string debug_string(const Formula& f) { return canonical_key(f); }

}  // namespace pgame
