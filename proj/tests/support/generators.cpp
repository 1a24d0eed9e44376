#include "support/generators.hpp"

#include "pgame/syntax.hpp"

namespace pgame::testing {

std::shared_ptr<const Signature> generator_signature() {
  static const auto sig = std::make_shared<const Signature>(
      parse_signature({"pred A : ()\npred B : ()\npred P : ack\npred Q : ack\npred R : int * ack\nconst c\n"}));
  return sig;
}

namespace {

struct Gen {
  Rng& rng;
  const GenOptions& opt;
  std::vector<std::string> ack_scope;
  std::vector<std::string> int_scope;

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng); }

  Term ack_term() {
    if (!ack_scope.empty() && coin(0.7)) return Term::ack_var(ack_scope[pick(ack_scope.size())]);
    if (opt.free_variables && coin(0.3)) return Term::ack_var("w");
    return Term::constant("c");
  }

  Term int_term() {
    Term base = !int_scope.empty() && coin(0.7) ? Term::int_var(int_scope[pick(int_scope.size())])
                : opt.free_variables && coin(0.3) ? Term::int_var("k")
                                                  : Term::int_lit(pick(3));
    return coin(0.3) ? Term::app("s", {base}) : base;
  }

  Formula atom() {
    const bool fo = opt.quantifiers || opt.free_variables;
    switch (pick(fo ? (opt.integers ? 6 : 5) : 4)) {
      case 0:
        return Formula::falsum();
      case 1:
        return Formula::atom("A");
      case 2:
        return Formula::atom("B");
      case 3:
        return fo ? Formula::atom("P", {ack_term()}) : Formula::atom("P", {Term::constant("c")});
      case 4:
        return Formula::atom("Q", {ack_term()});
      default:
        return Formula::atom("R", {int_term(), ack_term()});
    }
  }

  Formula gen(int depth) {
    if (depth <= 0 || coin(0.2)) return atom();
    const std::size_t kinds = opt.sugar ? 10 : 4;
    switch (pick(kinds)) {
      case 0:
      case 1:
        return Formula::implies(gen(depth - 1), gen(depth - 1));
      case 2:
      case 3: {
        if (!opt.quantifiers) return Formula::implies(gen(depth - 1), gen(depth - 1));
        return binder(depth, false);
      }
      case 4:
        return Formula::negation(gen(depth - 1));
      case 5:
        return Formula::conj(gen(depth - 1), gen(depth - 1));
      case 6:
        return Formula::disj(gen(depth - 1), gen(depth - 1));
      case 7:
        return coin(0.5) ? Formula::iff(gen(depth - 1), gen(depth - 1))
                         : Formula::exclusive_or(gen(depth - 1), gen(depth - 1));
      case 8:
        if (!opt.quantifiers) return Formula::negation(gen(depth - 1));
        return binder(depth, true);
      default:
        if (opt.integers && (!int_scope.empty() || opt.free_variables))
          return Formula::guard(int_term(), int_term(), gen(depth - 1));
        return Formula::implies(gen(depth - 1), gen(depth - 1));
    }
  }

  Formula binder(int depth, bool exists) {
    static const char* acks[] = {"x", "y", "z"};
    static const char* ints[] = {"i", "j"};
    const bool integer = opt.integers && coin(0.3);
    Variable v{integer ? ints[pick(2)] : acks[pick(3)], integer ? Sort::Int : Sort::Ack};
    auto& scope = integer ? int_scope : ack_scope;
    scope.push_back(v.name);
    Formula body = gen(depth - 1);
    scope.pop_back();
    return exists ? Formula::exists(v, body) : Formula::forall(v, body);
  }
};

struct Renamer {
  Rng& rng;
  std::set<std::string> taken;
  std::size_t next = 0;

  std::string fresh(const std::string& base) {
    for (;;) {
      std::string name = base + "_" + std::to_string(next++ + rng() % 7);
      if (taken.insert(name).second) return name;
    }
  }

  Formula go(const Formula& f) {
    using K = Formula::Kind;
    switch (f.kind()) {
      case K::Falsum:
      case K::Atom:
        return f;
      case K::Implies:
        return Formula::implies(go(f.first()), go(f.second()));
      case K::And:
        return Formula::conj(go(f.first()), go(f.second()));
      case K::Or:
        return Formula::disj(go(f.first()), go(f.second()));
      case K::Iff:
        return Formula::iff(go(f.first()), go(f.second()));
      case K::Xor:
        return Formula::exclusive_or(go(f.first()), go(f.second()));
      case K::Not:
        return Formula::negation(go(f.first()));
      case K::Guard:
        return Formula::guard(f.guard_left(), f.guard_right(), go(f.body()));
      case K::Forall:
      case K::Exists: {
        const Variable& v = f.bound();
        Variable w{fresh(v.name), v.sort};
        Formula body = go(replace_free(f.body(), v, Term::var(w)));
        return f.kind() == K::Forall ? Formula::forall(w, body) : Formula::exists(w, body);
      }
    }
    return f;
  }
};

}  // namespace

Formula random_formula(Rng& rng, const GenOptions& options) {
  Gen g{rng, options, {}, {}};
  return g.gen(options.depth);
}

Formula rename_bound(const Formula& f, Rng& rng) {
  Renamer r{rng, variable_names(f)};
  return r.go(f);
}

bool evaluate_propositional(const Formula& f, const std::map<std::string, bool>& val) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Falsum:
      return false;
    case K::Atom: {
      auto it = val.find(print_formula(f));
      return it != val.end() && it->second;
    }
    case K::Implies:
      return !evaluate_propositional(f.first(), val) || evaluate_propositional(f.second(), val);
    case K::Not:
      return !evaluate_propositional(f.first(), val);
    case K::And:
      return evaluate_propositional(f.first(), val) && evaluate_propositional(f.second(), val);
    case K::Or:
      return evaluate_propositional(f.first(), val) || evaluate_propositional(f.second(), val);
    case K::Iff:
      return evaluate_propositional(f.first(), val) == evaluate_propositional(f.second(), val);
    case K::Xor:
      return evaluate_propositional(f.first(), val) != evaluate_propositional(f.second(), val);
    default:
      throw Error("evaluate_propositional: quantifier or guard in " + print_formula(f));
  }
}

std::set<std::string> atoms_of(const Formula& f) {
  std::set<std::string> out;
  std::function<void(const Formula&)> walk = [&](const Formula& g) {
    if (g.kind() == Formula::Kind::Atom) {
      out.insert(print_formula(g));
    } else if (g.kind() != Formula::Kind::Falsum) {
      walk(g.first());
      if (g.kind() != Formula::Kind::Not && g.kind() != Formula::Kind::Forall && g.kind() != Formula::Kind::Exists &&
          g.kind() != Formula::Kind::Guard)
        walk(g.second());
    }
  };
  walk(f);
  return out;
}

bool is_tautology(const Formula& f) {
  const auto atoms = atoms_of(f);
  const std::vector<std::string> names(atoms.begin(), atoms.end());
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << names.size()); ++mask) {
    std::map<std::string, bool> val;
    for (std::size_t k = 0; k < names.size(); ++k) val[names[k]] = (mask >> k) & 1;
    if (!evaluate_propositional(f, val)) return false;
  }
  return true;
}

}  // namespace pgame::testing
