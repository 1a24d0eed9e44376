#pragma once

// Two-sorted predicate-calculus terms and formulas.
//
// Only ->, false and forall are primitive; the remaining connectives are
// sugar nodes that expand_sugar() rewrites away. Integer equalities exist
// only as guards "t = u -> F", never as standalone formulas.

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pgame {

enum class Sort : std::uint8_t { Ack, Int };

std::string_view to_string(Sort s);

using Natural = std::uint64_t;

struct Variable {
  std::string name;
  Sort sort = Sort::Ack;

  auto operator<=>(const Variable&) const = default;
  bool operator==(const Variable&) const = default;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ill-sorted term or formula. `where` is a dotted path into the formula.
class SortError : public Error {
 public:
  SortError(const std::string& what, std::string where)
      : Error(where.empty() ? what : what + " (at " + where + ")"), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

using Evaluator = std::function<Natural(std::span<const Natural>)>;

struct FunctionSymbol {
  std::string name;
  std::size_t arity = 0;
  std::string builtin;  // zero | succ | add | mul, or empty for user evaluators
  Evaluator eval;
};

/// Predicate, function and constant declarations.
///
/// Names are unique across the three categories. The function table always
/// holds `0` (zero) and `s` (successor).
class Signature {
 public:
  Signature();

  void add_predicate(const std::string& name, std::vector<Sort> sorts);
  void add_function(const std::string& name, std::size_t arity, Evaluator eval);
  /// Registers one of the builtin evaluators zero, succ, add, mul.
  void add_builtin_function(const std::string& name, std::size_t arity, const std::string& builtin);
  void add_constant(const std::string& name);

  const std::vector<Sort>* predicate(std::string_view name) const;
  const FunctionSymbol* function(std::string_view name) const;
  bool has_constant(std::string_view name) const;
  bool declares(std::string_view name) const;

  const std::map<std::string, std::vector<Sort>, std::less<>>& predicates() const { return predicates_; }
  const std::map<std::string, FunctionSymbol, std::less<>>& functions() const { return functions_; }
  const std::set<std::string, std::less<>>& constants() const { return constants_; }

  /// Maximum number of function applications per evaluate_term() call.
  std::size_t eval_budget = 1'000'000;

 private:
  void claim(const std::string& name);

  std::map<std::string, std::vector<Sort>, std::less<>> predicates_;
  std::map<std::string, FunctionSymbol, std::less<>> functions_;
  std::set<std::string, std::less<>> constants_;
};

/// Builtin evaluator by name, or an empty function when unknown.
Evaluator builtin_evaluator(std::string_view builtin, std::size_t arity);

class Term {
 public:
  enum class Kind : std::uint8_t { IntVar, IntLit, FunApp, AckVar, AckConst };

  static Term int_var(std::string name);
  static Term int_lit(Natural value);
  static Term app(std::string function, std::vector<Term> args);
  static Term ack_var(std::string name);
  static Term constant(std::string name);
  static Term var(const Variable& v);

  Kind kind() const;
  Sort sort() const;
  const std::string& name() const;
  Natural value() const;
  std::span<const Term> args() const;

  bool is_variable() const { return kind() == Kind::IntVar || kind() == Kind::AckVar; }
  bool is_closed() const;

 private:
  struct Node;
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

class Formula {
 public:
  enum class Kind : std::uint8_t {
    Falsum,
    Atom,
    Implies,
    Forall,
    Guard,
    // sugar
    Not,
    And,
    Or,
    Iff,
    Xor,
    Exists,
  };

  Formula();  // falsum

  static Formula falsum();
  static Formula atom(std::string predicate, std::vector<Term> args = {});
  static Formula implies(Formula premise, Formula conclusion);
  /// A1, ..., An -> B
  static Formula implies_chain(std::span<const Formula> premises, Formula conclusion);
  static Formula forall(Variable v, Formula body);
  static Formula forall(std::span<const Variable> vs, Formula body);
  static Formula guard(Term left, Term right, Formula body);
  static Formula negation(Formula f);
  static Formula conj(Formula f, Formula g);
  static Formula disj(Formula f, Formula g);
  static Formula iff(Formula f, Formula g);
  static Formula exclusive_or(Formula f, Formula g);
  static Formula exists(Variable v, Formula body);

  Kind kind() const;
  bool is_atomic() const { return kind() == Kind::Falsum || kind() == Kind::Atom; }
  bool is_sugar() const { return kind() >= Kind::Not; }
  /// No sugar node anywhere below.
  bool is_core() const;

  const std::string& predicate() const;
  std::span<const Term> args() const;
  /// Binary nodes: left operand / premise; unary sugar: operand; binders and guards: body.
  const Formula& first() const;
  /// Binary nodes: right operand / conclusion.
  const Formula& second() const;
  const Formula& body() const { return first(); }
  const Variable& bound() const;
  const Term& guard_left() const;
  const Term& guard_right() const;

  /// Identity of the shared node, not structural equality.
  bool same_node(const Formula& o) const { return node_ == o.node_; }

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

using ConstantRenaming = std::unordered_map<std::string, std::string>;

std::set<Variable> free_vars(const Term& t);
std::set<Variable> free_vars(const Formula& f);
bool is_closed(const Formula& f);

/// Ack constants occurring in f, in order of first occurrence (left to right).
std::vector<std::string> constants_of(const Formula& f);
/// Integer literals occurring in f.
std::set<Natural> literals_of(const Formula& f);
/// Every variable name, free or bound.
std::set<std::string> variable_names(const Formula& f);

/// Replaces free occurrences. Values must be closed and of the variable's sort.
Formula substitute(const Formula& f, const std::map<Variable, Term>& binding);

/// Replaces free occurrences of v with t, which may be open. Binders that
/// would capture a variable of t are renamed.
Formula replace_free(const Formula& f, const Variable& v, const Term& t);
Term replace_free(const Term& term, const Variable& v, const Term& t);

/// Nameless rendering: bound variables become binder indices, free ones
/// keep their names. Constants are passed through `renaming` when given.
std::string canonical_key(const Formula& f, const ConstantRenaming* renaming = nullptr);
std::string canonical_key(const Term& t, const ConstantRenaming* renaming = nullptr);

bool alpha_equal(const Formula& f, const Formula& g);

Natural evaluate_term(const Term& t, const Signature& sig);
/// Replaces every closed integer subterm by its literal value.
Term evaluate_closed_subterms(const Term& t, const Signature& sig);
Formula evaluate_closed_terms(const Formula& f, const Signature& sig);

/// Throws SortError unless every atom, term and guard agrees with `sig`.
void check_well_sorted(const Formula& f, const Signature& sig);

/// Rewrites Not/And/Or/Iff/Xor/Exists into ->, false and forall.
Formula expand_sugar(const Formula& f);
Formula expand_sugar(const Formula& f, const Signature& sig);

Formula rename_predicates(const Formula& f, const std::map<std::string, std::string>& names);

/// Short debugging rendering; see syntax.hpp for the real printer.
std::string debug_string(const Formula& f);

}  // namespace pgame
