#pragma once

// Normal formulas: forall x1..xk (Phi1, ..., Phin -> A) with every Phi normal
// (or an integer equation) and A atomic. This is the fragment the game is
// played on.

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "pgame/formula.hpp"

namespace pgame {

struct Equation {
  Term left;
  Term right;
};

using Premise = std::variant<Formula, Equation>;

inline bool is_guard(const Premise& p) { return std::holds_alternative<Equation>(p); }

/// Structured reading of a normal formula.
struct NormalView {
  std::vector<Variable> prefix;
  std::vector<Premise> premises;
  Formula conclusion;

  std::size_t formula_premise_count() const;
};

/// Splits prefix, premises and conclusion. Returns nullopt when the top-level
/// shape is not forall* (premise ->)* atom. Premises are not checked.
std::optional<NormalView> decompose(const Formula& f);
Formula rebuild(const NormalView& v);

bool is_normal(const Formula& f);

/// A formula known to be normal, with its decomposition cached.
class NormalFormula {
 public:
  /// Falsum.
  NormalFormula() : view_(std::make_shared<const NormalView>(NormalView{{}, {}, Formula::falsum()})) {}
  /// Throws Error if f is not normal.
  explicit NormalFormula(Formula f);

  const Formula& formula() const { return formula_; }
  const NormalView& view() const { return *view_; }
  operator const Formula&() const { return formula_; }

 private:
  Formula formula_;
  std::shared_ptr<const NormalView> view_;
};

/// Computes the normal form. Bound variables of a conclusion that would clash
/// with the premise are renamed to globally fresh names.
NormalFormula normalize(const Formula& f);

/// Deterministic supply of variable names avoiding a given set.
class FreshNames {
 public:
  explicit FreshNames(std::set<std::string> used) : used_(std::move(used)) {}
  std::string next(Sort sort);
  void reserve(const std::string& name) { used_.insert(name); }

 private:
  std::set<std::string> used_;
};

}  // namespace pgame
