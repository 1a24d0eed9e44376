#pragma once

// Text syntax for signatures and formulas, and the .lp document format.
//
//   formula := impl
//   impl    := term "=" term "->" formula
//            | iff { "," iff } [ "->" formula ]      (commas need the arrow)
//   iff     := or { ("<->" | "xor") or }
//   or      := and { "\/" and }
//   and     := unary { "/\" unary }
//   unary   := "not" unary | ("forall" | "exists") NAME+ "." unary | atom
//   atom    := "false" | NAME [ "(" term { "," term } ")" ] | "(" formula ")"
//   term    := NAME | NAT | NAME "(" term { "," term } ")"
//
// Quantifiers scope over a single unary operand, so a quantified implication
// needs parentheses: forall x. (P(x) -> Q(x)).

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pgame/formula.hpp"
#include "pgame/normal.hpp"

namespace pgame {

struct SourceText {
  std::string text;
  std::string origin = "<inline>";
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::string origin, int line, int column);
  const std::string& origin() const noexcept { return origin_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  std::string origin_;
  int line_;
  int column_;
};

struct ParseOptions {
  /// Accept unresolved names as free variables instead of rejecting them.
  bool allow_free_variables = false;
};

Signature parse_signature(const SourceText& src);

/// Parses a formula, possibly containing sugar. Variable sorts are inferred
/// from the argument positions they occupy.
Formula parse_formula(const SourceText& src, const Signature& sig, const ParseOptions& options = {});

/// Convenience: parse, expand sugar.
Formula parse_core_formula(std::string_view text, const Signature& sig, const ParseOptions& options = {});

/// Parses a formula written against a play: names that are neither bound nor
/// declared are read as ack constants.
NormalFormula parse_game_formula(std::string_view text, const Signature& sig);

struct PrintOptions {
  bool unicode = false;
};

std::string print_term(const Term& t);
std::string print_formula(const Formula& f, const PrintOptions& options = {});
std::string print_signature(const Signature& sig);

struct NamedFormula {
  std::string name;
  Formula formula;  // as written, sugar included
  std::string source;
  int line = 0;
};

/// One signature block followed by `formula NAME := ...` entries.
struct Document {
  std::shared_ptr<const Signature> signature;
  std::vector<NamedFormula> formulas;
  std::string origin;

  /// Throws Error when the name is unknown.
  const NamedFormula& get(std::string_view name) const;
  const NamedFormula* find(std::string_view name) const;
};

Document parse_document(const SourceText& src);
Document load_document(const std::filesystem::path& path);

}  // namespace pgame
