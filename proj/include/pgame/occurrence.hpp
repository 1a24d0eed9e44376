#pragma once

#include <cstdint>
#include <vector>

#include "pgame/formula.hpp"

namespace pgame {

enum class Polarity : std::uint8_t { Positive, Negative };

/// One step of a path into a formula tree.
enum class Step : std::uint8_t { Premise, Conclusion, ForallBody, GuardBody };

using Path = std::vector<Step>;

/// An atomic leaf of a normal formula.
///
/// hypothesis_count is the number of non-equation premises of the normal
/// subformula whose conclusion this leaf is.
struct AtomicOccurrence {
  Path path;
  Polarity sign = Polarity::Positive;
  std::size_t hypothesis_count = 0;
  Formula atom;

  bool is_final() const { return sign == Polarity::Negative && hypothesis_count == 0; }
};

/// Every atomic occurrence of a normal formula, left to right.
/// Throws Error on non-normal input.
std::vector<AtomicOccurrence> occurrences(const Formula& f);

const Formula& subformula_at(const Formula& f, const Path& path);
Formula replace_at(const Formula& f, const Path& path, const Formula& replacement);

std::string to_string(const Path& path);

}  // namespace pgame
