#pragma once

// Sequential composition of protocols.

#include <vector>

#include "pgame/normal.hpp"
#include "pgame/occurrence.hpp"

namespace pgame {

/// Negative atomic occurrences without hypotheses, left to right.
std::vector<AtomicOccurrence> final_occurrences(const NormalFormula& f);

/// Replaces every final occurrence A of f by g -> A and normalizes.
/// Throws Error when f or g is not closed.
NormalFormula compose(const NormalFormula& f, const NormalFormula& g);

/// Union of two signatures; throws Error on a conflicting declaration.
Signature merge_signatures(const Signature& a, const Signature& b);

}  // namespace pgame
