#pragma once

// Game states up to renaming of constants that do not occur in the root
// formula.

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pgame/formula.hpp"
#include "pgame/game.hpp"

namespace pgame {

struct Canonical {
  std::string key;
  /// Original constant name to "$i".
  ConstantRenaming renaming;
  /// order[i] is the original name of "$i".
  std::vector<std::string> order;
};

/// Items are tagged formulas (the tag names the set they belong to).
/// Constants listed in `renamable` are renamed to $0, $1, ... so that the key
/// is invariant under any permutation of them.
Canonical canonicalize(std::span<const std::pair<char, Formula>> items, const std::vector<std::string>& renamable);

/// Key over turn, U, V and A.
Canonical canonical_state(const GameState& s);

/// Pool constants that are not part of the root formula.
std::vector<std::string> renamable_constants(const GameState& s);

}  // namespace pgame
