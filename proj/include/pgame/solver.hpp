#pragma once

// Bounded solving of the game.
//
// Valid verdicts come from an iterative-deepening search in which every
// Opponent constant is fresh; by renaming, a Player win against fresh
// constants is a win against every choice. Invalid verdicts come from an
// explicit game graph with a cap on the number of constants, where the
// Opponent is restricted and the Player is complete, so an Opponent win there
// is an Opponent win in the full game. Anything else is Unknown.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgame/game.hpp"

namespace pgame {

struct SearchLimits {
  std::size_t max_canonical_states = 100'000;
  /// Player moves along a play.
  std::size_t max_depth = 64;
  Natural int_bound = 3;
  /// Constants outside the root formula in the Invalid search.
  std::size_t fresh_bound = 3;
};

/// 128-bit canonical digest of a state.
using StateHash = std::array<std::uint64_t, 2>;
std::string to_hex(const StateHash& h);

/// A move written against a canonical state: constants renamed $0, $1, ...
struct CanonicalMove {
  /// Digest of the chosen formula under the canonical renaming.
  std::uint64_t formula_digest = 0;
  /// Printed chosen formula under the canonical renaming.
  std::string formula_text;
  /// "$i" for renamed constants, "*" for a fresh constant, root constants by
  /// name, integers as naturals.
  std::vector<Value> values;
};

struct Certificate {
  Side side = Side::Player;
  std::map<StateHash, CanonicalMove> moves;

  nlohmann::json to_json() const;
};

/// Canonical digest of the parts of a state a positional strategy looks at:
/// (U, A) on the Player's turn, (U, V, A) on the Opponent's.
StateHash strategy_key(const GameState& s);

/// Resolves a canonical move in a concrete state with the same digest.
std::optional<Move> concretize(const GameState& s, const CanonicalMove& m);

struct SolveStats {
  std::size_t states = 0;
  /// Player moves needed (Valid) or deepest iteration completed.
  std::size_t depth = 0;
  double seconds = 0;
  std::string limit;  // which limit stopped the search, if any
};

struct Verdict {
  enum class Kind : std::uint8_t { Valid, Invalid, Unknown };
  Kind kind = Kind::Unknown;
  std::shared_ptr<const Certificate> certificate;
  SolveStats stats;
};

std::string_view to_string(Verdict::Kind k);

Verdict solve(const NormalFormula& f, std::shared_ptr<const Signature> sig, const SearchLimits& limits = {});

/// Solves the game from a reachable state (either side to move).
Verdict solve_from(const GameState& s, const SearchLimits& limits = {});

struct OmegaInstance {
  Natural n = 0;
  Verdict verdict;
};

/// For each n, the Opponent's opening move fixes the first integer
/// coordinate of the root prefix to n; the remaining game is solved.
std::vector<OmegaInstance> check_omega_instances(const NormalFormula& f, std::shared_ptr<const Signature> sig,
                                                 const std::vector<Natural>& n_values,
                                                 const SearchLimits& limits = {});

/// Closing move if any, else the first move of a shortest win found by a
/// small search, else a deterministic fallback.
Move greedy_player(const GameState& s, const SearchLimits& limits = {20'000, 16, 3, 3});

}  // namespace pgame
