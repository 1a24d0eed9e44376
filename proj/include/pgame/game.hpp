#pragma once

// The two-player game on a closed normal formula.
//
// Opponent moves pick a member of V and values for its prefix; Player moves
// pick a member of U whose instantiated conclusion is already in A.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "pgame/formula.hpp"
#include "pgame/normal.hpp"

namespace pgame {

/// An ack constant (by name) or a natural number.
using Value = std::variant<std::string, Natural>;

std::string to_string(const Value& v);
Term to_term(const Value& v);
/// Parses "#0", "a", "17": digits become naturals, anything else a constant.
Value parse_value(std::string_view text);

enum class Side : std::uint8_t { Opponent, Player };
std::string_view to_string(Side s);
Side other(Side s);

struct Move {
  Side side = Side::Opponent;
  NormalFormula chosen;
  std::vector<Value> values;
};

std::string to_string(const Move& m);

/// Insertion-ordered set of normal formulas, deduplicated up to alpha.
class FormulaSet {
 public:
  bool insert(const NormalFormula& f);
  bool contains(const Formula& f) const;
  bool contains_key(const std::string& key) const { return index_.count(key) != 0; }
  const NormalFormula* find_key(const std::string& key) const;
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  void clear();

  const std::vector<NormalFormula>& items() const { return items_; }
  const std::vector<std::string>& keys() const { return keys_; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

 private:
  std::vector<NormalFormula> items_;
  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Outcome {
  enum class Kind : std::uint8_t { Ongoing, PlayerWins, OpponentWinsAtCap };
  enum class Reason : std::uint8_t { None, VEmpty, OpponentGuardFailure };

  Kind kind = Kind::Ongoing;
  Reason reason = Reason::None;
  std::size_t steps = 0;  // for OpponentWinsAtCap

  static Outcome ongoing() { return {}; }
  static Outcome player_wins(Reason r) { return {Kind::PlayerWins, r, 0}; }
  static Outcome at_cap(std::size_t steps) { return {Kind::OpponentWinsAtCap, Reason::None, steps}; }

  bool finished() const { return kind != Kind::Ongoing; }
  bool operator==(const Outcome&) const = default;
};

std::string to_string(const Outcome& o);

struct GameState {
  std::shared_ptr<const Signature> signature;
  NormalFormula root;
  FormulaSet U;
  FormulaSet V;
  FormulaSet A;
  Side turn = Side::Opponent;
  /// Ack constants in play, in order of first appearance.
  std::vector<std::string> pool;
  /// Integers in play (literals of the formulas and values chosen so far).
  std::vector<Natural> ints;
  std::vector<Move> history;
  Outcome outcome;

  std::uint64_t version() const { return history.size(); }
  bool in_pool(const std::string& c) const;
  bool int_in_play(Natural n) const;
};

class IllegalMove : public Error {
 public:
  using Error::Error;
};

/// Throws Error if f is not closed or not well sorted against sig.
GameState init_game(const NormalFormula& f, std::shared_ptr<const Signature> sig);

/// Result of substituting values into a normal formula.
struct Instance {
  std::vector<NormalFormula> premises;  // non-guard premises, evaluated
  bool guards_hold = true;
  Formula conclusion;  // closed atom with integer terms evaluated
};

/// Throws IllegalMove on an arity or sort mismatch.
Instance instantiate(const NormalFormula& f, const std::vector<Value>& values, const Signature& sig);

/// Value enumeration for unconstrained coordinates: constants in play plus
/// fresh ones, integers 0..int_bound plus those in play.
struct PoolPolicy {
  Natural int_bound = 3;
  /// Fresh ack constants offered per move; 0 disables them.
  std::size_t fresh_per_move = 1;
};

/// Fresh constant name "#k" with the least k not in play.
std::string fresh_constant(const GameState& s, std::size_t skip = 0);

std::vector<Move> legal_moves_opponent(const GameState& s, const PoolPolicy& policy = {});
std::vector<Move> legal_moves_player(const GameState& s, const PoolPolicy& policy = {});
std::vector<Move> legal_moves(const GameState& s, const PoolPolicy& policy = {});

/// True if applying the opponent move ends the play on a false guard.
bool opponent_forfeits(const GameState& s, const Move& m);

/// Throws IllegalMove with a reason when m is not legal in s.
void check_move(const GameState& s, const Move& m);

/// Returns the successor state; s is not modified.
GameState apply_move(const GameState& s, const Move& m);
/// In-place variant used by the solver and replays.
void apply_move_in_place(GameState& s, const Move& m);

// Building blocks shared with the solver.

/// Records the constants and integer literals of f as in play.
void absorb_formula(GameState& s, const Formula& f);
void absorb_values(GameState& s, const std::vector<Value>& values);

/// Integers 0..bound, those in play, and values satisfying a guard of f of
/// the form "closed = s^k(x)".
std::vector<Natural> int_candidates(const GameState& s, Natural bound, const NormalFormula& f, const Variable& x);

/// Binds prefix variables of `pattern` so that it can equal the closed atom
/// `target`. A true result is only a prefilter: uninvertible integer terms
/// stay unbound and must be checked after instantiation.
bool match_atom(const Formula& pattern, const Formula& target, std::map<Variable, Value>& binding,
                const Signature& sig);

/// Number of non-guard premises of a normal formula.
std::size_t hypothesis_count(const NormalFormula& f);

}  // namespace pgame
