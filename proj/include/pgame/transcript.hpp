#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgame/game.hpp"

namespace pgame {

/// One line of a play table: the state at that line and the move made from it.
struct TranscriptRow {
  std::size_t step = 0;  // 1-based
  Side mover = Side::Opponent;
  std::vector<std::string> u_added;
  /// Replacement of V, or nullopt when V is unchanged.
  std::optional<std::vector<std::string>> v_replaced;
  std::vector<std::string> a_added;
  std::optional<Move> move;  // absent on the final line
  std::string state_key;     // canonical state at this line
};

struct Transcript {
  std::string formula;
  std::vector<TranscriptRow> rows;
  Outcome outcome;
  std::string diagnostic;
};

/// Rebuilds the table of a play from its initial state and history.
Transcript make_transcript(const GameState& final_state);

/// Replays moves from the initial state of `root`. Throws IllegalMove.
GameState replay(const NormalFormula& root, std::shared_ptr<const Signature> sig, const std::vector<Move>& moves);

/// Column layout: step, U (new), V, A (new), comment.
std::string to_text(const Transcript& t);

nlohmann::json to_json(const Value& v);
Value value_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Move& m);
/// Parses a move; the chosen formula is read with the signature.
Move move_from_json(const nlohmann::json& j, const Signature& sig);
nlohmann::json to_json(const Outcome& o);
nlohmann::json to_json(const Transcript& t);
nlohmann::json state_to_json(const GameState& s);

}  // namespace pgame
