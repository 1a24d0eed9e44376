#pragma once

// Strategies and complete plays.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pgame/game.hpp"
#include "pgame/solver.hpp"
#include "pgame/transcript.hpp"

namespace pgame {

/// A strategy sees the whole play so far (the state carries its history) and
/// proposes a move for the side to move, or nothing when it has no answer.
class Strategy {
 public:
  enum class Kind : std::uint8_t { Greedy, Scripted, Replay, Certificate, Interactive, FirstLegal, Random, FreshSender };
  using Chooser = std::function<std::optional<Move>(const GameState&)>;

  Strategy(Kind kind, Chooser choose) : kind_(kind), choose_(std::move(choose)) {}

  Kind kind() const { return kind_; }
  std::optional<Move> operator()(const GameState& s) const { return choose_(s); }

 private:
  Kind kind_;
  Chooser choose_;
};

std::string_view to_string(Strategy::Kind k);

/// Player: greedy_player. Opponent: fresh_sender.
Strategy greedy_strategy(const SearchLimits& limits = {20'000, 16, 3, 3});

/// Opponent that takes the first formula of V, fresh ack constants and the
/// first integer candidate whose guards hold.
Strategy fresh_sender(const PoolPolicy& policy = {});

/// Plays the listed moves of `side` in order; nothing once they run out.
Strategy scripted_strategy(Side side, std::vector<Move> moves);

/// Plays history[k] at step k, for either side.
Strategy replay_strategy(std::vector<Move> history);

/// Follows a solver certificate. A Player certificate is followed through a
/// shadow play in which every Opponent constant is fresh, then mapped back;
/// an Opponent certificate is looked up positionally.
Strategy certificate_strategy(std::shared_ptr<const Certificate> certificate);

using InteractiveChooser = std::function<std::optional<Move>(const GameState&, const std::vector<Move>& legal)>;
Strategy interactive_strategy(InteractiveChooser ask, const PoolPolicy& policy = {});

Strategy first_legal_strategy(const PoolPolicy& policy = {});

/// Uniform over legal_moves; deterministic for a seed.
Strategy random_strategy(std::uint64_t seed, const PoolPolicy& policy = {});

/// One move per line: `FORMULA` or `FORMULA @ v1, v2`. Blank lines and lines
/// starting with '#' are skipped.
std::vector<Move> parse_script(std::string_view text, const Signature& sig, Side side);
std::vector<Move> load_script(const std::string& path, const Signature& sig, Side side);

/// Alternates the two strategies from the initial state. Stops on a win, on
/// `budget` moves (OpponentWinsAtCap), or on a strategy failure (diagnostic).
Transcript run_play(const NormalFormula& f, std::shared_ptr<const Signature> sig, const Strategy& player,
                    const Strategy& opponent, std::size_t budget);

/// Same, returning the final state.
GameState play_out(GameState s, const Strategy& player, const Strategy& opponent, std::size_t budget,
                   std::string* diagnostic = nullptr);

}  // namespace pgame
