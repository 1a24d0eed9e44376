#pragma once

// Plays read as network sessions: the Opponent is the sender, the Player the
// receiver.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgame/game.hpp"
#include "pgame/transcript.hpp"

namespace pgame {

struct Packet {
  std::string data;
  std::vector<Value> headers;
};

std::string to_string(const Packet& p);

enum class EventKind : std::uint8_t {
  Open,
  HeaderOffer,
  Send,
  Ack,
  AckLoss,
  Reinit,
  CloseRequest,
  Close,
  OpponentForfeit,
};

std::string_view to_string(EventKind k);

struct NetEvent {
  EventKind kind = EventKind::Open;
  std::size_t step = 0;  // transcript row of the move
  Side side = Side::Opponent;
  std::optional<Packet> packet;
  std::optional<Value> header;
  /// Extra label: "rerequest", "subsession", "stale-header".
  std::string tag;
  /// Set when the move does not fit the protocol shapes; kind is then a guess.
  bool unclassified = false;
};

std::string to_string(const NetEvent& e);

struct SessionTrace {
  Transcript transcript;
  std::vector<NetEvent> events;
};

/// Incremental move classifier.
class Annotator {
 public:
  /// `before` is the state the move is played from.
  NetEvent classify(const GameState& before, const Move& m);

 private:
  struct Channel {
    std::set<std::string> sent;
    std::set<std::string> acked;
    std::set<std::string> offered;
    /// Headers offered before a reinitialisation.
    std::set<std::string> stale;
    bool closed = false;
  };
  std::map<std::string, Channel> channels_;
  std::set<std::string> used_header_formulas_;
};

/// Replays the history of a final state and classifies every move.
SessionTrace annotate(const GameState& final_state);

struct LossModel {
  double ack_loss_probability = 0;
  double close_request_probability = 0;
  double reinit_probability = 0;
  std::uint64_t seed = 0;
  /// Caps on the number of injected events of each kind.
  std::optional<std::size_t> max_ack_losses;
  std::optional<std::size_t> max_close_requests;
  std::optional<std::size_t> max_reinits;
};

/// Throws Error unless probabilities lie in [0, 1].
void validate(const LossModel& m);

struct SimulateOptions {
  std::size_t budget = 200;
  /// Values for the sender's opening move (e.g. the packet count).
  std::vector<Value> opening;
};

/// Greedy receiver perturbed by the model against a fresh-packet sender.
/// Throws Error when the solver refutes the formula.
SessionTrace simulate(const NormalFormula& f, std::shared_ptr<const Signature> sig, const LossModel& model,
                      const SimulateOptions& options = {});

std::string to_text(const SessionTrace& t);
nlohmann::json to_json(const NetEvent& e);
nlohmann::json to_json(const SessionTrace& t);

}  // namespace pgame
