#include "pgame/strategy.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "pgame/syntax.hpp"

namespace pgame {

std::string_view to_string(Strategy::Kind k) {
  switch (k) {
    case Strategy::Kind::Greedy:
      return "greedy";
    case Strategy::Kind::Scripted:
      return "scripted";
    case Strategy::Kind::Replay:
      return "replay";
    case Strategy::Kind::Certificate:
      return "certificate";
    case Strategy::Kind::Interactive:
      return "interactive";
    case Strategy::Kind::FirstLegal:
      return "first-legal";
    case Strategy::Kind::Random:
      return "random";
    case Strategy::Kind::FreshSender:
      return "fresh-sender";
  }
  return "?";
}

namespace {

std::optional<Move> sender_move(const GameState& s, const PoolPolicy& policy) {
  if (s.turn != Side::Opponent || s.V.empty()) return std::nullopt;
  std::optional<Move> forfeit;
  for (const auto& phi : s.V) {
    const auto& prefix = phi.view().prefix;
    std::vector<std::vector<Value>> choices(prefix.size());
    std::size_t fresh = 0;
    for (std::size_t k = 0; k < prefix.size(); ++k) {
      if (prefix[k].sort == Sort::Ack) {
        choices[k] = {fresh_constant(s, fresh++)};
      } else {
        for (Natural n : int_candidates(s, policy.int_bound, phi, prefix[k])) choices[k].emplace_back(n);
      }
    }
    std::vector<Value> cur(prefix.size());
    std::optional<Move> found;
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
      if (found) return;
      if (k == prefix.size()) {
        Move m{Side::Opponent, phi, cur};
        if (!opponent_forfeits(s, m))
          found = m;
        else if (!forfeit)
          forfeit = m;
        return;
      }
      for (const auto& v : choices[k]) {
        cur[k] = v;
        rec(k + 1);
      }
    };
    rec(0);
    if (found) return found;
  }
  return forfeit;
}

bool is_root_constant(const GameState& s, const std::string& c) {
  const auto consts = constants_of(s.root.formula());
  return std::find(consts.begin(), consts.end(), c) != consts.end();
}

// Matches a shadow move against a real one, extending sigma with the
// constants the shadow move introduces.
bool shadow_matches(const Move& shadow, const Move& real, ConstantRenaming& sigma, const GameState& shadow_state) {
  if (shadow.side != real.side || shadow.values.size() != real.values.size()) return false;
  ConstantRenaming extended = sigma;
  for (std::size_t k = 0; k < shadow.values.size(); ++k) {
    const auto* sc = std::get_if<std::string>(&shadow.values[k]);
    const auto* rc = std::get_if<std::string>(&real.values[k]);
    if (!sc || !rc) {
      if (shadow.values[k] != real.values[k]) return false;
      continue;
    }
    if (is_root_constant(shadow_state, *sc)) {
      if (*sc != *rc) return false;
    } else if (auto it = extended.find(*sc); it != extended.end()) {
      if (it->second != *rc) return false;
    } else {
      extended.emplace(*sc, *rc);
    }
  }
  if (canonical_key(shadow.chosen.formula(), &extended) != canonical_key(real.chosen.formula())) return false;
  sigma = std::move(extended);
  return true;
}

std::optional<Move> certificate_lookup(const Certificate& cert, const GameState& s) {
  auto it = cert.moves.find(strategy_key(s));
  if (it == cert.moves.end()) return std::nullopt;
  return concretize(s, it->second);
}

std::optional<Move> follow_player_certificate(const Certificate& cert, const GameState& real) {
  GameState shadow = init_game(real.root, real.signature);
  ConstantRenaming sigma;
  for (const Move& m : real.history) {
    if (m.side == Side::Opponent) {
      const std::string target = canonical_key(m.chosen.formula());
      const NormalFormula* phi = nullptr;
      for (const auto& cand : shadow.V)
        if (canonical_key(cand.formula(), &sigma) == target) {
          phi = &cand;
          break;
        }
      if (!phi) return std::nullopt;
      Move sm{Side::Opponent, *phi, {}};
      std::size_t fresh = 0;
      for (const auto& v : m.values) {
        const auto* c = std::get_if<std::string>(&v);
        if (c && !is_root_constant(shadow, *c)) {
          std::string name = fresh_constant(shadow, fresh++);
          sigma[name] = *c;
          sm.values.emplace_back(std::move(name));
        } else {
          sm.values.push_back(v);
        }
      }
      apply_move_in_place(shadow, sm);
    } else {
      auto sm = certificate_lookup(cert, shadow);
      if (!sm || !shadow_matches(*sm, m, sigma, shadow)) return std::nullopt;
      apply_move_in_place(shadow, *sm);
    }
    if (shadow.outcome.finished()) return std::nullopt;
  }
  auto sm = certificate_lookup(cert, shadow);
  if (!sm) return std::nullopt;

  Move out{Side::Player, {}, {}};
  std::size_t fresh = 0;
  for (const auto& v : sm->values) {
    const auto* c = std::get_if<std::string>(&v);
    if (!c || is_root_constant(shadow, *c)) {
      out.values.push_back(v);
    } else if (auto it = sigma.find(*c); it != sigma.end()) {
      out.values.emplace_back(it->second);
    } else {
      std::string name = fresh_constant(real, fresh++);
      sigma[*c] = name;
      out.values.emplace_back(std::move(name));
    }
  }
  const std::string target = canonical_key(sm->chosen.formula(), &sigma);
  const NormalFormula* psi = real.U.find_key(target);
  if (!psi) return std::nullopt;
  out.chosen = *psi;
  return out;
}

}  // namespace

Strategy greedy_strategy(const SearchLimits& limits) {
  return Strategy(Strategy::Kind::Greedy, [limits](const GameState& s) -> std::optional<Move> {
    if (s.outcome.finished()) return std::nullopt;
    if (s.turn == Side::Opponent) return sender_move(s, PoolPolicy{limits.int_bound, 1});
    return greedy_player(s, limits);
  });
}

Strategy fresh_sender(const PoolPolicy& policy) {
  return Strategy(Strategy::Kind::FreshSender, [policy](const GameState& s) { return sender_move(s, policy); });
}

Strategy scripted_strategy(Side side, std::vector<Move> moves) {
  for (auto& m : moves) m.side = side;
  auto script = std::make_shared<const std::vector<Move>>(std::move(moves));
  return Strategy(Strategy::Kind::Scripted, [side, script](const GameState& s) -> std::optional<Move> {
    if (s.turn != side) return std::nullopt;
    const auto k = static_cast<std::size_t>(
        std::count_if(s.history.begin(), s.history.end(), [side](const Move& m) { return m.side == side; }));
    if (k >= script->size()) return std::nullopt;
    return (*script)[k];
  });
}

Strategy replay_strategy(std::vector<Move> history) {
  auto moves = std::make_shared<const std::vector<Move>>(std::move(history));
  return Strategy(Strategy::Kind::Replay, [moves](const GameState& s) -> std::optional<Move> {
    const std::size_t k = s.history.size();
    if (k >= moves->size() || (*moves)[k].side != s.turn) return std::nullopt;
    return (*moves)[k];
  });
}

Strategy certificate_strategy(std::shared_ptr<const Certificate> certificate) {
  return Strategy(Strategy::Kind::Certificate, [certificate](const GameState& s) -> std::optional<Move> {
    if (!certificate || s.outcome.finished() || s.turn != certificate->side) return std::nullopt;
    if (certificate->side == Side::Opponent) return certificate_lookup(*certificate, s);
    return follow_player_certificate(*certificate, s);
  });
}

Strategy interactive_strategy(InteractiveChooser ask, const PoolPolicy& policy) {
  return Strategy(Strategy::Kind::Interactive, [ask = std::move(ask), policy](const GameState& s) {
    return ask(s, legal_moves(s, policy));
  });
}

Strategy first_legal_strategy(const PoolPolicy& policy) {
  return Strategy(Strategy::Kind::FirstLegal, [policy](const GameState& s) -> std::optional<Move> {
    auto moves = legal_moves(s, policy);
    if (moves.empty()) return std::nullopt;
    return moves.front();
  });
}

Strategy random_strategy(std::uint64_t seed, const PoolPolicy& policy) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return Strategy(Strategy::Kind::Random, [rng, policy](const GameState& s) -> std::optional<Move> {
    auto moves = legal_moves(s, policy);
    if (moves.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, moves.size() - 1);
    return moves[pick(*rng)];
  });
}

std::vector<Move> parse_script(std::string_view text, const Signature& sig, Side side) {
  std::vector<Move> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    Move m;
    m.side = side;
    const auto at = line.rfind('@');
    try {
      m.chosen = parse_game_formula(trim(line.substr(0, at)), sig);
      if (at != std::string::npos) {
        std::istringstream vals(line.substr(at + 1));
        std::string v;
        while (std::getline(vals, v, ',')) {
          v = trim(v);
          if (v.empty()) throw Error("empty value");
          m.values.push_back(parse_value(v));
        }
      }
    } catch (const Error& e) {
      throw Error("script line " + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<Move> load_script(const std::string& path, const Signature& sig, Side side) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read script '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_script(buf.str(), sig, side);
}

GameState play_out(GameState s, const Strategy& player, const Strategy& opponent, std::size_t budget,
                   std::string* diagnostic) {
  std::size_t made = 0;
  auto fail = [&](std::string msg) {
    if (diagnostic) *diagnostic = std::move(msg);
  };
  while (!s.outcome.finished()) {
    if (made >= budget) {
      s.outcome = Outcome::at_cap(s.history.size());
      break;
    }
    const Strategy& st = s.turn == Side::Player ? player : opponent;
    std::optional<Move> m;
    try {
      m = st(s);
    } catch (const Error& e) {
      fail(std::string(to_string(s.turn)) + " strategy failed: " + e.what());
      break;
    }
    if (!m) {
      fail(std::string(to_string(s.turn)) + " strategy has no move at step " + std::to_string(s.history.size() + 1));
      break;
    }
    try {
      apply_move_in_place(s, *m);
    } catch (const IllegalMove& e) {
      fail("illegal move " + to_string(*m) + ": " + e.what());
      break;
    }
    ++made;
  }
  return s;
}

Transcript run_play(const NormalFormula& f, std::shared_ptr<const Signature> sig, const Strategy& player,
                    const Strategy& opponent, std::size_t budget) {
  std::string diagnostic;
  GameState s = play_out(init_game(f, std::move(sig)), player, opponent, budget, &diagnostic);
  Transcript t = make_transcript(s);
  t.diagnostic = std::move(diagnostic);
  return t;
}

}  // namespace pgame
