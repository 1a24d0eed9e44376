#include "pgame/transcript.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "pgame/canonical.hpp"
#include "pgame/syntax.hpp"

namespace pgame {

using nlohmann::json;

namespace {

std::vector<std::string> printed(const FormulaSet& s, std::size_t from = 0) {
  std::vector<std::string> out;
  for (std::size_t k = from; k < s.size(); ++k) out.push_back(print_formula(s.items()[k]));
  return out;
}

bool same_set(const FormulaSet& a, const FormulaSet& b) {
  if (a.size() != b.size()) return false;
  return std::all_of(a.keys().begin(), a.keys().end(), [&](const std::string& k) { return b.contains_key(k); });
}

std::string join(const std::vector<std::string>& xs, std::string_view sep) {
  std::string out;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k) out += sep;
    out += xs[k];
  }
  return out;
}

}  // namespace

GameState replay(const NormalFormula& root, std::shared_ptr<const Signature> sig, const std::vector<Move>& moves) {
  GameState s = init_game(root, std::move(sig));
  for (const auto& m : moves) apply_move_in_place(s, m);
  return s;
}

Transcript make_transcript(const GameState& final_state) {
  Transcript t;
  t.formula = print_formula(final_state.root);
  GameState s = init_game(final_state.root, final_state.signature);
  GameState prev = s;
  auto row_for = [&](const GameState& cur, const GameState* before) {
    TranscriptRow r;
    r.step = t.rows.size() + 1;
    r.mover = cur.turn;
    r.state_key = canonical_state(cur).key;
    if (!before) {
      r.u_added = printed(cur.U);
      r.v_replaced = printed(cur.V);
      r.a_added = printed(cur.A);
    } else {
      r.u_added = printed(cur.U, before->U.size());
      if (!same_set(cur.V, before->V)) r.v_replaced = printed(cur.V);
      r.a_added = printed(cur.A, before->A.size());
    }
    return r;
  };
  t.rows.push_back(row_for(s, nullptr));
  for (const auto& m : final_state.history) {
    t.rows.back().move = m;
    apply_move_in_place(s, m);
    t.rows.push_back(row_for(s, &prev));
    prev = s;
  }
  t.outcome = final_state.outcome;
  return t;
}

std::string to_text(const Transcript& t) {
  std::vector<std::array<std::string, 5>> cells;
  cells.push_back({"#", "U (new)", "V", "A (new)", ""});
  for (const auto& r : t.rows) {
    std::string comment;
    if (r.move) {
      comment = std::string(to_string(r.move->side)) + " chooses " + to_string(*r.move);
    } else if (t.outcome.finished()) {
      comment = to_string(t.outcome);
    }
    std::string v = !r.v_replaced ? "unchanged" : r.v_replaced->empty() ? "(empty)" : join(*r.v_replaced, ", ");
    std::string u = r.u_added.empty() ? "unchanged" : join(r.u_added, ", ");
    std::string a = r.a_added.empty() ? "unchanged" : join(r.a_added, ", ");
    cells.push_back({std::to_string(r.step), u, v, a, comment});
  }
  std::array<std::size_t, 5> width{};
  for (const auto& row : cells)
    for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], row[c].size());
  std::ostringstream os;
  os << "formula: " << t.formula << "\n";
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t c = 0; c < 5; ++c) {
      line += row[c];
      if (c < 4) line += std::string(width[c] - row[c].size() + 2, ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    os << line << "\n";
  }
  os << "outcome: " << to_string(t.outcome) << "\n";
  if (!t.diagnostic.empty()) os << "diagnostic: " << t.diagnostic << "\n";
  return os.str();
}

json to_json(const Value& v) {
  if (const auto* c = std::get_if<std::string>(&v)) return *c;
  return std::get<Natural>(v);
}

Value value_from_json(const json& j) {
  if (j.is_number_unsigned() || (j.is_number_integer() && j.get<long long>() >= 0)) return j.get<Natural>();
  if (j.is_string()) return j.get<std::string>();
  throw Error("value must be a constant name or a natural number");
}

json to_json(const Move& m) {
  json vals = json::array();
  for (const auto& v : m.values) vals.push_back(to_json(v));
  return {{"side", std::string(to_string(m.side))}, {"formula", print_formula(m.chosen)}, {"values", vals}};
}

Move move_from_json(const json& j, const Signature& sig) {
  if (!j.is_object()) throw Error("move must be an object");
  Move m;
  std::string side = j.value("side", "");
  if (side == "opponent")
    m.side = Side::Opponent;
  else if (side == "player")
    m.side = Side::Player;
  else
    throw Error("move side must be 'opponent' or 'player'");
  if (!j.contains("formula") || !j["formula"].is_string()) throw Error("move needs a formula string");
  m.chosen = parse_game_formula(j["formula"].get<std::string>(), sig);
  if (j.contains("values")) {
    if (!j["values"].is_array()) throw Error("move values must be an array");
    for (const auto& v : j["values"]) m.values.push_back(value_from_json(v));
  }
  return m;
}

json to_json(const Outcome& o) {
  json j = {{"label", to_string(o)}, {"finished", o.finished()}};
  switch (o.kind) {
    case Outcome::Kind::Ongoing:
      j["kind"] = "Ongoing";
      break;
    case Outcome::Kind::PlayerWins:
      j["kind"] = "PlayerWins";
      j["reason"] = o.reason == Outcome::Reason::OpponentGuardFailure ? "OpponentGuardFailure" : "VEmpty";
      break;
    case Outcome::Kind::OpponentWinsAtCap:
      j["kind"] = "OpponentWinsAtCap";
      j["steps"] = o.steps;
      break;
  }
  return j;
}

json to_json(const Transcript& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row = {{"step", r.step},
                {"mover", std::string(to_string(r.mover))},
                {"u_added", r.u_added},
                {"a_added", r.a_added},
                {"state_key", r.state_key}};
    row["v"] = r.v_replaced ? json(*r.v_replaced) : json(nullptr);
    row["move"] = r.move ? to_json(*r.move) : json(nullptr);
    rows.push_back(std::move(row));
  }
  json j = {{"formula", t.formula}, {"rows", rows}, {"outcome", to_json(t.outcome)}};
  if (!t.diagnostic.empty()) j["diagnostic"] = t.diagnostic;
  return j;
}

json state_to_json(const GameState& s) {
  return {{"U", printed(s.U)},
          {"V", printed(s.V)},
          {"A", printed(s.A)},
          {"turn", std::string(to_string(s.turn))},
          {"pool", s.pool},
          {"version", s.version()},
          {"outcome", to_json(s.outcome)},
          {"canonical", canonical_state(s).key}};
}

}  // namespace pgame
