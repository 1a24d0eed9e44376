#include "pgame/game.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>

#include "pgame/syntax.hpp"

namespace pgame {

std::string to_string(const Value& v) {
  if (const auto* c = std::get_if<std::string>(&v)) return *c;
  return std::to_string(std::get<Natural>(v));
}

Term to_term(const Value& v) {
  if (const auto* c = std::get_if<std::string>(&v)) return Term::constant(*c);
  return Term::int_lit(std::get<Natural>(v));
}

Value parse_value(std::string_view text) {
  bool digits = !text.empty() && std::all_of(text.begin(), text.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c));
  });
  if (digits) {
    try {
      return static_cast<Natural>(std::stoull(std::string(text)));
    } catch (const std::exception&) {
      throw Error("integer value out of range: " + std::string(text));
    }
  }
  if (text.empty()) throw Error("empty value");
  return std::string(text);
}

std::string_view to_string(Side s) { return s == Side::Opponent ? "opponent" : "player"; }
Side other(Side s) { return s == Side::Opponent ? Side::Player : Side::Opponent; }

std::string to_string(const Move& m) {
  std::string s = print_formula(m.chosen);
  if (!m.values.empty()) {
    s += " @ ";
    for (std::size_t k = 0; k < m.values.size(); ++k) s += (k ? ", " : "") + to_string(m.values[k]);
  }
  return s;
}

std::string to_string(const Outcome& o) {
  switch (o.kind) {
    case Outcome::Kind::Ongoing:
      return "Ongoing";
    case Outcome::Kind::PlayerWins:
      return o.reason == Outcome::Reason::OpponentGuardFailure ? "PlayerWins(OpponentGuardFailure)"
                                                               : "PlayerWins(VEmpty)";
    case Outcome::Kind::OpponentWinsAtCap:
      return "OpponentWinsAtCap(" + std::to_string(o.steps) + ")";
  }
  return "?";
}

// ---- FormulaSet ----

bool FormulaSet::insert(const NormalFormula& f) {
  std::string key = canonical_key(f.formula());
  if (index_.count(key)) return false;
  index_.emplace(key, items_.size());
  items_.push_back(f);
  keys_.push_back(std::move(key));
  return true;
}

bool FormulaSet::contains(const Formula& f) const { return contains_key(canonical_key(f)); }

const NormalFormula* FormulaSet::find_key(const std::string& key) const {
  auto it = index_.find(key);
  return it == index_.end() ? nullptr : &items_[it->second];
}

void FormulaSet::clear() {
  items_.clear();
  keys_.clear();
  index_.clear();
}

// ---- state ----

bool GameState::in_pool(const std::string& c) const { return std::find(pool.begin(), pool.end(), c) != pool.end(); }
bool GameState::int_in_play(Natural n) const { return std::find(ints.begin(), ints.end(), n) != ints.end(); }

void absorb_formula(GameState& s, const Formula& f) {
  for (auto& c : constants_of(f))
    if (!s.in_pool(c)) s.pool.push_back(c);
  for (Natural n : literals_of(f))
    if (!s.int_in_play(n)) s.ints.push_back(n);
}

void absorb_values(GameState& s, const std::vector<Value>& values) {
  for (const auto& v : values) {
    if (const auto* c = std::get_if<std::string>(&v)) {
      if (!s.in_pool(*c)) s.pool.push_back(*c);
    } else if (!s.int_in_play(std::get<Natural>(v))) {
      s.ints.push_back(std::get<Natural>(v));
    }
  }
}

namespace {

Term substitute_term(Term t, const std::map<Variable, Term>& binding) {
  for (const auto& [v, value] : binding) t = replace_free(t, v, value);
  return t;
}

}  // namespace

GameState init_game(const NormalFormula& f, std::shared_ptr<const Signature> sig) {
  if (!sig) throw Error("init_game: missing signature");
  if (!is_closed(f.formula())) throw Error("init_game: formula has free variables");
  check_well_sorted(f.formula(), *sig);
  GameState s;
  s.signature = std::move(sig);
  s.root = f;
  s.U.insert(NormalFormula(Formula::implies(f.formula(), Formula::falsum())));
  s.V.insert(f);
  s.A.insert(NormalFormula(Formula::falsum()));
  s.turn = Side::Opponent;
  absorb_formula(s, f.formula());
  return s;
}

std::size_t hypothesis_count(const NormalFormula& f) { return f.view().formula_premise_count(); }

Instance instantiate(const NormalFormula& f, const std::vector<Value>& values, const Signature& sig) {
  const NormalView& v = f.view();
  if (values.size() != v.prefix.size())
    throw IllegalMove("expected " + std::to_string(v.prefix.size()) + " value(s), got " +
                      std::to_string(values.size()));
  std::map<Variable, Term> binding;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const bool ack = std::holds_alternative<std::string>(values[k]);
    if (ack != (v.prefix[k].sort == Sort::Ack))
      throw IllegalMove("value '" + to_string(values[k]) + "' does not match sort " +
                        std::string(to_string(v.prefix[k].sort)) + " of " + v.prefix[k].name);
    if (ack && std::get<std::string>(values[k]).empty()) throw IllegalMove("empty constant name");
    binding.insert_or_assign(v.prefix[k], to_term(values[k]));
  }
  Instance out;
  for (const auto& p : v.premises) {
    if (const auto* eq = std::get_if<Equation>(&p)) {
      Natural l = evaluate_term(substitute_term(eq->left, binding), sig);
      Natural r = evaluate_term(substitute_term(eq->right, binding), sig);
      if (l != r) out.guards_hold = false;
    } else {
      Formula g = evaluate_closed_terms(substitute(std::get<Formula>(p), binding), sig);
      out.premises.emplace_back(std::move(g));
    }
  }
  out.conclusion = evaluate_closed_terms(substitute(v.conclusion, binding), sig);
  return out;
}

std::string fresh_constant(const GameState& s, std::size_t skip) {
  for (std::size_t k = 0;; ++k) {
    std::string name = "#" + std::to_string(k);
    if (s.in_pool(name)) continue;
    if (skip == 0) return name;
    --skip;
  }
}

namespace {

bool is_succ(const Term& t, const Signature& sig) {
  if (t.kind() != Term::Kind::FunApp || t.args().size() != 1) return false;
  const FunctionSymbol* fn = sig.function(t.name());
  return fn && fn->builtin == "succ";
}

// For t = s^k(x) returns x and k.
std::optional<std::pair<Variable, Natural>> succ_chain(const Term& t, const Signature& sig) {
  Natural k = 0;
  const Term* cur = &t;
  while (is_succ(*cur, sig)) {
    ++k;
    cur = &cur->args()[0];
  }
  if (cur->kind() != Term::Kind::IntVar) return std::nullopt;
  return std::make_pair(Variable{cur->name(), Sort::Int}, k);
}

using Partial = std::map<Variable, Value>;

// Prefilter binding prefix variables from a target value. Terms that cannot
// be inverted are left to the final check.
bool match_term(const Term& pattern, const Term& target, Partial& b, const Signature& sig) {
  switch (pattern.kind()) {
    case Term::Kind::AckVar: {
      Variable v{pattern.name(), Sort::Ack};
      if (target.kind() != Term::Kind::AckConst) return false;
      auto [it, inserted] = b.emplace(v, Value{target.name()});
      return inserted || it->second == Value{target.name()};
    }
    case Term::Kind::AckConst:
      return target.kind() == Term::Kind::AckConst && target.name() == pattern.name();
    case Term::Kind::IntLit:
      return target.kind() != Term::Kind::IntLit || target.value() == pattern.value();
    case Term::Kind::IntVar:
    case Term::Kind::FunApp: {
      if (target.kind() != Term::Kind::IntLit) return true;
      auto chain = succ_chain(pattern, sig);
      if (!chain) return true;
      if (target.value() < chain->second) return false;
      Value val{target.value() - chain->second};
      auto [it, inserted] = b.emplace(chain->first, val);
      return inserted || it->second == val;
    }
  }
  return true;
}

// Candidate integers for a coordinate: 0..N, integers in play, and the
// values that satisfy a guard "closed = s^k(x)".
}  // namespace

std::vector<Natural> int_candidates(const GameState& s, Natural bound, const NormalFormula& f, const Variable& x) {
  std::set<Natural> c;
  for (Natural n = 0; n <= bound; ++n) c.insert(n);
  c.insert(s.ints.begin(), s.ints.end());
  for (const auto& p : f.view().premises) {
    const auto* eq = std::get_if<Equation>(&p);
    if (!eq) continue;
    for (int side = 0; side < 2; ++side) {
      const Term& var_side = side ? eq->right : eq->left;
      const Term& other = side ? eq->left : eq->right;
      auto chain = succ_chain(var_side, *s.signature);
      if (!chain || chain->first != x || !free_vars(other).empty()) continue;
      try {
        Natural n = evaluate_term(other, *s.signature);
        if (n >= chain->second) c.insert(n - chain->second);
      } catch (const Error&) {
      }
    }
  }
  return {c.begin(), c.end()};
}

bool match_atom(const Formula& pattern, const Formula& target, std::map<Variable, Value>& binding,
                const Signature& sig) {
  if (pattern.kind() != target.kind()) return false;
  if (pattern.kind() != Formula::Kind::Atom) return true;
  if (pattern.predicate() != target.predicate() || pattern.args().size() != target.args().size()) return false;
  for (std::size_t k = 0; k < pattern.args().size(); ++k)
    if (!match_term(pattern.args()[k], target.args()[k], binding, sig)) return false;
  return true;
}

namespace {

// Enumerates completions of `fixed` over the unbound prefix coordinates.
void enumerate(const GameState& s, const PoolPolicy& policy, const NormalFormula& f, const Partial& fixed,
               const std::function<void(const std::vector<Value>&)>& emit) {
  const auto& prefix = f.view().prefix;
  std::vector<std::vector<Natural>> ints(prefix.size());
  for (std::size_t k = 0; k < prefix.size(); ++k)
    if (prefix[k].sort == Sort::Int && !fixed.count(prefix[k])) ints[k] = int_candidates(s, policy.int_bound, f, prefix[k]);
  std::vector<Value> cur(prefix.size());
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t k, std::size_t fresh_used) {
    if (k == prefix.size()) {
      emit(cur);
      return;
    }
    if (auto it = fixed.find(prefix[k]); it != fixed.end()) {
      cur[k] = it->second;
      rec(k + 1, fresh_used);
      return;
    }
    if (prefix[k].sort == Sort::Int) {
      for (Natural n : ints[k]) {
        cur[k] = n;
        rec(k + 1, fresh_used);
      }
      return;
    }
    for (const auto& c : s.pool) {
      cur[k] = c;
      rec(k + 1, fresh_used);
    }
    for (std::size_t j = 0; j <= fresh_used && j < policy.fresh_per_move; ++j) {
      cur[k] = fresh_constant(s, j);
      rec(k + 1, std::max(fresh_used, j + 1));
    }
  };
  rec(0, 0);
}

Instance checked_instance(const GameState& s, const Move& m) {
  if (s.outcome.finished()) throw IllegalMove("the play is over");
  if (m.side != s.turn) throw IllegalMove("it is the " + std::string(to_string(s.turn)) + "'s turn");
  const FormulaSet& from = m.side == Side::Opponent ? s.V : s.U;
  if (!from.contains(m.chosen.formula()))
    throw IllegalMove("formula " + print_formula(m.chosen) + " is not in " + (m.side == Side::Opponent ? "V" : "U"));
  Instance inst;
  try {
    inst = instantiate(m.chosen, m.values, *s.signature);
  } catch (const IllegalMove&) {
    throw;
  } catch (const Error& e) {
    throw IllegalMove(e.what());
  }
  if (m.side == Side::Player) {
    if (!inst.guards_hold) throw IllegalMove("a guard of the chosen formula is false");
    if (!s.A.contains(inst.conclusion))
      throw IllegalMove("conclusion " + print_formula(inst.conclusion) +
                        " is not in A; a Player move needs its instantiated conclusion in A");
  }
  return inst;
}

}  // namespace

std::vector<Move> legal_moves_opponent(const GameState& s, const PoolPolicy& policy) {
  if (s.turn != Side::Opponent) throw Error("legal_moves_opponent: not the opponent's turn");
  std::vector<Move> out;
  if (s.outcome.finished()) return out;
  for (const auto& phi : s.V)
    enumerate(s, policy, phi, {}, [&](const std::vector<Value>& vals) { out.push_back({Side::Opponent, phi, vals}); });
  return out;
}

std::vector<Move> legal_moves_player(const GameState& s, const PoolPolicy& policy) {
  if (s.turn != Side::Player) throw Error("legal_moves_player: not the player's turn");
  std::vector<Move> out;
  if (s.outcome.finished()) return out;
  const Signature& sig = *s.signature;
  for (const auto& psi : s.U) {
    const Formula& b = psi.view().conclusion;
    std::set<std::vector<std::string>> seen;
    for (const auto& alpha : s.A) {
      Partial fixed;
      if (!match_atom(b, alpha.formula(), fixed, sig)) continue;
      enumerate(s, policy, psi, fixed, [&](const std::vector<Value>& vals) {
        std::vector<std::string> key;
        for (const auto& v : vals) key.push_back(std::holds_alternative<Natural>(v) ? "n" + to_string(v) : to_string(v));
        if (!seen.insert(key).second) return;
        Instance inst;
        try {
          inst = instantiate(psi, vals, sig);
        } catch (const Error&) {
          return;
        }
        if (!inst.guards_hold || !s.A.contains(inst.conclusion)) return;
        out.push_back({Side::Player, psi, vals});
      });
    }
  }
  return out;
}

std::vector<Move> legal_moves(const GameState& s, const PoolPolicy& policy) {
  return s.turn == Side::Opponent ? legal_moves_opponent(s, policy) : legal_moves_player(s, policy);
}

bool opponent_forfeits(const GameState& s, const Move& m) {
  if (m.side != Side::Opponent) return false;
  return !instantiate(m.chosen, m.values, *s.signature).guards_hold;
}

void check_move(const GameState& s, const Move& m) { (void)checked_instance(s, m); }

void apply_move_in_place(GameState& s, const Move& m) {
  Instance inst = checked_instance(s, m);
  absorb_values(s, m.values);
  s.history.push_back(m);
  if (m.side == Side::Opponent) {
    if (!inst.guards_hold) {
      s.outcome = Outcome::player_wins(Outcome::Reason::OpponentGuardFailure);
      return;
    }
    for (const auto& p : inst.premises) {
      absorb_formula(s, p.formula());
      s.U.insert(p);
    }
    absorb_formula(s, inst.conclusion);
    s.A.insert(NormalFormula(inst.conclusion));
    s.turn = Side::Player;
  } else {
    s.V.clear();
    for (const auto& p : inst.premises) {
      absorb_formula(s, p.formula());
      s.V.insert(p);
    }
    s.turn = Side::Opponent;
    if (s.V.empty()) s.outcome = Outcome::player_wins(Outcome::Reason::VEmpty);
  }
}

GameState apply_move(const GameState& s, const Move& m) {
  GameState next = s;
  apply_move_in_place(next, m);
  return next;
}

}  // namespace pgame
