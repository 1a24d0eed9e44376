#include "support/properties.hpp"

#include <algorithm>

#include "pgame/netsim.hpp"
#include "pgame/normal.hpp"
#include "pgame/solver.hpp"
#include "pgame/strategy.hpp"
#include "pgame/syntax.hpp"
#include "support/generators.hpp"
#include "support/tables.hpp"

namespace pgame::testing {

namespace {

struct Named {
  std::string name;
  NormalFormula formula;
  std::shared_ptr<const Signature> sig;
  std::vector<Value> opening;
};

std::vector<Named> corpus_formulas() {
  std::vector<Named> out;
  for (const char* file : {"examples.lp", "typed.lp", "typed_ack.lp"}) {
    Document doc = load_document(corpus_path(file));
    for (const auto& nf : doc.formulas)
      out.push_back({nf.name, normalize(expand_sugar(nf.formula, *doc.signature)), doc.signature, {}});
  }
  return out;
}

std::vector<Named> propositional_formulas(Rng& rng, std::size_t n) {
  std::vector<Named> out;
  GenOptions opt;
  opt.quantifiers = opt.integers = opt.free_variables = false;
  opt.depth = 4;
  auto sig = generator_signature();
  for (std::size_t k = 0; k < n; ++k) {
    Formula f = random_formula(rng, opt);
    out.push_back({print_formula(f), normalize(expand_sugar(f, *sig)), sig, {}});
  }
  return out;
}

bool subset(const FormulaSet& a, const FormulaSet& b) {
  return std::all_of(a.keys().begin(), a.keys().end(), [&](const std::string& k) { return b.contains_key(k); });
}

}  // namespace

PropertyResult normalization_properties(std::uint64_t seed, std::size_t cases) {
  PropertyResult r{"normalization idempotence and free variables"};
  Rng rng(seed);
  auto sig = generator_signature();
  for (std::size_t k = 0; k < cases; ++k, ++r.cases) {
    const Formula f = random_formula(rng, GenOptions{});
    const std::string shown = print_formula(f);
    try {
      const Formula core = expand_sugar(f, *sig);
      const NormalFormula n1 = normalize(core);
      if (!is_normal(n1.formula())) {
        r.fail("not normal: " + shown);
        continue;
      }
      const NormalFormula n2 = normalize(n1.formula());
      if (!alpha_equal(n1.formula(), n2.formula())) r.fail("not idempotent: " + shown);
      if (free_vars(core) != free_vars(n1.formula())) r.fail("free variables changed: " + shown);
      if (free_vars(f) != free_vars(core)) r.fail("sugar expansion changed free variables: " + shown);
      const Formula back = parse_core_formula(print_formula(n1.formula()), *sig, {.allow_free_variables = true});
      if (!alpha_equal(back, n1.formula())) r.fail("print/parse round trip differs: " + shown);
    } catch (const std::exception& e) {
      r.fail(shown + ": " + e.what());
    }
  }
  return r;
}

PropertyResult alpha_equivalence_laws(std::uint64_t seed, std::size_t cases) {
  PropertyResult r{"alpha equivalence laws"};
  Rng rng(seed);
  for (std::size_t k = 0; k < cases; ++k, ++r.cases) {
    const Formula f = random_formula(rng, GenOptions{});
    const Formula g = rename_bound(f, rng);
    const Formula h = rename_bound(g, rng);
    const Formula u = random_formula(rng, GenOptions{});
    const std::string shown = print_formula(f);
    if (!alpha_equal(f, f)) r.fail("not reflexive: " + shown);
    if (!alpha_equal(f, g) || !alpha_equal(g, f)) r.fail("bound renaming not equivalent: " + shown);
    if (!alpha_equal(g, h) || !alpha_equal(f, h)) r.fail("not transitive: " + shown);
    if (alpha_equal(f, u) != alpha_equal(u, f)) r.fail("not symmetric: " + shown + " / " + print_formula(u));
    if (alpha_equal(f, u) != (canonical_key(f) == canonical_key(u)))
      r.fail("canonical key disagrees: " + shown + " / " + print_formula(u));
    const auto fv = free_vars(f);
    if (!fv.empty()) {
      const Variable& v = *fv.begin();
      const Formula moved = replace_free(f, v, Term::var(Variable{v.name + "_other", v.sort}));
      if (alpha_equal(f, moved)) r.fail("renaming a free variable kept alpha equality: " + shown);
    }
  }
  return r;
}

PropertyResult play_monotonicity(std::uint64_t seed, std::size_t cases) {
  PropertyResult r{"U/A monotonicity and Player-move availability"};
  Rng rng(seed);
  const auto formulas = corpus_formulas();
  for (std::size_t k = 0; k < cases; ++k, ++r.cases) {
    const Named& f = formulas[rng() % formulas.size()];
    const std::uint64_t play_seed = rng();
    const auto player = random_strategy(play_seed);
    const auto opponent = random_strategy(play_seed ^ 0x5bd1e995);
    GameState s = init_game(f.formula, f.sig);
    const std::string where = f.name + " seed " + std::to_string(play_seed);
    for (int step = 0; step < 40 && !s.outcome.finished(); ++step) {
      if (s.turn == Side::Player) {
        const auto moves = legal_moves_player(s);
        const bool has_restart = std::any_of(moves.begin(), moves.end(), [&](const Move& m) {
          return canonical_key(m.chosen.formula()) == s.U.keys().front();
        });
        if (moves.empty() || !has_restart) {
          r.fail(where + ": Player has no move at step " + std::to_string(step));
          break;
        }
      }
      auto m = (s.turn == Side::Player ? player : opponent)(s);
      if (!m) {
        r.fail(where + ": no legal move at step " + std::to_string(step));
        break;
      }
      GameState next = apply_move(s, *m);
      if (!subset(s.U, next.U) || !subset(s.A, next.A)) {
        r.fail(where + ": U or A shrank at step " + std::to_string(step));
        break;
      }
      s = std::move(next);
    }
  }
  return r;
}

PropertyResult solver_determinacy(std::uint64_t seed, std::size_t cases) {
  PropertyResult r{"solver determinacy"};
  Rng rng(seed);
  auto formulas = corpus_formulas();
  formulas.erase(std::remove_if(formulas.begin(), formulas.end(),
                                [](const Named& n) { return n.name.rfind("typed", 0) == 0; }),
                 formulas.end());
  const std::size_t corpus = formulas.size();
  auto random = propositional_formulas(rng, cases > corpus ? cases - corpus : 0);
  formulas.insert(formulas.end(), random.begin(), random.end());
  for (std::size_t k = 0; k < formulas.size(); ++k, ++r.cases) {
    const Named& f = formulas[k];
    const Verdict v = solve(f.formula, f.sig);
    if (v.kind == Verdict::Kind::Unknown) {
      r.fail(f.name + ": Unknown (" + v.stats.limit + ")");
      continue;
    }
    if (!v.certificate || v.certificate->side != (v.kind == Verdict::Kind::Valid ? Side::Player : Side::Opponent))
      r.fail(f.name + ": certificate missing or for the wrong side");
    if (k >= corpus) {
      const bool taut = is_tautology(parse_formula({f.name}, *f.sig));
      if (taut != (v.kind == Verdict::Kind::Valid))
        r.fail(f.name + ": solver says " + std::string(to_string(v.kind)) + ", truth table says " +
               (taut ? "tautology" : "not a tautology"));
    }
  }
  return r;
}

PropertyResult certificate_replay(std::uint64_t seed, std::size_t cases) {
  PropertyResult r{"certificate soundness replay"};
  Rng rng(seed);
  auto formulas = corpus_formulas();
  formulas.erase(std::remove_if(formulas.begin(), formulas.end(),
                                [](const Named& n) { return n.name.rfind("typed", 0) == 0; }),
                 formulas.end());
  auto random = propositional_formulas(rng, 20);
  formulas.insert(formulas.end(), random.begin(), random.end());
  std::vector<Verdict> verdicts;
  for (const auto& f : formulas) verdicts.push_back(solve(f.formula, f.sig));

  for (std::size_t k = 0; k < cases; ++k, ++r.cases) {
    const std::size_t i = rng() % formulas.size();
    const Named& f = formulas[i];
    const Verdict& v = verdicts[i];
    if (!v.certificate) {
      r.fail(f.name + ": no certificate");
      continue;
    }
    const std::uint64_t s = rng();
    const bool greedy = s % 4 == 0;
    const Strategy cert = certificate_strategy(v.certificate);
    const Strategy adversary = greedy ? greedy_strategy() : random_strategy(s);
    const std::string where = f.name + " vs " + (greedy ? "greedy" : "random seed " + std::to_string(s));
    if (v.certificate->side == Side::Player) {
      const Transcript t = run_play(f.formula, f.sig, cert, adversary, 200);
      if (!t.diagnostic.empty()) r.fail(where + ": " + t.diagnostic);
      else if (t.outcome.kind != Outcome::Kind::PlayerWins) r.fail(where + ": Player certificate lost");
    } else {
      const Transcript t = run_play(f.formula, f.sig, adversary, cert, 60);
      if (!t.diagnostic.empty()) r.fail(where + ": " + t.diagnostic);
      else if (t.outcome.kind == Outcome::Kind::PlayerWins) r.fail(where + ": Opponent certificate lost");
    }
  }
  return r;
}

PropertyResult simulation_determinism(std::uint64_t seed, std::size_t cases) {
  PropertyResult r{"seed-deterministic simulation"};
  Rng rng(seed);
  std::vector<Named> formulas;
  for (const auto& f : corpus_formulas())
    if (f.name == "drinker" || f.name == "two_packets") formulas.push_back(f);
  for (const auto& f : corpus_formulas())
    if (f.name == "typed_packets") {
      formulas.push_back(f);
      formulas.back().opening = {Natural{2}};
    }
  std::uniform_real_distribution<double> prob(0.0, 0.6);
  for (std::size_t k = 0; k < cases; ++k, ++r.cases) {
    const Named& f = formulas[rng() % formulas.size()];
    LossModel m;
    m.ack_loss_probability = prob(rng);
    m.close_request_probability = prob(rng) / 2;
    m.reinit_probability = prob(rng) / 4;
    m.seed = rng();
    SimulateOptions opt;
    opt.budget = 120;
    opt.opening = f.opening;
    const std::string where = f.name + " seed " + std::to_string(m.seed);
    try {
      const SessionTrace a = simulate(f.formula, f.sig, m, opt);
      const SessionTrace b = simulate(f.formula, f.sig, m, opt);
      if (to_json(a) != to_json(b)) {
        r.fail(where + ": traces differ for equal seeds");
        continue;
      }
      std::vector<Move> history;
      for (const auto& row : a.transcript.rows)
        if (row.move) history.push_back(*row.move);
      const SessionTrace again = annotate(replay(f.formula, f.sig, history));
      nlohmann::json ea = nlohmann::json::array(), eb = nlohmann::json::array();
      for (const auto& e : a.events) ea.push_back(to_json(e));
      for (const auto& e : again.events) eb.push_back(to_json(e));
      if (ea != eb) r.fail(where + ": events differ from a replayed annotation");
    } catch (const std::exception& e) {
      r.fail(where + ": " + e.what());
    }
  }
  return r;
}

}  // namespace pgame::testing
