#include "pgame/cli.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <algorithm>
#include <csignal>
#include <iostream>
#include <sstream>

#include "pgame/compose.hpp"
#include "pgame/netsim.hpp"
#include "pgame/normal.hpp"
#include "pgame/service.hpp"
#include "pgame/solver.hpp"
#include "pgame/store.hpp"
#include "pgame/strategy.hpp"
#include "pgame/syntax.hpp"
#include "pgame/transcript.hpp"

namespace pgame {

namespace {

using nlohmann::json;

class UsageError : public Error {
  using Error::Error;
};

struct Loaded {
  Document doc;
  const NamedFormula* named = nullptr;
};

// FILE:NAME, or FILE alone when `name_optional`.
Loaded load_ref(const std::string& ref, bool name_optional) {
  std::string file = ref;
  std::string name;
  if (const auto colon = ref.rfind(':'); colon != std::string::npos && colon > 0 &&
                                          !std::filesystem::exists(ref)) {
    file = ref.substr(0, colon);
    name = ref.substr(colon + 1);
  }
  if (name.empty() && !name_optional) throw UsageError("expected FILE:NAME, got '" + ref + "'");
  Loaded l{load_document(file), nullptr};
  if (!name.empty()) {
    l.named = l.doc.find(name);
    if (!l.named) throw UsageError("no formula named '" + name + "' in " + file);
  }
  return l;
}

NormalFormula normal_of(const Loaded& l) {
  Formula core = expand_sugar(l.named->formula, *l.doc.signature);
  return normalize(core);
}

NormalFormula closed_normal_of(const Loaded& l) {
  NormalFormula f = normal_of(l);
  if (!is_closed(f.formula())) throw UsageError("formula '" + l.named->name + "' is not closed");
  return f;
}

void add_limits(CLI::App* cmd, SearchLimits& lim) {
  cmd->add_option("--max-states", lim.max_canonical_states, "canonical state budget")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-depth", lim.max_depth, "Player-move depth bound")->check(CLI::PositiveNumber);
  cmd->add_option("--int-bound", lim.int_bound, "largest integer offered beyond the pool");
  cmd->add_option("--fresh-bound", lim.fresh_bound, "fresh constants offered to the Opponent");
}

std::vector<Natural> parse_range(const std::string& text) {
  std::vector<Natural> out;
  try {
    if (const auto dots = text.find(".."); dots != std::string::npos) {
      const Natural lo = std::stoull(text.substr(0, dots));
      const Natural hi = std::stoull(text.substr(dots + 2));
      if (hi < lo) throw UsageError("empty range '" + text + "'");
      for (Natural n = lo; n <= hi; ++n) out.push_back(n);
    } else {
      std::stringstream ss(text);
      std::string part;
      while (std::getline(ss, part, ',')) out.push_back(std::stoull(part));
    }
  } catch (const std::logic_error&) {
    throw UsageError("bad integer list '" + text + "'");
  }
  if (out.empty()) throw UsageError("bad integer list '" + text + "'");
  return out;
}

void print_verdict(std::ostream& out, const json& summary) {
  out << summary.at("verdict").get<std::string>() << "\n";
  out << "states: " << summary.at("states").get<std::size_t>() << "\n";
  out << "depth: " << summary.at("depth").get<std::size_t>() << "\n";
  if (summary.contains("limit")) out << "limit: " << summary["limit"].get<std::string>() << "\n";
}

int verdict_exit(const std::string& kind) { return kind == "Valid" ? kExitOk : kExitNegative; }

// ---- subcommands ----

int cmd_parse(const std::string& file, std::ostream& out) {
  Document doc = load_document(file);
  out << print_signature(*doc.signature);
  for (const auto& nf : doc.formulas) out << "formula " << nf.name << " := " << print_formula(nf.formula) << "\n";
  return kExitOk;
}

int cmd_normalize(const std::string& ref, bool unicode, std::ostream& out) {
  Loaded l = load_ref(ref, true);
  PrintOptions po{unicode};
  if (l.named) {
    out << print_formula(normal_of(l).formula(), po) << "\n";
    return kExitOk;
  }
  for (const auto& nf : l.doc.formulas) {
    Loaded one{l.doc, &nf};
    out << nf.name << " := " << print_formula(normal_of(one).formula(), po) << "\n";
  }
  return kExitOk;
}

struct CheckArgs {
  std::string ref;
  SearchLimits limits;
  std::string omega;
  bool json = false;
  std::string store;
  std::string certificate_out;
};

int cmd_check(const CheckArgs& a, std::ostream& out) {
  Loaded l = load_ref(a.ref, false);
  NormalFormula f = closed_normal_of(l);

  if (!a.omega.empty()) {
    auto instances = check_omega_instances(f, l.doc.signature, parse_range(a.omega), a.limits);
    bool all_valid = true;
    json arr = json::array();
    for (const auto& inst : instances) {
      all_valid = all_valid && inst.verdict.kind == Verdict::Kind::Valid;
      json s = verdict_summary(inst.verdict);
      s["n"] = inst.n;
      arr.push_back(s);
      if (!a.json)
        out << "n=" << inst.n << ": " << to_string(inst.verdict.kind) << " (states " << inst.verdict.stats.states
            << ", depth " << inst.verdict.stats.depth << ")\n";
    }
    if (a.json) out << arr.dump(2) << "\n";
    return all_valid ? kExitOk : kExitNegative;
  }

  std::unique_ptr<Store> store;
  std::string key;
  if (!a.store.empty()) {
    store = std::make_unique<Store>(a.store);
    key = verdict_cache_key(f, *l.doc.signature, a.limits);
    if (a.certificate_out.empty()) {
      if (auto cached = store->cached_verdict(key)) {
        json s = *cached;
        if (a.json) {
          s["cached"] = true;
          out << s.dump(2) << "\n";
        } else {
          print_verdict(out, s);
        }
        return verdict_exit(s.at("verdict").get<std::string>());
      }
    }
  }

  Verdict v = solve(f, l.doc.signature, a.limits);
  json s = verdict_summary(v);
  if (store) store->put_verdict(key, s);
  if (!a.certificate_out.empty()) {
    if (!v.certificate) throw UsageError("no certificate: the verdict is " + std::string(to_string(v.kind)));
    std::ofstream cf(a.certificate_out);
    if (!cf) throw Error("cannot write '" + a.certificate_out + "'");
    cf << v.certificate->to_json().dump(2) << "\n";
  }
  if (a.json) {
    out << s.dump(2) << "\n";
  } else {
    print_verdict(out, s);
  }
  return verdict_exit(s["verdict"].get<std::string>());
}

int cmd_compose(const std::string& r1, const std::string& r2, std::ostream& out) {
  Loaded a = load_ref(r1, false);
  Loaded b = load_ref(r2, false);
  merge_signatures(*a.doc.signature, *b.doc.signature);
  out << print_formula(compose(closed_normal_of(a), closed_normal_of(b)).formula()) << "\n";
  return kExitOk;
}

struct PlayArgs {
  std::string ref;
  std::string player = "greedy";
  std::string opponent = "fresh";
  std::size_t budget = 100;
  SearchLimits limits;
  bool json = false;
};

std::optional<Move> ask_human(std::istream& in, std::ostream& out, const GameState& s,
                              const std::vector<Move>& legal) {
  out << "-- " << to_string(s.turn) << " to move (step " << s.history.size() + 1 << ")\n";
  for (std::size_t k = 0; k < legal.size(); ++k) out << "  [" << k + 1 << "] " << to_string(legal[k]) << "\n";
  for (;;) {
    out << "> " << std::flush;
    std::string line;
    if (!std::getline(in, line)) return std::nullopt;
    try {
      const std::size_t k = std::stoul(line);
      if (k >= 1 && k <= legal.size()) return legal[k - 1];
    } catch (const std::logic_error&) {
    }
    out << "enter a number between 1 and " << legal.size() << "\n";
  }
}

Strategy make_strategy(const std::string& choice, Side side, const PlayArgs& a, const NormalFormula& f,
                       const std::shared_ptr<const Signature>& sig, std::istream& in, std::ostream& out) {
  const auto colon = choice.find(':');
  const std::string kind = choice.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : choice.substr(colon + 1);
  const PoolPolicy policy{a.limits.int_bound, 1};
  if (kind == "greedy") return greedy_strategy({std::min<std::size_t>(a.limits.max_canonical_states, 20'000),
                                                std::min<std::size_t>(a.limits.max_depth, 16), a.limits.int_bound,
                                                a.limits.fresh_bound});
  if (kind == "fresh") return fresh_sender(policy);
  if (kind == "first") return first_legal_strategy(policy);
  if (kind == "interactive")
    return interactive_strategy([&in, &out](const GameState& s, const std::vector<Move>& legal) {
      return ask_human(in, out, s, legal);
    }, policy);
  if (kind == "scripted") {
    if (arg.empty()) throw UsageError("scripted needs a file: scripted:FILE");
    return scripted_strategy(side, load_script(arg, *sig, side));
  }
  if (kind == "random") {
    std::uint64_t seed = 0;
    try {
      seed = arg.empty() ? 0 : std::stoull(arg);
    } catch (const std::logic_error&) {
      throw UsageError("bad seed '" + arg + "'");
    }
    return random_strategy(seed, policy);
  }
  if (kind == "certificate") {
    Verdict v = solve(f, sig, a.limits);
    if (!v.certificate || v.certificate->side != side)
      throw UsageError("the solver gives no " + std::string(to_string(side)) + " certificate (verdict " +
                       std::string(to_string(v.kind)) + ")");
    return certificate_strategy(v.certificate);
  }
  throw UsageError("unknown strategy '" + choice + "'");
}

int cmd_play(const PlayArgs& a, std::istream& in, std::ostream& out) {
  Loaded l = load_ref(a.ref, false);
  NormalFormula f = closed_normal_of(l);
  Strategy player = make_strategy(a.player, Side::Player, a, f, l.doc.signature, in, out);
  Strategy opponent = make_strategy(a.opponent, Side::Opponent, a, f, l.doc.signature, in, out);
  Transcript t = run_play(f, l.doc.signature, player, opponent, a.budget);
  if (a.json) {
    out << to_json(t).dump(2) << "\n";
  } else {
    out << to_text(t);
    if (!t.diagnostic.empty()) out << "stopped: " << t.diagnostic << "\n";
  }
  return t.diagnostic.empty() ? kExitOk : kExitNegative;
}

struct SimArgs {
  std::string ref;
  std::string file;
  std::string formula;
  LossModel model;
  std::size_t max_ack_losses = 0, max_close_requests = 0, max_reinits = 0;
  bool cap_ack = false, cap_close = false, cap_reinit = false;
  std::size_t steps = 200;
  std::string opening;
  bool json = false;
};

int cmd_simulate(SimArgs a, std::ostream& out) {
  std::string ref = a.ref;
  if (ref.empty()) {
    if (a.formula.empty()) throw UsageError("simulate needs FILE:NAME or --formula");
    if (a.formula.find(':') != std::string::npos || a.file.empty()) {
      ref = a.formula;
    } else {
      ref = a.file + ":" + a.formula;
    }
  }
  Loaded l = load_ref(ref, false);
  NormalFormula f = closed_normal_of(l);
  if (a.cap_ack) a.model.max_ack_losses = a.max_ack_losses;
  if (a.cap_close) a.model.max_close_requests = a.max_close_requests;
  if (a.cap_reinit) a.model.max_reinits = a.max_reinits;
  try {
    validate(a.model);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  SimulateOptions opts;
  opts.budget = a.steps;
  if (!a.opening.empty()) {
    std::stringstream ss(a.opening);
    std::string v;
    while (std::getline(ss, v, ',')) opts.opening.push_back(parse_value(v));
  }
  SessionTrace t = simulate(f, l.doc.signature, a.model, opts);
  out << (a.json ? to_json(t).dump(2) + "\n" : to_text(t));
  return kExitOk;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string store;
  std::vector<std::string> corpus;
};

httplib::Server* g_server = nullptr;

int cmd_serve(const ServeArgs& a, std::ostream& out) {
  std::vector<std::filesystem::path> docs(a.corpus.begin(), a.corpus.end());
  if (docs.empty() && std::filesystem::is_directory("corpus"))
    for (const auto& e : std::filesystem::directory_iterator("corpus"))
      if (e.path().extension() == ".lp") docs.push_back(e.path());
  std::sort(docs.begin(), docs.end());
  auto store = std::make_shared<Store>(a.store.empty() ? default_store_dir() : std::filesystem::path(a.store));
  SessionManager mgr(store, load_catalog(docs));
  auto srv = make_server(mgr);
  g_server = srv.get();
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  out << "listening on http://" << a.host << ":" << a.port << std::endl;
  const bool ok = srv->listen(a.host, a.port);
  g_server = nullptr;
  if (!ok) throw Error("cannot listen on " + a.host + ":" + std::to_string(a.port));
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Game semantics for predicate calculus as a protocol engine", "pgame"};
  app.require_subcommand(1);

  std::string parse_file;
  auto* parse = app.add_subcommand("parse", "parse a .lp file and print it back");
  parse->add_option("FILE", parse_file)->required();

  std::string norm_ref;
  bool unicode = false;
  auto* norm = app.add_subcommand("normalize", "print normal forms");
  norm->add_option("REF", norm_ref, "FILE or FILE:NAME")->required();
  norm->add_flag("--unicode", unicode, "print with logical symbols");

  CheckArgs check_args;
  auto* check = app.add_subcommand("check", "decide validity by bounded search");
  check->add_option("REF", check_args.ref, "FILE:NAME")->required();
  add_limits(check, check_args.limits);
  check->add_option("--omega", check_args.omega, "solve the instances n=LO..HI or n=a,b,c of a typed formula");
  check->add_flag("--json", check_args.json);
  check->add_option("--store", check_args.store, "directory holding the verdict cache");
  check->add_option("--certificate", check_args.certificate_out, "write the winning strategy as JSON");

  std::string comp1, comp2;
  auto* comp = app.add_subcommand("compose", "insert the second formula at the final occurrences of the first");
  comp->add_option("REF1", comp1, "FILE:NAME")->required();
  comp->add_option("REF2", comp2, "FILE:NAME")->required();

  PlayArgs play_args;
  auto* play = app.add_subcommand("play", "play one game between two strategies");
  play->add_option("REF", play_args.ref, "FILE:NAME")->required();
  play->add_option("--player", play_args.player,
                   "greedy|interactive|scripted:FILE|random:SEED|certificate|first");
  play->add_option("--opponent", play_args.opponent,
                   "fresh|greedy|interactive|scripted:FILE|random:SEED|certificate|first");
  play->add_option("--budget", play_args.budget, "move cap")->check(CLI::PositiveNumber);
  add_limits(play, play_args.limits);
  play->add_flag("--json", play_args.json);

  SimArgs sim;
  auto* simc = app.add_subcommand("simulate", "run a lossy network session");
  simc->add_option("REF", sim.ref, "FILE:NAME");
  simc->add_option("--formula", sim.formula, "NAME or FILE:NAME");
  simc->add_option("--file", sim.file, ".lp file for --formula");
  simc->add_option("--seed", sim.model.seed);
  simc->add_option("--ack-loss", sim.model.ack_loss_probability, "probability");
  simc->add_option("--close-request", sim.model.close_request_probability, "probability");
  simc->add_option("--reinit", sim.model.reinit_probability, "probability");
  auto* cap_ack = simc->add_option("--max-ack-losses", sim.max_ack_losses);
  auto* cap_close = simc->add_option("--max-close-requests", sim.max_close_requests);
  auto* cap_reinit = simc->add_option("--max-reinits", sim.max_reinits);
  simc->add_option("--steps", sim.steps, "move cap")->check(CLI::PositiveNumber);
  simc->add_option("--opening", sim.opening, "values for the sender's first move, comma separated");
  simc->add_flag("--json", sim.json);

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "run the HTTP session service");
  serve->add_option("--host", serve_args.host);
  serve->add_option("--port", serve_args.port)->check(CLI::Range(1, 65535));
  serve->add_option("--store", serve_args.store, "session store directory (default $PGAME_STORE or ./pgame-store)");
  serve->add_option("--corpus", serve_args.corpus, ".lp files offered as the formula catalog");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*parse) return cmd_parse(parse_file, out);
    if (*norm) return cmd_normalize(norm_ref, unicode, out);
    if (*check) return cmd_check(check_args, out);
    if (*comp) return cmd_compose(comp1, comp2, out);
    if (*play) return cmd_play(play_args, in, out);
    if (*simc) {
      sim.cap_ack = cap_ack->count() > 0;
      sim.cap_close = cap_close->count() > 0;
      sim.cap_reinit = cap_reinit->count() > 0;
      return cmd_simulate(sim, out);
    }
    if (*serve) return cmd_serve(serve_args, out);
  } catch (const UsageError& e) {
    err << "pgame: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SyntaxError& e) {
    err << "pgame: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "pgame: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "pgame: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace pgame
