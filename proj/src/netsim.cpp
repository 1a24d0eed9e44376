#include "pgame/netsim.hpp"

#include <random>
#include <sstream>

#include "pgame/solver.hpp"
#include "pgame/strategy.hpp"
#include "pgame/syntax.hpp"

namespace pgame {

std::string to_string(const Packet& p) {
  std::string out = p.data;
  if (!p.headers.empty()) {
    out += "(";
    for (std::size_t i = 0; i < p.headers.size(); ++i) out += (i ? "," : "") + to_string(p.headers[i]);
    out += ")";
  }
  return out;
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Open:
      return "Open";
    case EventKind::HeaderOffer:
      return "HeaderOffer";
    case EventKind::Send:
      return "Send";
    case EventKind::Ack:
      return "Ack";
    case EventKind::AckLoss:
      return "AckLoss";
    case EventKind::Reinit:
      return "Reinit";
    case EventKind::CloseRequest:
      return "CloseRequest";
    case EventKind::Close:
      return "Close";
    case EventKind::OpponentForfeit:
      return "OpponentForfeit";
  }
  return "?";
}

std::string to_string(const NetEvent& e) {
  std::string out(to_string(e.kind));
  if (e.packet)
    out += "(" + to_string(*e.packet) + ")";
  else if (e.header)
    out += "(" + to_string(*e.header) + ")";
  if (!e.tag.empty()) out += " [" + e.tag + "]";
  if (e.unclassified) out += " [unclassified]";
  return out;
}

namespace {

Value term_value(const Term& t) {
  if (t.kind() == Term::Kind::IntLit) return t.value();
  return t.name();
}

Packet packet_of(const Formula& atom) {
  Packet p;
  p.data = atom.predicate();
  for (const auto& t : atom.args()) p.headers.push_back(term_value(t));
  return p;
}

// A channel is an atom with its last ack argument removed; that argument is
// the header.
struct Addressed {
  std::string channel;
  std::optional<std::string> header;
};

Addressed address(const Formula& atom) {
  Addressed a;
  auto args = atom.args();
  std::size_t keep = args.size();
  if (!args.empty() && args.back().sort() == Sort::Ack) {
    keep = args.size() - 1;
    if (args.back().kind() == Term::Kind::AckConst) a.header = args.back().name();
  }
  a.channel = atom.predicate() + "(";
  for (std::size_t i = 0; i < keep; ++i) a.channel += (i ? "," : "") + print_term(args[i]);
  a.channel += args.size() > keep ? ",_)" : ")";
  return a;
}

// forall x (G[x] -> false) with G[x] = forall y (... -> P(.., y)).
const Formula* header_target(const NormalFormula& chosen, const Instance& inst) {
  const auto& view = chosen.view();
  if (view.conclusion.kind() != Formula::Kind::Falsum) return nullptr;
  bool ack = false;
  for (const auto& x : view.prefix) ack = ack || x.sort == Sort::Ack;
  if (!ack || inst.premises.size() != 1) return nullptr;
  const Formula& c = inst.premises.front().view().conclusion;
  return c.kind() == Formula::Kind::Atom ? &c : nullptr;
}

std::optional<std::string> first_ack_value(const Move& m) {
  const auto& prefix = m.chosen.view().prefix;
  for (std::size_t k = 0; k < prefix.size() && k < m.values.size(); ++k)
    if (prefix[k].sort == Sort::Ack)
      if (const auto* c = std::get_if<std::string>(&m.values[k])) return *c;
  return std::nullopt;
}

}  // namespace

NetEvent Annotator::classify(const GameState& before, const Move& m) {
  NetEvent e;
  e.step = before.history.size() + 1;
  e.side = m.side;
  const Signature& sig = *before.signature;
  const Instance inst = instantiate(m.chosen, m.values, sig);
  const Formula& concl = inst.conclusion;
  const bool falsum = concl.kind() == Formula::Kind::Falsum;

  if (m.side == Side::Opponent) {
    if (!inst.guards_hold) {
      e.kind = EventKind::OpponentForfeit;
      return e;
    }
    if (canonical_key(m.chosen.formula()) == canonical_key(before.root.formula()) || falsum) {
      e.kind = EventKind::Open;
      if (!falsum) e.packet = packet_of(concl);
      return e;
    }
    e.packet = packet_of(concl);
    const Addressed a = address(concl);
    Channel& ch = channels_[a.channel];
    if (a.header && ch.offered.count(*a.header)) {
      e.kind = EventKind::CloseRequest;
    } else if (a.header && ch.stale.count(*a.header)) {
      e.kind = EventKind::CloseRequest;
      e.tag = "stale-header";
    } else {
      e.kind = EventKind::Send;
      if (a.header) ch.sent.insert(*a.header);
    }
    return e;
  }

  if (!before.U.empty() && canonical_key(m.chosen.formula()) == before.U.keys().front()) {
    e.kind = EventKind::Reinit;
    for (auto& [name, ch] : channels_) {
      ch.stale.insert(ch.offered.begin(), ch.offered.end());
      ch.offered.clear();
      ch.closed = false;
    }
    used_header_formulas_.clear();
    return e;
  }
  if (inst.premises.empty()) {
    e.kind = EventKind::Close;
    if (!falsum) e.packet = packet_of(concl);
    return e;
  }
  if (const Formula* target = header_target(m.chosen, inst)) {
    const Addressed a = address(*target);
    Channel& ch = channels_[a.channel];
    const auto h = first_ack_value(m);
    if (h) e.header = *h;
    const std::string key = canonical_key(m.chosen.formula());
    const bool first_use = used_header_formulas_.insert(key).second;
    if (ch.closed) {
      e.kind = EventKind::HeaderOffer;
      e.tag = "rerequest";
      ch.closed = false;
    } else if (h && ch.sent.count(*h) && !ch.acked.count(*h)) {
      e.kind = EventKind::Ack;
      ch.acked.insert(*h);
      Packet p;
      p.data = target->predicate();
      for (std::size_t i = 0; i + 1 < target->args().size(); ++i) p.headers.push_back(term_value(target->args()[i]));
      p.headers.emplace_back(*h);
      e.packet = std::move(p);
      return e;
    } else {
      e.kind = first_use ? EventKind::HeaderOffer : EventKind::AckLoss;
    }
    if (h) ch.offered.insert(*h);
    return e;
  }
  if (!falsum) {
    e.packet = packet_of(concl);
    const Addressed a = address(concl);
    Channel& ch = channels_[a.channel];
    const std::string id = a.header ? *a.header : std::string("-");
    if (ch.acked.count(id)) {
      e.kind = EventKind::Close;
      e.tag = "subsession";
      ch.closed = true;
    } else {
      e.kind = EventKind::Ack;
      ch.acked.insert(id);
    }
    return e;
  }
  e.kind = EventKind::AckLoss;
  e.unclassified = true;
  return e;
}

SessionTrace annotate(const GameState& final_state) {
  SessionTrace out;
  out.transcript = make_transcript(final_state);
  Annotator ann;
  GameState s = init_game(final_state.root, final_state.signature);
  for (const auto& m : final_state.history) {
    out.events.push_back(ann.classify(s, m));
    apply_move_in_place(s, m);
  }
  return out;
}

void validate(const LossModel& m) {
  for (double p : {m.ack_loss_probability, m.close_request_probability, m.reinit_probability})
    if (!(p >= 0 && p <= 1)) throw Error("loss model probabilities must lie in [0, 1]");
}

SessionTrace simulate(const NormalFormula& f, std::shared_ptr<const Signature> sig, const LossModel& model,
                      const SimulateOptions& options) {
  validate(model);
  if (solve(f, sig).kind == Verdict::Kind::Invalid)
    throw Error("simulate: the formula is not valid, the receiver has no winning strategy");

  std::mt19937_64 rng(model.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t ack_losses = 0, close_requests = 0, reinits = 0;
  auto room = [](const std::optional<std::size_t>& cap, std::size_t used) { return !cap || used < *cap; };

  const Strategy receiver = greedy_strategy();
  const Strategy sender = fresh_sender();
  GameState s = init_game(f, std::move(sig));
  Annotator ann;
  SessionTrace out;

  while (!s.outcome.finished()) {
    if (s.history.size() >= options.budget) {
      s.outcome = Outcome::at_cap(s.history.size());
      break;
    }
    const double r1 = unit(rng);
    const double r2 = unit(rng);
    std::optional<Move> m;
    if (s.turn == Side::Opponent) {
      if (s.history.empty() && !options.opening.empty()) {
        m = Move{Side::Opponent, s.V.items().front(), options.opening};
      } else if (r1 < model.close_request_probability && room(model.max_close_requests, close_requests)) {
        for (const auto& cand : legal_moves_opponent(s)) {
          Annotator probe = ann;
          if (probe.classify(s, cand).kind == EventKind::CloseRequest) {
            m = cand;
            ++close_requests;
            break;
          }
        }
      }
      if (!m) m = sender(s);
    } else {
      m = receiver(s);
      if (r1 < model.reinit_probability && room(model.max_reinits, reinits)) {
        m = Move{Side::Player, s.U.items().front(), {}};
        ++reinits;
      } else if (m && r2 < model.ack_loss_probability && room(model.max_ack_losses, ack_losses)) {
        Annotator probe = ann;
        const bool header_ack = probe.classify(s, *m).kind == EventKind::Ack &&
                                m->chosen.view().conclusion.kind() == Formula::Kind::Falsum;
        if (header_ack) {
          const auto& prefix = m->chosen.view().prefix;
          for (std::size_t k = 0; k < prefix.size(); ++k)
            if (prefix[k].sort == Sort::Ack) {
              m->values[k] = fresh_constant(s);
              break;
            }
          ++ack_losses;
        }
      }
    }
    if (!m) throw Error("simulate: no move available at step " + std::to_string(s.history.size() + 1));
    out.events.push_back(ann.classify(s, *m));
    apply_move_in_place(s, *m);
  }
  out.transcript = make_transcript(s);
  return out;
}

std::string to_text(const SessionTrace& t) {
  std::ostringstream os;
  for (const auto& e : t.events)
    os << e.step << "\t" << (e.side == Side::Opponent ? "sender  " : "receiver") << "\t" << to_string(e) << "\n";
  os << "outcome: " << to_string(t.transcript.outcome) << "\n";
  return os.str();
}

nlohmann::json to_json(const NetEvent& e) {
  nlohmann::json j;
  j["step"] = e.step;
  j["side"] = std::string(to_string(e.side));
  j["kind"] = std::string(to_string(e.kind));
  if (e.packet) {
    nlohmann::json headers = nlohmann::json::array();
    for (const auto& h : e.packet->headers) headers.push_back(to_json(h));
    j["packet"] = {{"data", e.packet->data}, {"headers", headers}};
  }
  if (e.header) j["header"] = to_json(*e.header);
  if (!e.tag.empty()) j["tag"] = e.tag;
  if (e.unclassified) j["unclassified"] = true;
  j["text"] = to_string(e);
  return j;
}

nlohmann::json to_json(const SessionTrace& t) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : t.events) events.push_back(to_json(e));
  return {{"events", events}, {"transcript", to_json(t.transcript)}};
}

}  // namespace pgame
