#include <gtest/gtest.h>

#include <map>

#include "pgame/netsim.hpp"
#include "pgame/strategy.hpp"
#include "pgame/syntax.hpp"
#include "support/tables.hpp"

using namespace pgame;
using pgame::testing::corpus_path;

namespace {

struct Fixture {
  Document doc = load_document(corpus_path("examples.lp"));
  NormalFormula get(const std::string& name) const { return normalize(expand_sugar(doc.get(name).formula)); }
};

const Fixture& fx() {
  static const Fixture f;
  return f;
}

std::vector<Move> table_moves(const pgame::testing::PlayTable& t, const Signature& sig) {
  std::vector<Move> out;
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    if (t.rows[k].move.empty()) continue;
    out.push_back(parse_script(t.rows[k].move, sig, k % 2 ? Side::Player : Side::Opponent).at(0));
  }
  return out;
}

std::vector<std::string> texts(const SessionTrace& t) {
  std::vector<std::string> out;
  for (const auto& e : t.events) out.push_back(to_string(e));
  return out;
}

std::size_t count(const SessionTrace& t, EventKind k) {
  std::size_t n = 0;
  for (const auto& e : t.events) n += e.kind == k;
  return n;
}

void expect_no_duplicate_ack(const SessionTrace& t) {
  std::map<std::string, int> acks;
  for (const auto& e : t.events)
    if (e.kind == EventKind::Ack && e.packet) EXPECT_EQ(++acks[to_string(*e.packet)], 1) << to_string(*e.packet);
}

const std::string kFq = "(forall x. ((forall y. (Q(x) -> Q(y))) -> false)) -> false";
const std::string kXp = "forall x. ((forall y. (((" + kFq + ") -> P(x)) -> P(y))) -> false)";

}  // namespace

TEST(Annotate, DrinkerFreshPlay) {
  const auto& sig = fx().doc.signature;
  const auto s = replay(fx().get("drinker"), sig, table_moves(pgame::testing::drinker_fresh_table(), *sig));
  const SessionTrace t = annotate(s);
  EXPECT_EQ(texts(t), (std::vector<std::string>{"Open", "HeaderOffer(a)", "Send(P(b))", "Ack(P(b))", "Send(P(c))",
                                                "Close(P(b))"}));
  EXPECT_EQ(t.transcript.outcome, Outcome::player_wins(Outcome::Reason::VEmpty));
  for (const auto& e : t.events) EXPECT_FALSE(e.unclassified);
}

TEST(Annotate, DrinkerCloseRequest) {
  const auto& sig = fx().doc.signature;
  const auto s = replay(fx().get("drinker"), sig, table_moves(pgame::testing::drinker_close_table(), *sig));
  const SessionTrace t = annotate(s);
  ASSERT_GE(t.events.size(), 4u);
  EXPECT_EQ(t.events[2].kind, EventKind::CloseRequest);
  EXPECT_EQ(t.events[3].kind, EventKind::Close);
}

TEST(Annotate, TwoPacketsSubsession) {
  const auto& sig = fx().doc.signature;
  const auto s = replay(fx().get("two_packets"), sig, table_moves(pgame::testing::two_packet_table(), *sig));
  const SessionTrace t = annotate(s);
  EXPECT_EQ(texts(t), (std::vector<std::string>{"Open", "HeaderOffer(a)", "Send(P(b))", "Ack(P(b))", "Send(P(c))",
                                                "Close(P(b)) [subsession]", "Open", "HeaderOffer(d)", "Send(Q(e))",
                                                "Ack(Q(e))", "Send(Q(f))", "Close(Q(e))"}));
  expect_no_duplicate_ack(t);
}

TEST(Annotate, TwoPacketsRerequest) {
  const auto& sig = fx().doc.signature;
  auto moves = table_moves(pgame::testing::two_packet_table(), *sig);
  moves.resize(7);
  moves.push_back(parse_script(kXp + " @ c", *sig, Side::Player).at(0));
  GameState s = replay(fx().get("two_packets"), sig, moves);
  const SessionTrace partial = annotate(s);
  ASSERT_EQ(partial.events.size(), 8u);
  EXPECT_EQ(partial.events[7].kind, EventKind::HeaderOffer);
  EXPECT_EQ(partial.events[7].tag, "rerequest");

  std::string diag;
  s = play_out(s, greedy_strategy(), fresh_sender(), 60, &diag);
  EXPECT_TRUE(diag.empty()) << diag;
  EXPECT_EQ(s.outcome.kind, Outcome::Kind::PlayerWins);
  expect_no_duplicate_ack(annotate(s));
}

TEST(Annotate, TypedPlayHasSubsessionsAndForfeit) {
  const Document tdoc = load_document(corpus_path("typed.lp"));
  const auto T = normalize(expand_sugar(tdoc.get("typed_packets").formula));
  const auto s = replay(T, tdoc.signature, table_moves(pgame::testing::typed_table(2), *tdoc.signature));
  const SessionTrace t = annotate(s);
  EXPECT_EQ(t.events.back().kind, EventKind::OpponentForfeit);
  std::size_t subs = 0;
  for (const auto& e : t.events) subs += e.tag == "subsession";
  EXPECT_EQ(subs, 2u);
}

TEST(Simulate, NoLoss) {
  const SessionTrace t = simulate(fx().get("drinker"), fx().doc.signature, LossModel{});
  EXPECT_EQ(texts(t), (std::vector<std::string>{"Open", "HeaderOffer(#0)", "Send(P(#1))", "Ack(P(#1))",
                                                "Send(P(#2))", "Close(P(#1))"}));
  EXPECT_EQ(t.transcript.outcome, Outcome::player_wins(Outcome::Reason::VEmpty));
}

TEST(Simulate, Reinit) {
  LossModel m;
  m.reinit_probability = 1;
  m.max_reinits = 1;
  for (const char* name : {"drinker", "two_packets"}) {
    const SessionTrace t = simulate(fx().get(name), fx().doc.signature, m);
    EXPECT_EQ(count(t, EventKind::Reinit), 1u) << name;
    EXPECT_EQ(t.events[1].kind, EventKind::Reinit);
    EXPECT_EQ(t.transcript.outcome.kind, Outcome::Kind::PlayerWins) << name;
  }
}

TEST(Simulate, AckLoss) {
  LossModel m;
  m.ack_loss_probability = 1;
  m.max_ack_losses = 2;
  for (const char* name : {"drinker", "two_packets"}) {
    const SessionTrace t = simulate(fx().get(name), fx().doc.signature, m);
    EXPECT_EQ(count(t, EventKind::AckLoss), 2u) << name;
    EXPECT_EQ(t.transcript.outcome.kind, Outcome::Kind::PlayerWins) << name;
    expect_no_duplicate_ack(t);
  }
}

TEST(Simulate, CloseRequestAnsweredByClose) {
  LossModel m;
  m.close_request_probability = 1;
  m.max_close_requests = 1;
  const SessionTrace t = simulate(fx().get("drinker"), fx().doc.signature, m);
  EXPECT_EQ(texts(t), (std::vector<std::string>{"Open", "HeaderOffer(#0)", "CloseRequest(P(#0))", "Close(P(#0))"}));
  EXPECT_EQ(t.transcript.outcome.kind, Outcome::Kind::PlayerWins);
}

TEST(Simulate, CloseAfterLosses) {
  LossModel m;
  m.ack_loss_probability = 1;
  m.max_ack_losses = 3;
  const SessionTrace t = simulate(fx().get("drinker"), fx().doc.signature, m);
  EXPECT_EQ(count(t, EventKind::AckLoss), 3u);
  EXPECT_EQ(t.events.back().kind, EventKind::Close);
  EXPECT_EQ(t.transcript.outcome.kind, Outcome::Kind::PlayerWins);
}

TEST(Simulate, SeededRunsAreDeterministic) {
  LossModel m;
  m.ack_loss_probability = 0.5;
  m.close_request_probability = 0.3;
  m.reinit_probability = 0.2;
  m.max_reinits = 2;
  for (std::uint64_t seed : {1u, 2u, 9u, 42u}) {
    m.seed = seed;
    const SessionTrace a = simulate(fx().get("two_packets"), fx().doc.signature, m);
    const SessionTrace b = simulate(fx().get("two_packets"), fx().doc.signature, m);
    EXPECT_EQ(texts(a), texts(b));
    EXPECT_EQ(to_json(a), to_json(b));
    EXPECT_EQ(a.transcript.outcome.kind, Outcome::Kind::PlayerWins);
  }
}

TEST(Simulate, TypedOpening) {
  const Document tdoc = load_document(corpus_path("typed.lp"));
  const auto T = normalize(expand_sugar(tdoc.get("typed_packets").formula));
  SimulateOptions so;
  so.opening = {Natural{2}};
  const SessionTrace t = simulate(T, tdoc.signature, LossModel{}, so);
  EXPECT_EQ(t.transcript.outcome, Outcome::player_wins(Outcome::Reason::OpponentGuardFailure));
  EXPECT_EQ(t.events.front().kind, EventKind::Open);
}

TEST(Simulate, Rejections) {
  LossModel bad;
  bad.ack_loss_probability = 1.5;
  EXPECT_THROW(validate(bad), Error);
  bad.ack_loss_probability = -0.1;
  EXPECT_THROW(validate(bad), Error);
  EXPECT_NO_THROW(validate(LossModel{}));
  EXPECT_THROW(simulate(fx().get("drinker"), fx().doc.signature, bad), Error);
  EXPECT_THROW(simulate(fx().get("p_implies_q"), fx().doc.signature, LossModel{}), Error);
}

TEST(Simulate, JsonShape) {
  const SessionTrace t = simulate(fx().get("drinker"), fx().doc.signature, LossModel{});
  const auto j = to_json(t);
  ASSERT_TRUE(j.contains("events"));
  EXPECT_EQ(j["events"].size(), t.events.size());
  EXPECT_EQ(j["events"][0]["kind"], "Open");
  EXPECT_EQ(j["events"][2]["packet"]["data"], "P");
  EXPECT_NE(to_text(t).find("outcome: PlayerWins"), std::string::npos);
}
