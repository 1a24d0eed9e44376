#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <thread>

#include "pgame/service.hpp"
#include "pgame/strategy.hpp"
#include "support/tables.hpp"

using namespace pgame;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<CatalogEntry> catalog() {
  return load_catalog({pgame::testing::corpus_path("examples.lp"), pgame::testing::corpus_path("typed.lp")});
}

int status_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    return e.status();
  }
  return 200;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("pgame-service-test-" + std::to_string(rd()) + std::to_string(rd()));
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

json with_annotation(const json& legal, const std::string& prefix) {
  for (const auto& m : legal["moves"])
    if (m["annotation"].get<std::string>().rfind(prefix, 0) == 0) return m;
  return nullptr;
}

}  // namespace

TEST(Token, DependsOnVersionAndMove) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_NE(fnv1a_hex("a"), fnv1a_hex("b"));
  auto cat = catalog();
  const auto& e = cat.front();
  GameState s = init_game(e.formula, e.signature);
  const auto moves = pgame::legal_moves(s);
  ASSERT_FALSE(moves.empty());
  const std::string t = move_token(s, moves[0]);
  EXPECT_EQ(t, move_token(s, moves[0]));
  EXPECT_EQ(t.rfind("v0.", 0), 0u);
}

TEST(Catalog, ListsClosedFormulas) {
  SessionManager mgr(nullptr, catalog());
  const json c = mgr.catalog();
  bool drinker = false, typed = false;
  for (const auto& e : c) {
    drinker = drinker || e["name"] == "drinker";
    typed = typed || e["name"] == "typed_packets";
  }
  EXPECT_TRUE(drinker);
  EXPECT_TRUE(typed);
}

TEST(Session, CreateAndErrors) {
  SessionManager mgr(nullptr, catalog());
  const json s = mgr.create({{"formula", "drinker"}});
  EXPECT_EQ(s["formula_name"], "drinker");
  EXPECT_EQ(s["state"]["turn"], "opponent");
  EXPECT_EQ(s["human"], "player");
  EXPECT_TRUE(s["engine_turn"].get<bool>());
  EXPECT_EQ(mgr.list().size(), 1u);

  EXPECT_EQ(status_of([&] { mgr.create({{"formula", "nope"}}); }), 404);
  EXPECT_EQ(status_of([&] { mgr.create(json::array()); }), 400);
  EXPECT_EQ(status_of([&] { mgr.create({{"formula", "drinker"}, {"human", "both"}}); }), 400);
  EXPECT_EQ(status_of([&] { mgr.create({{"source", "A -> "}, {"signature", "pred A : ()"}}); }), 400);
  EXPECT_EQ(status_of([&] { mgr.create({{"formula", "drinker"}, {"limits", {{"max_depth", 0}}}}); }), 400);
  EXPECT_EQ(status_of([&] { mgr.state("missing"); }), 404);

  const json custom = mgr.create({{"source", "A -> A"}, {"signature", "pred A : ()"}, {"name", "id"}});
  EXPECT_EQ(custom["formula_name"], "id");
}

TEST(Session, LegalMovesMatchEngine) {
  SessionManager mgr(nullptr, catalog());
  const std::string id = mgr.create({{"formula", "drinker"}, {"human", "none"}})["id"];
  for (int k = 0; k < 3; ++k) mgr.auto_step(id);
  const json lm = mgr.legal_moves(id);
  auto cat = catalog();
  const CatalogEntry* e = nullptr;
  for (const auto& c : cat)
    if (c.name == "drinker") e = &c;
  ASSERT_NE(e, nullptr);
  const json st = mgr.state(id);
  EXPECT_EQ(lm["turn"], st["state"]["turn"]);
  std::vector<std::string> got;
  for (const auto& m : lm["moves"]) got.push_back(m["text"]);
  // Replay the same three engine moves locally.
  GameState s = init_game(e->formula, e->signature);
  const json tr = mgr.transcript(id);
  for (const auto& row : tr["transcript"]["rows"])
    if (row.contains("move") && !row["move"].is_null()) apply_move_in_place(s, move_from_json(row["move"], *e->signature));
  std::vector<std::string> expected;
  for (const auto& m : pgame::legal_moves(s)) expected.push_back(to_string(m));
  EXPECT_EQ(got, expected);
  for (const auto& m : lm["moves"]) {
    EXPECT_TRUE(m.contains("token"));
    EXPECT_TRUE(m.contains("annotation"));
    EXPECT_TRUE(m.contains("fresh"));
  }
}

TEST(Session, SubmitByTokenAndByMove) {
  SessionManager mgr(nullptr, catalog());
  const std::string id = mgr.create({{"formula", "drinker"}})["id"];
  EXPECT_EQ(status_of([&] { mgr.submit(id, {{"move", {{"formula", "A"}}}}); }), 409);  // engine's turn
  const json opened = mgr.auto_step(id);
  EXPECT_EQ(opened["event"]["kind"], "Open");
  EXPECT_EQ(status_of([&] { mgr.auto_step(id); }), 409);  // client's turn

  const json offer = with_annotation(mgr.legal_moves(id), "HeaderOffer(");
  ASSERT_FALSE(offer.is_null());
  const json after = mgr.submit(id, {{"token", offer["token"]}});
  EXPECT_EQ(after["state"]["turn"], "opponent");
  EXPECT_EQ(status_of([&] { mgr.submit(id, {{"token", offer["token"]}}); }), 409);  // stale

  mgr.auto_step(id);
  EXPECT_EQ(status_of([&] { mgr.submit(id, {{"move", {{"formula", "P(("}}}}); }), 400);
  EXPECT_EQ(status_of([&] { mgr.submit(id, {{"move", {{"formula", "P(b)"}}}}); }), 409);
  EXPECT_EQ(status_of([&] { mgr.submit(id, json::object()); }), 400);
  const json ack = with_annotation(mgr.legal_moves(id), "Ack(");
  ASSERT_FALSE(ack.is_null());
  const json v = mgr.submit(id, {{"move", {{"formula", ack["formula"]}, {"values", ack["values"]}}}});
  EXPECT_EQ(v["event"]["kind"], "Ack");
}

TEST(Session, PlaysToTheEndThenGone) {
  SessionManager mgr(nullptr, catalog());
  const std::string id = mgr.create({{"formula", "drinker"}, {"human", "none"}})["id"];
  json last;
  for (int k = 0; k < 20 && !mgr.state(id)["closed"].get<bool>(); ++k) last = mgr.auto_step(id);
  EXPECT_TRUE(mgr.state(id)["closed"].get<bool>());
  EXPECT_EQ(last["state"]["outcome"]["kind"], "PlayerWins");
  EXPECT_EQ(status_of([&] { mgr.auto_step(id); }), 410);
  EXPECT_EQ(status_of([&] { mgr.submit(id, {{"token", "x"}}); }), 410);
  EXPECT_EQ(status_of([&] { mgr.hint(id); }), 410);
  const json tr = mgr.transcript(id);
  EXPECT_FALSE(tr["events"].empty());
  EXPECT_NE(tr["timeline"].get<std::string>().find("Close"), std::string::npos);
}

TEST(Session, ConcurrentSubmitsConflict) {
  SessionManager mgr(nullptr, catalog());
  const std::string id = mgr.create({{"formula", "two_packets"}})["id"];
  mgr.auto_step(id);
  const json lm = mgr.legal_moves(id);
  const std::string token = lm["moves"][0]["token"];
  std::atomic<int> ok{0}, conflict{0}, other{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t)
    threads.emplace_back([&] {
      const int st = status_of([&] { mgr.submit(id, {{"token", token}}); });
      (st == 200 ? ok : st == 409 ? conflict : other)++;
    });
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok.load(), 1);
  EXPECT_EQ(conflict.load(), 7);
  EXPECT_EQ(other.load(), 0);
  EXPECT_EQ(mgr.state(id)["state"]["version"], 2);
}

TEST(Session, HintGivesWinningMove) {
  SessionManager mgr(nullptr, catalog());
  const std::string id = mgr.create({{"formula", "drinker"}})["id"];
  mgr.auto_step(id);
  const json h = mgr.hint(id);
  EXPECT_EQ(h["verdict"]["verdict"], "Valid");
  ASSERT_FALSE(h["move"].is_null());
  EXPECT_NO_THROW(mgr.submit(id, {{"token", h["move"]["token"]}}));
}

TEST(Session, RecoveredFromStore) {
  TempDir tmp;
  std::string id;
  std::vector<std::string> events;
  {
    SessionManager mgr(std::make_shared<Store>(tmp.path()), catalog());
    id = mgr.create({{"formula", "drinker"}, {"human", "none"}})["id"];
    for (int k = 0; k < 4; ++k) mgr.auto_step(id);
    for (const auto& e : mgr.transcript(id)["events"]) events.push_back(e["text"]);
  }
  SessionManager again(std::make_shared<Store>(tmp.path()), catalog());
  const json st = again.state(id);
  EXPECT_EQ(st["state"]["version"], 4);
  std::vector<std::string> recovered;
  for (const auto& e : again.transcript(id)["events"]) recovered.push_back(e["text"]);
  EXPECT_EQ(recovered, events);
  EXPECT_NO_THROW(again.auto_step(id));
}

TEST(Http, EndToEnd) {
  SessionManager mgr(nullptr, catalog());
  auto srv = make_server(mgr);
  const int port = srv->bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { srv->listen_after_bind(); });
  srv->wait_until_ready();

  httplib::Client cli("127.0.0.1", port);
  auto r = cli.Get("/api/formulas");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_TRUE(json::parse(r->body).is_array());

  r = cli.Post("/api/sessions", R"({"formula":"drinker"})", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 201);
  const std::string id = json::parse(r->body)["id"];

  r = cli.Post("/api/sessions/" + id + "/auto", "", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  r = cli.Get("/api/sessions/" + id + "/moves");
  ASSERT_TRUE(r);
  const json moves = json::parse(r->body);
  ASSERT_FALSE(moves["moves"].empty());
  r = cli.Post("/api/sessions/" + id + "/moves", json{{"token", moves["moves"][0]["token"]}}.dump(),
               "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  r = cli.Post("/api/sessions/" + id + "/moves", json{{"token", moves["moves"][0]["token"]}}.dump(),
               "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 409);
  EXPECT_TRUE(json::parse(r->body).contains("error"));

  r = cli.Get("/api/sessions/nope");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 404);
  r = cli.Post("/api/sessions", "{not json", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  r = cli.Get("/api/sessions/" + id + "/hint");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  r = cli.Get("/api/sessions/" + id + "/transcript");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(r->get_header_value("Access-Control-Allow-Origin"), "*");
  r = cli.Options("/api/sessions");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 204);

  srv->stop();
  t.join();
}
