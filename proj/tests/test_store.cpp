#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "pgame/store.hpp"
#include "pgame/strategy.hpp"
#include "pgame/syntax.hpp"
#include "support/tables.hpp"

using namespace pgame;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("pgame-store-test-" + std::to_string(rd()) + std::to_string(rd()));
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

SessionRecord make_record(const std::string& id) {
  const Document doc = load_document(pgame::testing::corpus_path("examples.lp"));
  SessionRecord r;
  r.id = id;
  r.formula_name = "drinker";
  const NormalFormula f = normalize(expand_sugar(doc.get("drinker").formula));
  r.formula_source = print_formula(f.formula());
  r.signature_source = print_signature(*doc.signature);
  r.human = Side::Player;
  r.limits = SearchLimits{500, 10, 2, 2};
  r.created_ms = now_ms();
  r.state = init_game(f, doc.signature);
  return r;
}

void step(SessionRecord& r, Store& store) {
  const Strategy& st = r.state.turn == Side::Player ? greedy_strategy() : fresh_sender();
  auto m = st(r.state);
  ASSERT_TRUE(m.has_value());
  apply_move_in_place(r.state, *m);
  store.append(r);
}

std::vector<std::string> history_text(const GameState& s) {
  std::vector<std::string> out;
  for (const auto& m : s.history) out.push_back(to_string(m));
  return out;
}

}  // namespace

TEST(Store, CreateAppendLoad) {
  TempDir tmp;
  Store store(tmp.path());
  SessionRecord r = make_record("s1");
  store.create(r);
  for (int k = 0; k < 4; ++k) step(r, store);
  ASSERT_TRUE(fs::exists(tmp.path() / "sessions" / "s1" / "log.jsonl"));

  const auto loaded = store.load("s1");
  ASSERT_TRUE(loaded.has_value());
  EXPECT_EQ(loaded->formula_name, "drinker");
  EXPECT_EQ(loaded->human, Side::Player);
  EXPECT_EQ(loaded->limits.max_canonical_states, 500u);
  EXPECT_EQ(loaded->limits.int_bound, 2u);
  EXPECT_EQ(history_text(loaded->state), history_text(r.state));
  EXPECT_EQ(loaded->state.turn, r.state.turn);
  EXPECT_EQ(loaded->state.outcome, r.state.outcome);
  EXPECT_FALSE(store.load("missing").has_value());
}

TEST(Store, AppendWithoutMoveFails) {
  TempDir tmp;
  Store store(tmp.path());
  SessionRecord r = make_record("s1");
  store.create(r);
  EXPECT_THROW(store.append(r), StoreError);
}

TEST(Store, TornTailIsIgnored) {
  TempDir tmp;
  Store store(tmp.path());
  SessionRecord r = make_record("s1");
  store.create(r);
  for (int k = 0; k < 3; ++k) step(r, store);
  {
    std::ofstream out(tmp.path() / "sessions" / "s1" / "log.jsonl", std::ios::app);
    out << "{\"move\": {\"side\": \"pla";
  }
  const auto loaded = store.load("s1");
  ASSERT_TRUE(loaded.has_value());
  EXPECT_EQ(loaded->state.history.size(), 3u);
}

TEST(Store, RecoverEverySession) {
  TempDir tmp;
  std::vector<std::vector<std::string>> expected;
  {
    Store store(tmp.path());
    for (int i = 0; i < 3; ++i) {
      SessionRecord r = make_record("s" + std::to_string(i));
      r.created_ms += i;
      store.create(r);
      for (int k = 0; k < 2 * i + 1; ++k) step(r, store);
      expected.push_back(history_text(r.state));
    }
  }
  Store reopened(tmp.path());
  const auto all = reopened.recover();
  ASSERT_EQ(all.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(all[i].id, "s" + std::to_string(i));
    EXPECT_EQ(history_text(all[i].state), expected[i]);
  }
}

TEST(Store, FinishedSessionRecoversFinished) {
  TempDir tmp;
  Store store(tmp.path());
  SessionRecord r = make_record("done");
  store.create(r);
  while (!r.state.outcome.finished()) step(r, store);
  const auto loaded = store.load("done");
  ASSERT_TRUE(loaded.has_value());
  EXPECT_TRUE(loaded->closed());
  EXPECT_EQ(loaded->state.outcome, r.state.outcome);
}

TEST(Store, VerdictCachePersists) {
  TempDir tmp;
  const Document doc = load_document(pgame::testing::corpus_path("examples.lp"));
  const NormalFormula f = normalize(expand_sugar(doc.get("drinker").formula));
  const std::string key = verdict_cache_key(f, *doc.signature, SearchLimits{});
  EXPECT_NE(key, verdict_cache_key(f, *doc.signature, SearchLimits{10, 64, 3, 3}));
  const auto summary = verdict_summary(solve(f, doc.signature));
  EXPECT_EQ(summary["verdict"], "Valid");
  {
    Store store(tmp.path());
    EXPECT_FALSE(store.cached_verdict(key).has_value());
    store.put_verdict(key, summary);
    EXPECT_EQ(store.cached_verdict(key), summary);
  }
  Store reopened(tmp.path());
  EXPECT_EQ(reopened.cached_verdict(key), summary);
}

TEST(Limits, JsonRoundTripAndErrors) {
  const SearchLimits l{123, 7, 4, 2};
  const SearchLimits back = limits_from_json(limits_to_json(l));
  EXPECT_EQ(back.max_canonical_states, 123u);
  EXPECT_EQ(back.max_depth, 7u);
  EXPECT_EQ(back.int_bound, 4u);
  EXPECT_EQ(back.fresh_bound, 2u);

  const SearchLimits partial = limits_from_json(nlohmann::json{{"max_depth", 5}});
  EXPECT_EQ(partial.max_depth, 5u);
  EXPECT_EQ(partial.max_canonical_states, SearchLimits{}.max_canonical_states);

  EXPECT_THROW(limits_from_json(nlohmann::json::array()), Error);
  EXPECT_THROW(limits_from_json(nlohmann::json{{"max_depth", 0}}), Error);
  EXPECT_THROW(limits_from_json(nlohmann::json{{"max_depth", -3}}), Error);
  EXPECT_THROW(limits_from_json(nlohmann::json{{"max_depth", "many"}}), Error);
}
