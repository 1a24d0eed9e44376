#include "pgame/service.hpp"

#include <httplib.h>

#include <chrono>

#include "pgame/strategy.hpp"
#include "pgame/transcript.hpp"

namespace pgame {

using nlohmann::json;

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string move_token(const GameState& s, const Move& m) {
  std::string content = std::to_string(s.version()) + "|" + std::string(to_string(m.side)) + "|" +
                        canonical_key(m.chosen.formula());
  for (const auto& v : m.values) content += "|" + to_string(v);
  return "v" + std::to_string(s.version()) + "." + fnv1a_hex(content);
}

std::vector<CatalogEntry> load_catalog(const std::vector<std::filesystem::path>& documents) {
  std::vector<CatalogEntry> out;
  std::set<std::string> names;
  for (const auto& path : documents) {
    Document doc = load_document(path);
    for (const auto& nf : doc.formulas) {
      Formula core = expand_sugar(nf.formula, *doc.signature);
      if (!is_closed(core)) continue;
      std::string name = nf.name;
      if (!names.insert(name).second) {
        name = path.stem().string() + ":" + nf.name;
        names.insert(name);
      }
      out.push_back({name, path.string(), normalize(core), doc.signature});
    }
  }
  return out;
}

SessionManager::SessionManager(std::shared_ptr<Store> store, std::vector<CatalogEntry> catalog)
    : store_(std::move(store)), catalog_(std::move(catalog)) {
  if (!store_) return;
  for (auto& r : store_->recover()) {
    auto s = std::make_shared<Session>();
    GameState replayed = init_game(r.state.root, r.state.signature);
    for (const auto& m : r.state.history) {
      s->events.push_back(s->annotator.classify(replayed, m));
      apply_move_in_place(replayed, m);
    }
    s->record = std::move(r);
    sessions_.emplace(s->record.id, s);
  }
}

json SessionManager::catalog() const {
  json out = json::array();
  for (const auto& e : catalog_)
    out.push_back({{"name", e.name}, {"origin", e.origin}, {"formula", print_formula(e.formula)}});
  return out;
}

namespace {

std::optional<Side> parse_role(const json& body) {
  const std::string h = body.value("human", "player");
  if (h == "player") return Side::Player;
  if (h == "opponent") return Side::Opponent;
  if (h == "none") return std::nullopt;
  throw ServiceError(400, "human must be 'player', 'opponent' or 'none'");
}

json move_json(const GameState& s, const Move& m) {
  json j = to_json(m);
  j["text"] = to_string(m);
  j["token"] = move_token(s, m);
  return j;
}

}  // namespace

json SessionManager::create(const json& body) {
  if (!body.is_object()) throw ServiceError(400, "request body must be an object");
  SessionRecord r;
  NormalFormula root;
  std::shared_ptr<const Signature> sig;
  try {
    if (body.contains("formula")) {
      const std::string name = body["formula"].get<std::string>();
      auto it = std::find_if(catalog_.begin(), catalog_.end(), [&](const auto& e) { return e.name == name; });
      if (it == catalog_.end()) throw ServiceError(404, "unknown formula '" + name + "'");
      root = it->formula;
      sig = it->signature;
      r.formula_name = name;
    } else if (body.contains("source")) {
      sig = std::make_shared<const Signature>(
          parse_signature(SourceText{body.value("signature", std::string()), "<signature>"}));
      Formula f = parse_core_formula(body["source"].get<std::string>(), *sig);
      root = normalize(f);
      r.formula_name = body.value("name", std::string("custom"));
    } else {
      throw ServiceError(400, "give either 'formula' (a catalog name) or 'source'");
    }
    r.human = parse_role(body);
    if (body.contains("limits")) r.limits = limits_from_json(body["limits"]);
    r.state = init_game(root, sig);
  } catch (const ServiceError&) {
    throw;
  } catch (const json::exception& e) {
    throw ServiceError(400, e.what());
  } catch (const Error& e) {
    throw ServiceError(400, e.what());
  }
  r.formula_source = print_formula(root);
  r.signature_source = print_signature(*sig);
  r.created_ms = r.updated_ms = now_ms();

  auto s = std::make_shared<Session>();
  {
    std::lock_guard lock(mutex_);
    do {
      const auto ns = std::chrono::steady_clock::now().time_since_epoch().count();
      r.id = "s" + fnv1a_hex(std::to_string(ns) + "/" + std::to_string(++counter_) + "/" + r.formula_name);
    } while (sessions_.count(r.id));
    s->record = std::move(r);
    sessions_.emplace(s->record.id, s);
  }
  if (store_) {
    try {
      store_->create(s->record);
    } catch (const Error& e) {
      std::lock_guard lock(mutex_);
      sessions_.erase(s->record.id);
      throw ServiceError(500, e.what());
    }
  }
  return view(s->record);
}

json SessionManager::list() const {
  std::lock_guard lock(mutex_);
  json out = json::array();
  for (const auto& [id, s] : sessions_) {
    std::lock_guard data(s->data_mutex);
    out.push_back({{"id", id},
                   {"formula_name", s->record.formula_name},
                   {"closed", s->record.closed()},
                   {"version", s->record.state.version()}});
  }
  return out;
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(404, "unknown session '" + id + "'");
  return it->second;
}

json SessionManager::view(const SessionRecord& r) {
  json j = meta_to_json(r);
  j["updated_ms"] = r.updated_ms;
  j["state"] = state_to_json(r.state);
  j["closed"] = r.closed();
  j["engine_turn"] = !r.closed() && (!r.human || *r.human != r.state.turn);
  return j;
}

json SessionManager::state(const std::string& id) const {
  auto s = find(id);
  std::lock_guard data(s->data_mutex);
  return view(s->record);
}

json SessionManager::legal_moves(const std::string& id) const {
  auto s = find(id);
  GameState st;
  Annotator ann;
  {
    std::lock_guard data(s->data_mutex);
    st = s->record.state;
    ann = s->annotator;
  }
  json moves = json::array();
  if (!st.outcome.finished()) {
    for (const auto& m : pgame::legal_moves(st)) {
      json j = move_json(st, m);
      Annotator probe = ann;
      j["annotation"] = to_string(probe.classify(st, m));
      bool fresh = false;
      for (const auto& v : m.values)
        if (const auto* c = std::get_if<std::string>(&v)) fresh = fresh || !st.in_pool(*c);
      j["fresh"] = fresh;
      if (m.side == Side::Opponent) j["losing"] = opponent_forfeits(st, m);
      moves.push_back(std::move(j));
    }
  }
  return {{"id", id},
          {"version", st.version()},
          {"turn", std::string(to_string(st.turn))},
          {"closed", st.outcome.finished()},
          {"moves", moves}};
}

json SessionManager::apply(Session& s, const Move& m) {
  SessionRecord next;
  Annotator ann;
  {
    std::lock_guard data(s.data_mutex);
    next = s.record;
    ann = s.annotator;
  }
  try {
    check_move(next.state, m);
  } catch (const IllegalMove& e) {
    throw ServiceError(409, std::string("illegal move: ") + e.what());
  }
  NetEvent ev = ann.classify(next.state, m);
  apply_move_in_place(next.state, m);
  next.updated_ms = now_ms();
  if (store_) {
    try {
      store_->append(next);
    } catch (const Error& e) {
      throw ServiceError(500, e.what());
    }
  }
  std::lock_guard data(s.data_mutex);
  s.record = std::move(next);
  s.annotator = std::move(ann);
  s.events.push_back(ev);
  json out = view(s.record);
  out["event"] = to_json(ev);
  out["move"] = to_json(m);
  return out;
}

json SessionManager::submit(const std::string& id, const json& body) {
  auto s = find(id);
  std::unique_lock guard(s->move_mutex, std::try_to_lock);
  if (!guard.owns_lock()) throw ServiceError(409, "another move is being applied to this session");
  GameState st;
  std::optional<Side> human;
  {
    std::lock_guard data(s->data_mutex);
    st = s->record.state;
    human = s->record.human;
  }
  if (st.outcome.finished()) throw ServiceError(410, "the session is closed: " + to_string(st.outcome));
  if (human && *human != st.turn) throw ServiceError(409, "it is the engine's turn");
  if (!body.is_object()) throw ServiceError(400, "request body must be an object");

  if (body.contains("token")) {
    const std::string token = body["token"].is_string() ? body["token"].get<std::string>() : "";
    for (const auto& m : pgame::legal_moves(st))
      if (move_token(st, m) == token) return apply(*s, m);
    throw ServiceError(409, "stale or unknown move token");
  }
  if (!body.contains("move")) throw ServiceError(400, "give either 'token' or 'move'");
  const json& mj = body["move"];
  Move m;
  m.side = st.turn;
  try {
    if (mj.contains("side") && mj["side"].get<std::string>() != to_string(st.turn))
      throw ServiceError(409, "it is the " + std::string(to_string(st.turn)) + "'s turn");
    m.chosen = parse_game_formula(mj.at("formula").get<std::string>(), *st.signature);
    if (mj.contains("values"))
      for (const auto& v : mj["values"]) m.values.push_back(value_from_json(v));
  } catch (const ServiceError&) {
    throw;
  } catch (const json::exception& e) {
    throw ServiceError(400, e.what());
  } catch (const Error& e) {
    throw ServiceError(400, e.what());
  }
  return apply(*s, m);
}

json SessionManager::auto_step(const std::string& id) {
  auto s = find(id);
  std::unique_lock guard(s->move_mutex, std::try_to_lock);
  if (!guard.owns_lock()) throw ServiceError(409, "another move is being applied to this session");
  GameState st;
  std::optional<Side> human;
  SearchLimits limits;
  {
    std::lock_guard data(s->data_mutex);
    st = s->record.state;
    human = s->record.human;
    limits = s->record.limits;
  }
  if (st.outcome.finished()) throw ServiceError(410, "the session is closed: " + to_string(st.outcome));
  if (human && *human == st.turn) throw ServiceError(409, "waiting for the client's move");
  SearchLimits greedy{std::min<std::size_t>(limits.max_canonical_states, 20'000),
                      std::min<std::size_t>(limits.max_depth, 16), limits.int_bound, limits.fresh_bound};
  const Strategy engine = st.turn == Side::Player ? greedy_strategy(greedy) : fresh_sender(PoolPolicy{limits.int_bound, 1});
  auto m = engine(st);
  if (!m) throw ServiceError(500, "the engine has no move");
  return apply(*s, *m);
}

json SessionManager::hint(const std::string& id) const {
  auto s = find(id);
  GameState st;
  SearchLimits limits;
  {
    std::lock_guard data(s->data_mutex);
    st = s->record.state;
    limits = s->record.limits;
  }
  if (st.outcome.finished()) throw ServiceError(410, "the session is closed: " + to_string(st.outcome));
  Verdict v = solve_from(st, limits);
  json out = {{"verdict", verdict_summary(v)}, {"move", nullptr}};
  if (v.certificate && v.certificate->side == st.turn) {
    auto it = v.certificate->moves.find(strategy_key(st));
    if (it != v.certificate->moves.end())
      if (auto m = concretize(st, it->second)) out["move"] = move_json(st, *m);
  }
  return out;
}

json SessionManager::transcript(const std::string& id) const {
  auto s = find(id);
  SessionTrace trace;
  {
    std::lock_guard data(s->data_mutex);
    trace.transcript = make_transcript(s->record.state);
    trace.events = s->events;
  }
  json events = json::array();
  for (const auto& e : trace.events) events.push_back(to_json(e));
  return {{"table", to_text(trace.transcript)},
          {"transcript", to_json(trace.transcript)},
          {"events", events},
          {"timeline", to_text(trace)}};
}

namespace {

template <typename F>
void respond(httplib::Response& res, F&& body) {
  res.set_header("Access-Control-Allow-Origin", "*");
  try {
    res.set_content(body().dump(2), "application/json");
  } catch (const ServiceError& e) {
    res.status = e.status();
    res.set_content(json{{"error", e.what()}, {"status", e.status()}}.dump(2), "application/json");
  } catch (const json::exception& e) {
    res.status = 400;
    res.set_content(json{{"error", e.what()}, {"status", 400}}.dump(2), "application/json");
  } catch (const std::exception& e) {
    res.status = 500;
    res.set_content(json{{"error", e.what()}, {"status", 500}}.dump(2), "application/json");
  }
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return json::parse(req.body);
}

}  // namespace

std::unique_ptr<httplib::Server> make_server(SessionManager& mgr) {
  auto srv = std::make_unique<httplib::Server>();
  using Req = httplib::Request;
  using Res = httplib::Response;
  srv->Get("/api/formulas", [&mgr](const Req&, Res& res) { respond(res, [&] { return mgr.catalog(); }); });
  srv->Get("/api/sessions", [&mgr](const Req&, Res& res) { respond(res, [&] { return mgr.list(); }); });
  srv->Post("/api/sessions", [&mgr](const Req& req, Res& res) {
    respond(res, [&] {
      res.status = 201;
      return mgr.create(body_of(req));
    });
  });
  srv->Get(R"(/api/sessions/([^/]+))", [&mgr](const Req& req, Res& res) {
    respond(res, [&] { return mgr.state(req.matches[1]); });
  });
  srv->Get(R"(/api/sessions/([^/]+)/moves)", [&mgr](const Req& req, Res& res) {
    respond(res, [&] { return mgr.legal_moves(req.matches[1]); });
  });
  srv->Post(R"(/api/sessions/([^/]+)/moves)", [&mgr](const Req& req, Res& res) {
    respond(res, [&] { return mgr.submit(req.matches[1], body_of(req)); });
  });
  srv->Post(R"(/api/sessions/([^/]+)/auto)", [&mgr](const Req& req, Res& res) {
    respond(res, [&] { return mgr.auto_step(req.matches[1]); });
  });
  srv->Get(R"(/api/sessions/([^/]+)/hint)", [&mgr](const Req& req, Res& res) {
    respond(res, [&] { return mgr.hint(req.matches[1]); });
  });
  srv->Get(R"(/api/sessions/([^/]+)/transcript)", [&mgr](const Req& req, Res& res) {
    respond(res, [&] { return mgr.transcript(req.matches[1]); });
  });
  srv->Options(R"(/api/.*)", [](const Req&, Res& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  return srv;
}

}  // namespace pgame
