#include "pgame/store.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pgame/syntax.hpp"
#include "pgame/transcript.hpp"

namespace pgame {

namespace fs = std::filesystem;
using nlohmann::json;

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

json limits_to_json(const SearchLimits& l) {
  return {{"max_canonical_states", l.max_canonical_states},
          {"max_depth", l.max_depth},
          {"int_bound", l.int_bound},
          {"fresh_bound", l.fresh_bound}};
}

SearchLimits limits_from_json(const json& j, SearchLimits base) {
  if (!j.is_object()) throw Error("limits must be an object");
  auto read = [&](const char* name, auto& field) {
    if (!j.contains(name)) return;
    if (!j[name].is_number_integer() || j[name].template get<std::int64_t>() <= 0)
      throw Error(std::string("limit '") + name + "' must be a positive integer");
    field = j[name].template get<std::remove_reference_t<decltype(field)>>();
  };
  read("max_canonical_states", base.max_canonical_states);
  read("max_depth", base.max_depth);
  read("int_bound", base.int_bound);
  read("fresh_bound", base.fresh_bound);
  return base;
}

json meta_to_json(const SessionRecord& r) {
  return {{"id", r.id},
          {"formula_name", r.formula_name},
          {"formula", r.formula_source},
          {"signature", r.signature_source},
          {"human", r.human ? json(std::string(to_string(*r.human))) : json(nullptr)},
          {"limits", limits_to_json(r.limits)},
          {"created_ms", r.created_ms}};
}

namespace {

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw StoreError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw StoreError("cannot rename " + tmp.string() + ": " + ec.message());
}

void append_line(const fs::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw StoreError("cannot append to " + path.string());
  out << line << '\n';
  out.flush();
  if (!out) throw StoreError("append failed for " + path.string());
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::vector<json> out;
  std::ifstream in(path, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error&) {
      break;  // torn tail
    }
  }
  return out;
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("cannot read " + path.string());
  return json::parse(in);
}

std::optional<Side> side_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  const std::string s = j.get<std::string>();
  if (s == "player") return Side::Player;
  if (s == "opponent") return Side::Opponent;
  throw StoreError("bad side '" + s + "'");
}

}  // namespace

Store::Store(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_ / "sessions", ec);
  if (ec) throw StoreError("cannot create store at " + dir_.string() + ": " + ec.message());
  for (const auto& j : read_jsonl(dir_ / "verdicts.jsonl"))
    if (j.contains("key") && j.contains("verdict")) verdicts_[j["key"].get<std::string>()] = j["verdict"];
}

fs::path Store::session_dir(const std::string& id) const { return dir_ / "sessions" / id; }

void Store::create(const SessionRecord& r) {
  std::error_code ec;
  fs::create_directories(session_dir(r.id), ec);
  if (ec) throw StoreError("cannot create session directory: " + ec.message());
  write_atomic(session_dir(r.id) / "meta.json", meta_to_json(r).dump(2));
  std::ofstream(session_dir(r.id) / "log.jsonl", std::ios::app);
  snapshot(r);
}

void Store::append(const SessionRecord& r) {
  if (r.state.history.empty()) throw StoreError("no move to append");
  json line = {{"version", r.state.version()}, {"at_ms", r.updated_ms}, {"move", to_json(r.state.history.back())}};
  append_line(session_dir(r.id) / "log.jsonl", line.dump());
  snapshot(r);
}

void Store::snapshot(const SessionRecord& r) {
  json snap = {{"id", r.id}, {"updated_ms", r.updated_ms}, {"state", state_to_json(r.state)}};
  write_atomic(session_dir(r.id) / "snapshot.json", snap.dump(2));
}

std::optional<SessionRecord> Store::load(const std::string& id) const {
  const fs::path d = session_dir(id);
  if (!fs::exists(d / "meta.json")) return std::nullopt;
  const json meta = read_json(d / "meta.json");
  SessionRecord r;
  r.id = meta.at("id").get<std::string>();
  r.formula_name = meta.at("formula_name").get<std::string>();
  r.formula_source = meta.at("formula").get<std::string>();
  r.signature_source = meta.at("signature").get<std::string>();
  r.human = side_from(meta.at("human"));
  r.limits = limits_from_json(meta.at("limits"));
  r.created_ms = meta.at("created_ms").get<std::int64_t>();
  r.updated_ms = r.created_ms;

  auto sig = std::make_shared<const Signature>(parse_signature(SourceText{r.signature_source, id + "/meta.json"}));
  Formula f = parse_core_formula(r.formula_source, *sig);
  r.state = init_game(is_normal(f) ? NormalFormula(f) : normalize(f), sig);
  for (const auto& line : read_jsonl(d / "log.jsonl")) {
    apply_move_in_place(r.state, move_from_json(line.at("move"), *sig));
    r.updated_ms = line.value("at_ms", r.updated_ms);
  }
  return r;
}

std::vector<SessionRecord> Store::recover() const {
  std::vector<SessionRecord> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir_ / "sessions", ec)) {
    if (!entry.is_directory()) continue;
    if (auto r = load(entry.path().filename().string())) out.push_back(std::move(*r));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.created_ms < b.created_ms; });
  return out;
}

std::optional<json> Store::cached_verdict(const std::string& key) const {
  std::lock_guard lock(verdict_mutex_);
  auto it = verdicts_.find(key);
  if (it == verdicts_.end()) return std::nullopt;
  return it->second;
}

void Store::put_verdict(const std::string& key, const json& verdict) {
  std::lock_guard lock(verdict_mutex_);
  append_line(dir_ / "verdicts.jsonl", json{{"key", key}, {"verdict", verdict}}.dump());
  verdicts_[key] = verdict;
}

fs::path default_store_dir() {
  if (const char* env = std::getenv("PGAME_STORE"); env && *env) return env;
  return "pgame-store";
}

std::string verdict_cache_key(const NormalFormula& f, const Signature& sig, const SearchLimits& limits) {
  return canonical_key(f.formula()) + "|" + print_signature(sig) + "|" + limits_to_json(limits).dump();
}

json verdict_summary(const Verdict& v) {
  json j = {{"verdict", std::string(to_string(v.kind))},
            {"states", v.stats.states},
            {"depth", v.stats.depth},
            {"seconds", v.stats.seconds}};
  if (!v.stats.limit.empty()) j["limit"] = v.stats.limit;
  return j;
}

}  // namespace pgame
