#pragma once

// File-based session store: per session an append-only move log and a
// snapshot, plus a shared verdict cache.
//
//   DIR/sessions/ID/meta.json
//   DIR/sessions/ID/log.jsonl      one move per line
//   DIR/sessions/ID/snapshot.json
//   DIR/verdicts.jsonl

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgame/game.hpp"
#include "pgame/solver.hpp"

namespace pgame {

struct SessionRecord {
  std::string id;
  std::string formula_name;
  /// Printed normal form of the root formula.
  std::string formula_source;
  std::string signature_source;
  /// Side played by the client; nullopt when the engine plays both.
  std::optional<Side> human;
  SearchLimits limits;
  std::int64_t created_ms = 0;
  std::int64_t updated_ms = 0;
  GameState state;

  bool closed() const { return state.outcome.finished(); }
};

nlohmann::json limits_to_json(const SearchLimits& l);
SearchLimits limits_from_json(const nlohmann::json& j, SearchLimits base = {});

/// Metadata only (no state).
nlohmann::json meta_to_json(const SessionRecord& r);

class StoreError : public Error {
 public:
  using Error::Error;
};

class Store {
 public:
  /// Creates the directory layout if needed. Throws StoreError.
  explicit Store(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }

  void create(const SessionRecord& r);
  /// Appends the last move of r.state to the log, then rewrites the snapshot.
  void append(const SessionRecord& r);
  void snapshot(const SessionRecord& r);

  /// Rebuilds every session by replaying its log. A torn final log line is
  /// ignored.
  std::vector<SessionRecord> recover() const;
  std::optional<SessionRecord> load(const std::string& id) const;

  std::optional<nlohmann::json> cached_verdict(const std::string& key) const;
  void put_verdict(const std::string& key, const nlohmann::json& verdict);

 private:
  std::filesystem::path session_dir(const std::string& id) const;

  std::filesystem::path dir_;
  mutable std::mutex verdict_mutex_;
  std::map<std::string, nlohmann::json> verdicts_;
};

/// $PGAME_STORE, or ./pgame-store.
std::filesystem::path default_store_dir();

/// Key for the verdict cache: formula, signature and limits.
std::string verdict_cache_key(const NormalFormula& f, const Signature& sig, const SearchLimits& limits);

nlohmann::json verdict_summary(const Verdict& v);

std::int64_t now_ms();

}  // namespace pgame
