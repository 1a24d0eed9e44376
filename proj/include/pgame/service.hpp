#pragma once

// Session lifecycle behind the HTTP API.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgame/netsim.hpp"
#include "pgame/store.hpp"
#include "pgame/syntax.hpp"

namespace httplib {
class Server;
}

namespace pgame {

/// An error with an HTTP status: 400 bad request, 404 unknown session,
/// 409 illegal move or conflict, 410 closed session, 500 storage.
class ServiceError : public Error {
 public:
  ServiceError(int status, const std::string& message) : Error(message), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

/// Formulas offered to clients by name.
struct CatalogEntry {
  std::string name;
  std::string origin;
  NormalFormula formula;
  std::shared_ptr<const Signature> signature;
};

/// Hex FNV-1a of a string.
std::string fnv1a_hex(std::string_view text);

/// Token of a move in a state: depends on the state version and the move.
std::string move_token(const GameState& s, const Move& m);

class SessionManager {
 public:
  /// store may be null (memory only). Existing sessions are recovered.
  SessionManager(std::shared_ptr<Store> store, std::vector<CatalogEntry> catalog);

  nlohmann::json catalog() const;
  /// Body: {"formula": NAME} or {"source": TEXT, "signature": TEXT, "name"?},
  /// optional "human": "player" | "opponent" | "none", optional "limits".
  nlohmann::json create(const nlohmann::json& body);
  nlohmann::json list() const;
  nlohmann::json state(const std::string& id) const;
  nlohmann::json legal_moves(const std::string& id) const;
  /// Body: {"token": T} or {"move": {"formula": F, "values": [...]}}.
  nlohmann::json submit(const std::string& id, const nlohmann::json& body);
  nlohmann::json auto_step(const std::string& id);
  nlohmann::json hint(const std::string& id) const;
  nlohmann::json transcript(const std::string& id) const;

 private:
  struct Session {
    SessionRecord record;
    Annotator annotator;
    std::vector<NetEvent> events;
    /// Held while a move is applied; a second submitter gets a conflict.
    std::mutex move_mutex;
    /// Guards the fields above.
    mutable std::mutex data_mutex;
  };

  std::shared_ptr<Session> find(const std::string& id) const;
  static nlohmann::json view(const SessionRecord& r);
  nlohmann::json apply(Session& s, const Move& m);

  std::shared_ptr<Store> store_;
  std::vector<CatalogEntry> catalog_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t counter_ = 0;
};

/// Routes under /api on a new server; the caller binds and listens.
std::unique_ptr<httplib::Server> make_server(SessionManager& manager);

/// Every formula of every document.
std::vector<CatalogEntry> load_catalog(const std::vector<std::filesystem::path>& documents);

}  // namespace pgame
