#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>

#include "eucgov/error.hpp"
#include "eucgov/inventory/inventory.hpp"

namespace eucgov::service {

struct Request {
  std::string method;  // upper case
  std::string path;    // decoded, without query string
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;  // JSON
};

/// 400 validation, 404 unknown id, 409 state conflict, 500 otherwise.
int http_status(ErrorCode code);

/// `{"code": ..., "message": ..., "field": ... | null}`
std::string error_body(std::string_view code, std::string_view message, std::string_view field = {});

/// Routes JSON requests onto the risk, inventory and reporting modules.
/// Transport-independent so it can be exercised without sockets.
///
/// Reads share a lock on the in-memory document. A mutation takes the lock
/// exclusively, applies the operation to a copy, persists the copy and only
/// then publishes it, so a failed request leaves both memory and file as they
/// were.
class ApiService {
 public:
  /// Loads the store; throws Error{StoreUnreadable}.
  explicit ApiService(std::filesystem::path store_path, inventory::Inventory::Clock clock = {});

  Response handle(const Request& request);

  inventory::StoreDocument snapshot() const;
  const std::filesystem::path& store_path() const { return store_path_; }

 private:
  Response route(const Request& request);
  Date today() const;

  template <typename Op>
  auto mutate(Op&& op);

  std::filesystem::path store_path_;
  inventory::Inventory::Clock clock_;
  mutable std::shared_mutex mutex_;
  inventory::StoreDocument doc_;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::optional<std::filesystem::path> ui_dir;  // static assets served at /
};

/// A bound, listening HTTP front end for an ApiService. The service must
/// outlive the server.
class HttpServer {
 public:
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  int port() const;
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();
  void stop();

 private:
  friend std::unique_ptr<HttpServer> serve(ApiService& service, const ServeOptions& options);
  struct Impl;
  explicit HttpServer(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

/// Binds and starts listening on a background thread. Throws Error{PortInUse}
/// when the address cannot be bound.
std::unique_ptr<HttpServer> serve(ApiService& service, const ServeOptions& options);

}  // namespace eucgov::service
