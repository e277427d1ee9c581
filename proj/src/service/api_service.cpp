#include "eucgov/service/api_service.hpp"

#include <thread>

#include <httplib.h>

#include "eucgov/reporting/kpi.hpp"
#include "eucgov/risk/triage.hpp"
#include "eucgov/serialization.hpp"

namespace eucgov::service {

namespace fs = std::filesystem;
using inventory::Inventory;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownId:
    case ErrorCode::UnknownRisk:
    case ErrorCode::UnknownDraft: return 404;
    case ErrorCode::RetiredRecord:
    case ErrorCode::AlreadyClosed:
    case ErrorCode::EmptyStore: return 409;
    case ErrorCode::StoreUnreadable:
    case ErrorCode::PortInUse:
    case ErrorCode::Io: return 500;
    default: return 400;
  }
}

std::string error_body(std::string_view code, std::string_view message, std::string_view field) {
  json j = {{"code", code}, {"message", message}, {"field", field.empty() ? json(nullptr) : json(field)}};
  return j.dump();
}

namespace {

Response ok(const json& j) { return {200, j.dump()}; }

std::vector<std::string> segments(std::string_view path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    auto next = path.find('/', i);
    if (next == std::string_view::npos) next = path.size();
    if (next > i) out.emplace_back(path.substr(i, next - i));
    i = next + 1;
  }
  return out;
}

const std::string* query_param(const Request& r, const std::string& key) {
  auto it = r.query.find(key);
  return (it == r.query.end() || it->second.empty()) ? nullptr : &it->second;
}

json body_object(const Request& r) {
  if (r.body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  auto j = parse_json(r.body);
  if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "request body must be a JSON object");
  return j;
}

std::vector<std::string> toggles_from(const json& body) {
  auto it = body.find("toggles");
  if (it == body.end()) throw Error(ErrorCode::MissingField, "toggles is required", "toggles");
  if (!it->is_array()) throw Error(ErrorCode::InvalidInput, "toggles must be an array of names", "toggles");
  std::vector<std::string> out;
  for (const auto& t : *it) {
    if (!t.is_string()) throw Error(ErrorCode::InvalidInput, "toggles must be an array of names", "toggles");
    out.push_back(t.get<std::string>());
  }
  return out;
}

const json& member(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) throw Error(ErrorCode::MissingField, std::string(key) + " is required", key);
  return *it;
}

Date date_member(const json& body, const char* key) {
  const auto& v = member(body, key);
  if (!v.is_string()) throw Error(ErrorCode::InvalidInput, std::string(key) + " must be YYYY-MM-DD", key);
  return Date::parse(v.get<std::string>(), key);
}

}  // namespace

ApiService::ApiService(fs::path store_path, Inventory::Clock clock)
    : store_path_(std::move(store_path)), clock_(std::move(clock)), doc_(inventory::load_store(store_path_)) {}

inventory::StoreDocument ApiService::snapshot() const {
  std::shared_lock lock(mutex_);
  return doc_;
}

Date ApiService::today() const {
  if (!clock_) return Date::today();
  return Date{std::chrono::floor<std::chrono::days>(clock_())};
}

template <typename Op>
auto ApiService::mutate(Op&& op) {
  std::unique_lock lock(mutex_);
  Inventory inv(doc_, clock_);
  auto result = op(inv);
  inventory::save_store(store_path_, inv.document());
  doc_ = std::move(inv).release();
  return result;
}

Response ApiService::handle(const Request& request) {
  try {
    return route(request);
  } catch (const Error& e) {
    return {http_status(e.code()), error_body(to_string(e.code()), e.what(), e.field())};
  } catch (const std::exception& e) {
    return {500, error_body("Internal", e.what())};
  }
}

Response ApiService::route(const Request& r) {
  auto seg = segments(r.path);
  const auto& m = r.method;
  auto is = [&](std::initializer_list<std::string_view> pattern) {
    if (seg.size() != pattern.size()) return false;
    std::size_t i = 0;
    for (auto p : pattern) {
      if (p != "*" && seg[i] != p) return false;
      ++i;
    }
    return true;
  };
  auto method_not_allowed = [&]() -> Response {
    return {405, error_body("MethodNotAllowed", m + " is not supported on " + r.path)};
  };

  if (is({"api", "euca"})) {
    if (m == "GET") {
      inventory::EucaFilter filter;
      if (auto v = query_param(r, "department")) filter.department = *v;
      if (auto v = query_param(r, "band")) filter.band = risk::band_from_string(*v);
      if (auto v = query_param(r, "lifecycle")) filter.lifecycle = inventory::lifecycle_from_string(*v);
      if (auto v = query_param(r, "due_before")) filter.due_before = Date::parse(*v, "due_before");
      std::shared_lock lock(mutex_);
      return ok(Inventory(doc_).list_eucas(filter));
    }
    if (m == "POST") {
      auto record = body_object(r).get<inventory::EucaRecord>();
      return ok(mutate([&](Inventory& inv) { return inv.upsert_euca(record); }));
    }
    return method_not_allowed();
  }

  if (is({"api", "euca", "*"})) {
    if (m != "GET") return method_not_allowed();
    std::shared_lock lock(mutex_);
    return ok(Inventory(doc_).get(seg[2]));
  }

  if (is({"api", "euca", "*", "lifecycle"})) {
    if (m != "POST") return method_not_allowed();
    auto body = body_object(r);
    const auto& status = member(body, "status");
    if (!status.is_string()) throw Error(ErrorCode::InvalidInput, "status must be live or retired", "status");
    auto lifecycle = inventory::lifecycle_from_string(status.get<std::string>());
    std::string reason = body.contains("reason") && body["reason"].is_string() ? body["reason"].get<std::string>() : "";
    return ok(mutate([&](Inventory& inv) { return inv.set_lifecycle(seg[2], lifecycle, reason); }));
  }

  if (is({"api", "assess"})) {
    if (m != "POST") return method_not_allowed();
    auto body = body_object(r);
    if (!body.contains("input")) return ok(risk::assess(body.get<risk::AssessmentInput>()));
    auto input = member(body, "input").get<risk::AssessmentInput>();
    auto result = risk::assess(input);
    if (!body.contains("euca_id")) return ok(result);
    const auto& id = member(body, "euca_id");
    if (!id.is_string()) throw Error(ErrorCode::InvalidInput, "euca_id must be a string", "euca_id");
    return ok(mutate([&](Inventory& inv) { return inv.record_assessment(id.get<std::string>(), input, result); }));
  }

  if (is({"api", "whatif"})) {
    if (m != "POST") return method_not_allowed();
    auto body = body_object(r);
    auto input = member(body, "input").get<risk::AssessmentInput>();
    return ok(risk::what_if(input, toggles_from(body)));
  }

  if (is({"api", "triage"})) {
    if (m != "POST") return method_not_allowed();
    return ok(risk::triage(body_object(r).get<risk::TriageSubmission>()));
  }

  if (is({"api", "review", "*", "confirm"})) {
    if (m != "POST") return method_not_allowed();
    auto body = body_object(r);
    Date on = body.contains("confirmed_on") ? date_member(body, "confirmed_on") : today();
    return ok(mutate([&](Inventory& inv) { return inv.confirm_review(seg[2], on); }));
  }

  if (is({"api", "risk"})) {
    if (m == "GET") {
      std::shared_lock lock(mutex_);
      return ok(doc_.risk_register);
    }
    if (m == "POST") {
      auto body = body_object(r);
      const auto& euca = member(body, "euca_id");
      if (!euca.is_string()) throw Error(ErrorCode::InvalidInput, "euca_id must be a string", "euca_id");
      auto entry = body.get<inventory::RiskRegisterEntry>();
      return ok(mutate([&](Inventory& inv) { return inv.link_risk(euca.get<std::string>(), entry); }));
    }
    return method_not_allowed();
  }

  if (is({"api", "risk", "*", "close"})) {
    if (m != "POST") return method_not_allowed();
    auto body = body_object(r);
    Date on = body.contains("closed_on") ? date_member(body, "closed_on") : today();
    return ok(mutate([&](Inventory& inv) { return inv.close_risk(seg[2], on); }));
  }

  if (seg.size() >= 2 && seg[0] == "api" && seg[1] == "kpi" && seg.size() <= 3) {
    if (m != "GET") return method_not_allowed();
    reporting::Scope scope;
    if (auto v = query_param(r, "include_retired")) scope.include_retired = (*v == "true" || *v == "1");
    Date as_of = today();
    if (auto v = query_param(r, "as_of")) as_of = Date::parse(*v, "as_of");
    std::shared_lock lock(mutex_);
    if (seg.size() == 2) return ok(reporting::kpi_snapshot(doc_, as_of, scope));
    if (seg[2] == "overdue") return ok(reporting::overdue_reviews(doc_, as_of));
    if (seg[2] == "unregistered") return ok(reporting::unregistered_amber_red(doc_));
    if (seg[2] == "concentration") {
      long k = 7;
      if (auto v = query_param(r, "top_k")) {
        try {
          std::size_t used = 0;
          k = std::stol(*v, &used);
          if (used != v->size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
          throw Error(ErrorCode::InvalidInput, "top_k must be an integer", "top_k");
        }
      }
      if (k < 1) throw Error(ErrorCode::OutOfRange, "top_k must be at least 1", "top_k");
      return ok(reporting::department_concentration(doc_, static_cast<std::size_t>(k), scope));
    }
  }

  if (is({"api", "drafts", "*"})) {
    if (m == "GET") {
      std::shared_lock lock(mutex_);
      return ok(Inventory(doc_).get_draft(seg[2]));
    }
    if (m == "PUT") {
      auto draft = body_object(r);
      return ok(mutate([&](Inventory& inv) {
        inv.put_draft(seg[2], draft);
        return draft;
      }));
    }
    return method_not_allowed();
  }

  return {404, error_body("NotFound", "no route for " + m + " " + r.path)};
}

// ---------------------------------------------------------------------------
// HTTP transport

struct HttpServer::Impl {
  httplib::Server server;
  std::thread thread;
  int port = 0;
};

HttpServer::HttpServer(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}

HttpServer::~HttpServer() {
  stop();
  wait();
}

int HttpServer::port() const { return impl_->port; }

void HttpServer::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

void HttpServer::stop() { impl_->server.stop(); }

std::unique_ptr<HttpServer> serve(ApiService& service, const ServeOptions& options) {
  auto impl = std::make_unique<HttpServer::Impl>();
  auto& srv = impl->server;
  // httplib's default adds SO_REUSEPORT, which would let a second server
  // share the port instead of failing.
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });

  auto handler = [&service](const httplib::Request& req, httplib::Response& res) {
    Request r{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    auto out = service.handle(r);
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  const std::string api = "/api/.*";
  srv.Get(api, handler);
  srv.Post(api, handler);
  srv.Put(api, handler);
  srv.Delete(api, handler);
  if (options.ui_dir && !srv.set_mount_point("/", options.ui_dir->string())) {
    throw Error(ErrorCode::Io, "UI directory not found: " + options.ui_dir->string(), "ui-dir");
  }

  if (options.port == 0) {
    impl->port = srv.bind_to_any_port(options.host);
    if (impl->port < 0) throw Error(ErrorCode::PortInUse, "cannot bind " + options.host, "port");
  } else {
    if (!srv.bind_to_port(options.host, options.port)) {
      throw Error(ErrorCode::PortInUse,
                  "cannot bind " + options.host + ":" + std::to_string(options.port) + " (port in use?)", "port");
    }
    impl->port = options.port;
  }
  impl->thread = std::thread([&srv] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  return std::unique_ptr<HttpServer>(new HttpServer(std::move(impl)));
}

}  // namespace eucgov::service
