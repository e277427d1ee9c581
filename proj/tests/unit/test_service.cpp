#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "eucgov/error.hpp"
#include "eucgov/reporting/kpi.hpp"
#include "eucgov/serialization.hpp"
#include "eucgov/service/api_service.hpp"
#include "stores.hpp"

using namespace eucgov;
using namespace eucgov::service;
namespace fs = std::filesystem;

namespace {

struct TempStore {
  fs::path dir;
  fs::path path;
  explicit TempStore(const inventory::StoreDocument* seed = nullptr) {
    dir = fs::temp_directory_path() / ("eucgov-svc-" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
    path = dir / "store.json";
    if (seed) inventory::save_store(path, *seed);
  }
  ~TempStore() { fs::remove_all(dir); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Request req(std::string method, std::string path, json body = nullptr, std::map<std::string, std::string> query = {}) {
  return {std::move(method), std::move(path), std::move(query), body.is_null() ? "" : body.dump()};
}

json controls(bool in_place) {
  json c = json::object();
  for (const auto& f : risk::control_fields()) c[std::string(f.name)] = f.is_control && in_place;
  return c;
}

json input_body(int c, int m, int impact, json ctl) {
  return {{"complexity", c}, {"materiality", m}, {"impact", impact}, {"controls", ctl}, {"assessed_on", "2019-01-15"}};
}

json red_case() {
  // Security, version control and review all failing.
  auto ctl = controls(true);
  for (auto name : {"location_known", "operating_instructions", "backup_in_place", "version_controlled",
                    "review_current", "testing_evidenced", "access_restricted", "integrity_protected"}) {
    ctl[name] = false;
  }
  return input_body(3, 2, 5, ctl);
}

json body_of(const Response& r) { return json::parse(r.body); }

}  // namespace

TEST_CASE("status mapping") {
  CHECK(http_status(ErrorCode::UnknownId) == 404);
  CHECK(http_status(ErrorCode::UnknownRisk) == 404);
  CHECK(http_status(ErrorCode::UnknownDraft) == 404);
  CHECK(http_status(ErrorCode::RetiredRecord) == 409);
  CHECK(http_status(ErrorCode::AlreadyClosed) == 409);
  CHECK(http_status(ErrorCode::MissingField) == 400);
  CHECK(http_status(ErrorCode::ScaleViolation) == 400);
  CHECK(http_status(ErrorCode::StoreUnreadable) == 500);
  auto e = json::parse(error_body("UnknownId", "no such record", ""));
  CHECK(e["code"] == "UnknownId");
  CHECK(e["field"].is_null());
  CHECK(json::parse(error_body("MissingField", "m", "name"))["field"] == "name");
}

TEST_CASE("assess endpoint") {
  TempStore store;
  ApiService svc(store.path, testing::fixed_clock());
  auto r = svc.handle(req("POST", "/api/assess", input_body(1, 1, 1, controls(true))));
  CHECK(r.status == 200);
  CHECK(body_of(r)["band"] == "Blue");
  CHECK(body_of(r) == json(risk::assess(input_body(1, 1, 1, controls(true)).get<risk::AssessmentInput>())));

  auto wrapped = svc.handle(req("POST", "/api/assess", {{"input", input_body(1, 1, 1, controls(true))}}));
  CHECK(wrapped.body == r.body);

  auto missing = input_body(1, 1, 1, controls(true));
  missing.erase("materiality");
  auto bad = svc.handle(req("POST", "/api/assess", missing));
  CHECK(bad.status == 400);
  CHECK(body_of(bad)["code"] == "MissingField");
  CHECK(body_of(bad)["field"] == "materiality");

  auto garbage = svc.handle({"POST", "/api/assess", {}, "{oops"});
  CHECK(garbage.status == 400);
  CHECK(body_of(garbage)["code"] == "InvalidInput");
  CHECK_FALSE(fs::exists(store.path));
}

TEST_CASE("whatif endpoint equals what_if") {
  TempStore store;
  ApiService svc(store.path, testing::fixed_clock());
  auto base = svc.handle(req("POST", "/api/assess", red_case()));
  CHECK(body_of(base)["band"] == "Red");
  auto r = svc.handle(req("POST", "/api/whatif", {{"input", red_case()}, {"toggles", {"version_controlled"}}}));
  CHECK(r.status == 200);
  std::vector<std::string> t{"version_controlled"};
  auto expected = risk::what_if(red_case().get<risk::AssessmentInput>(), t);
  CHECK(body_of(r) == json(expected));
  CHECK(rank(expected.band) < rank(risk::RatingBand::Red));

  auto unknown = svc.handle(req("POST", "/api/whatif", {{"input", red_case()}, {"toggles", {"nope"}}}));
  CHECK(unknown.status == 400);
  CHECK(body_of(unknown)["code"] == "UnknownField");
  CHECK(body_of(unknown)["field"] == "nope");
}

TEST_CASE("triage endpoint") {
  TempStore store;
  ApiService svc(store.path, testing::fixed_clock());
  auto r = svc.handle(req("POST", "/api/triage", {{"department", "Facilities"}, {"has_euc", 0}}));
  CHECK(r.status == 200);
  CHECK(body_of(r)["band"] == "Green");
}

TEST_CASE("inventory round trip through the service") {
  TempStore store;
  ApiService svc(store.path, testing::fixed_clock());
  auto created = svc.handle(req("POST", "/api/euca", {{"name", "Complaints DB"}, {"department", "Complaints"},
                                                     {"manager", "J. Smith"}}));
  REQUIRE(created.status == 200);
  auto id = body_of(created)["id"].get<std::string>();
  CHECK(body_of(created)["lifecycle_status"] == "live");
  CHECK(fs::exists(store.path));
  CHECK(inventory::load_store(store.path) == svc.snapshot());

  auto assessed = svc.handle(req("POST", "/api/assess", {{"input", red_case()}, {"euca_id", id}}));
  CHECK(assessed.status == 200);
  CHECK(body_of(assessed)["latest_assessment"]["result"]["band"] == "Red");
  CHECK(body_of(assessed)["next_review"] == "2020-01-15");

  auto listed = svc.handle(req("GET", "/api/euca", nullptr, {{"band", "Red"}}));
  CHECK(body_of(listed).size() == 1);
  CHECK(body_of(svc.handle(req("GET", "/api/euca", nullptr, {{"department", "Other"}}))).empty());
  CHECK(body_of(svc.handle(req("GET", "/api/euca/" + id)))["name"] == "Complaints DB");

  auto kpi = svc.handle(req("GET", "/api/kpi", nullptr, {{"as_of", "2019-03-31"}}));
  CHECK(body_of(kpi)["band_counts"]["Red"] == 1);
  CHECK(body_of(kpi)["unregistered_amber_red_count"] == 1);
  CHECK(body_of(svc.handle(req("GET", "/api/kpi/unregistered"))).size() == 1);

  auto risk = svc.handle(req("POST", "/api/risk",
                             {{"euca_id", id}, {"description", "Key person"}, {"inherent_likelihood", 4},
                              {"inherent_severity", 4}, {"residual_likelihood", 2}, {"residual_severity", 3},
                              {"opened", "2019-02-01"}}));
  REQUIRE(risk.status == 200);
  CHECK(body_of(risk)["inherent_score"] == 16);
  auto risk_id = body_of(risk)["risk_id"].get<std::string>();
  CHECK(body_of(svc.handle(req("GET", "/api/kpi/unregistered"))).empty());

  auto closed = svc.handle(req("POST", "/api/risk/" + risk_id + "/close", {{"closed_on", "2019-03-01"}}));
  CHECK(body_of(closed)["status"] == "closed");
  auto again = svc.handle(req("POST", "/api/risk/" + risk_id + "/close", {{"closed_on", "2019-03-02"}}));
  CHECK(again.status == 409);
  CHECK(body_of(again)["code"] == "AlreadyClosed");

  auto review = svc.handle(req("POST", "/api/review/" + id + "/confirm", {{"confirmed_on", "2020-02-29"}}));
  CHECK(body_of(review)["next_review"] == "2021-02-28");

  auto retire = svc.handle(req("POST", "/api/euca/" + id + "/lifecycle", {{"status", "retired"}, {"reason", "x"}}));
  CHECK(body_of(retire)["lifecycle_status"] == "retired");
  auto conflict = svc.handle(req("POST", "/api/review/" + id + "/confirm", {{"confirmed_on", "2021-01-01"}}));
  CHECK(conflict.status == 409);
  CHECK(body_of(conflict)["code"] == "RetiredRecord");

  CHECK(inventory::load_store(store.path) == svc.snapshot());
}

TEST_CASE("unknown ids and routes") {
  TempStore store;
  ApiService svc(store.path, testing::fixed_clock());
  auto r = svc.handle(req("POST", "/api/review/EUC-404404/confirm", {{"confirmed_on", "2019-03-10"}}));
  CHECK(r.status == 404);
  CHECK(body_of(r)["code"] == "UnknownId");
  CHECK(svc.handle(req("POST", "/api/risk/RSK-1/close", json::object())).status == 404);
  CHECK(svc.handle(req("GET", "/api/drafts/none")).status == 404);
  CHECK(body_of(svc.handle(req("GET", "/api/nothing")))["code"] == "NotFound");
  CHECK(svc.handle(req("DELETE", "/api/euca")).status == 405);
}

TEST_CASE("drafts") {
  TempStore store;
  ApiService svc(store.path, testing::fixed_clock());
  json draft = {{"step", "controls"}, {"input", {{"complexity", 2}}}};
  CHECK(svc.handle(req("PUT", "/api/drafts/sme-1", draft)).status == 200);
  auto back = svc.handle(req("GET", "/api/drafts/sme-1"));
  CHECK(body_of(back) == draft);
  ApiService reopened(store.path, testing::fixed_clock());
  CHECK(body_of(reopened.handle(req("GET", "/api/drafts/sme-1"))) == draft);
}

TEST_CASE("kpi sub-routes on the figure 6 store") {
  auto seed = testing::figure6_store();
  TempStore store(&seed);
  ApiService svc(store.path, testing::fixed_clock());
  auto kpi = body_of(svc.handle(req("GET", "/api/kpi", nullptr, {{"as_of", "2019-03-31"}})));
  CHECK(kpi == json(reporting::kpi_snapshot(seed, Date(2019, 3, 31))));
  auto conc = svc.handle(req("GET", "/api/kpi/concentration", nullptr, {{"top_k", "2"}}));
  CHECK(body_of(conc) == json(reporting::department_concentration(seed, 2)));
  CHECK(svc.handle(req("GET", "/api/kpi/concentration", nullptr, {{"top_k", "0"}})).status == 400);
  CHECK(svc.handle(req("GET", "/api/kpi/concentration", nullptr, {{"top_k", "x"}})).status == 400);
  auto overdue = body_of(svc.handle(req("GET", "/api/kpi/overdue", nullptr, {{"as_of", "2019-08-01"}})));
  CHECK(overdue == json(reporting::overdue_reviews(seed, Date(2019, 8, 1))));
  CHECK_FALSE(overdue.empty());
}

TEST_CASE("failed mutations leave the store byte-identical") {
  auto seed = testing::figure6_store();
  TempStore store(&seed);
  ApiService svc(store.path, testing::fixed_clock());
  auto id = seed.records.front().id;
  auto before = slurp(store.path);
  const Request failing[] = {
      req("POST", "/api/euca", {{"name", ""}, {"department", "X"}, {"manager", "Y"}}),
      req("POST", "/api/euca", {{"id", "EUC-999999"}, {"name", "n"}, {"department", "X"}, {"manager", "Y"}}),
      req("POST", "/api/risk", {{"euca_id", id}, {"description", "d"}, {"inherent_likelihood", 2},
                                {"inherent_severity", 2}, {"residual_likelihood", 3}, {"residual_severity", 3},
                                {"opened", "2019-01-01"}}),
      req("POST", "/api/risk", {{"euca_id", id}, {"inherent_likelihood", 9}}),
      req("POST", "/api/assess", {{"input", red_case()}, {"euca_id", "EUC-999999"}}),
      req("POST", "/api/review/EUC-999999/confirm", {{"confirmed_on", "2019-03-10"}}),
      req("POST", "/api/euca/" + id + "/lifecycle", {{"status", "zombie"}}),
      req("PUT", "/api/drafts/x", json::array({1, 2})),
      {"POST", "/api/euca", {}, "not json"},
  };
  for (const auto& r : failing) {
    CAPTURE(r.path);
    auto resp = svc.handle(r);
    CHECK(resp.status >= 400);
    CHECK(slurp(store.path) == before);
  }
  CHECK(svc.snapshot() == seed);
}

TEST_CASE("unreadable store is refused") {
  TempStore store;
  std::ofstream(store.path) << "[]";
  try {
    ApiService svc(store.path);
    FAIL("expected StoreUnreadable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StoreUnreadable);
  }
}

TEST_CASE("concurrent requests") {
  TempStore store;
  ApiService svc(store.path, testing::fixed_clock());
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 10; ++i) {
        svc.handle(req("POST", "/api/euca", {{"name", "app" + std::to_string(t) + "-" + std::to_string(i)},
                                             {"department", "D"}, {"manager", "M"}}));
        svc.handle(req("GET", "/api/kpi"));
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(svc.snapshot().records.size() == 40);
  CHECK(inventory::check_integrity(svc.snapshot()).empty());
  CHECK(inventory::load_store(store.path) == svc.snapshot());
}

TEST_CASE("HTTP transport") {
  TempStore store;
  ApiService svc(store.path, testing::fixed_clock());
  auto server = serve(svc, {"127.0.0.1", 0, std::nullopt});
  REQUIRE(server->port() > 0);

  httplib::Client client("127.0.0.1", server->port());
  auto res = client.Post("/api/assess", input_body(1, 1, 1, controls(true)).dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body)["band"] == "Blue");

  auto missing = client.Post("/api/review/EUC-000404/confirm", R"({"confirmed_on":"2019-03-10"})", "application/json");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  CHECK(json::parse(missing->body)["code"] == "UnknownId");

  auto kpi = client.Get("/api/kpi?as_of=2019-03-31");
  REQUIRE(kpi);
  CHECK(json::parse(kpi->body)["as_of"] == "2019-03-31");

  try {
    auto clash = serve(svc, {"127.0.0.1", server->port(), std::nullopt});
    FAIL("expected PortInUse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PortInUse);
  }
  server->stop();
}
