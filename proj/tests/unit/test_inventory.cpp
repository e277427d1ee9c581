#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "eucgov/csv.hpp"
#include "eucgov/error.hpp"
#include "eucgov/inventory/inventory.hpp"
#include "eucgov/serialization.hpp"
#include "stores.hpp"

using namespace eucgov;
using namespace eucgov::inventory;
using risk::ImpactCategory;
using risk::RatingBand;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

// Advances one millisecond per call.
Inventory::Clock ticking_clock() {
  auto t = std::make_shared<Timestamp>(parse_timestamp("2019-03-31T09:00:00.000Z"));
  return [t] { return *t += std::chrono::milliseconds(1); };
}

EucaRecord metadata(std::string name, std::string department = "Complaints", std::string manager = "J. Smith") {
  EucaRecord r;
  r.name = std::move(name);
  r.department = std::move(department);
  r.manager = std::move(manager);
  return r;
}

RiskRegisterEntry entry(int il, int is, int rl, int rs, Date opened = Date(2019, 1, 2)) {
  RiskRegisterEntry e;
  e.description = "Key person dependency";
  e.inherent_likelihood = il;
  e.inherent_severity = is;
  e.residual_likelihood = rl;
  e.residual_severity = rs;
  e.opened = opened;
  return e;
}

void assess_as(Inventory& inv, const std::string& id, RatingBand band, ImpactCategory impact, Date on) {
  auto in = testing::input_for(band, impact, on);
  inv.record_assessment(id, in, risk::assess(in));
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("eucgov-inv-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("upsert_euca") {
  Inventory inv({}, ticking_clock());
  auto created = inv.upsert_euca(metadata("Complaints DB"));
  CHECK_FALSE(created.id.empty());
  CHECK(created.lifecycle_status == Lifecycle::Live);
  CHECK(created.created_at == created.updated_at);

  auto change = created;
  change.manager = "A. Jones";
  auto updated = inv.upsert_euca(change);
  CHECK(updated.id == created.id);
  CHECK(updated.manager == "A. Jones");
  CHECK(updated.created_at == created.created_at);
  CHECK(updated.updated_at > created.updated_at);

  auto ghost = metadata("Ghost");
  ghost.id = "EUC-999999";
  CHECK(code_of([&] { inv.upsert_euca(ghost); }) == ErrorCode::UnknownId);

  for (auto blank : {"name", "department", "manager"}) {
    auto r = metadata("X");
    if (std::string(blank) == "name") r.name.clear();
    if (std::string(blank) == "department") r.department.clear();
    if (std::string(blank) == "manager") r.manager = "  ";
    try {
      inv.upsert_euca(r);
      FAIL("expected MissingField");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MissingField);
      CHECK(e.field() == blank);
    }
  }
  CHECK(inv.document().records.size() == 1);
}

TEST_CASE("upsert never takes store-owned fields from the caller") {
  Inventory inv({}, ticking_clock());
  auto r = inv.upsert_euca(metadata("Reserving model"));
  auto forged = r;
  forged.lifecycle_status = Lifecycle::Retired;
  forged.next_review = Date(2030, 1, 1);
  forged.risk_ids = {"RSK-000042"};
  auto after = inv.upsert_euca(forged);
  CHECK(after.lifecycle_status == Lifecycle::Live);
  CHECK_FALSE(after.next_review);
  CHECK(after.risk_ids.empty());
}

TEST_CASE("record_assessment") {
  Inventory inv({}, ticking_clock());
  auto id = inv.upsert_euca(metadata("Pricing")).id;
  auto red = testing::input_for(RatingBand::Red, ImpactCategory::Financial, Date(2019, 2, 1));
  auto rec = inv.record_assessment(id, red, risk::assess(red));
  CHECK(rec.band() == RatingBand::Red);
  CHECK(rec.next_review == Date(2020, 2, 1));
  CHECK(rec.assessment_history.size() == 1);

  auto forged = risk::assess(red);
  forged.band = RatingBand::Green;
  CHECK(code_of([&] { inv.record_assessment(id, red, forged); }) == ErrorCode::InconsistentResult);

  auto fixed = red;
  fixed.controls = risk::ControlAnswers::all_in_place();
  fixed.assessed_on = Date(2019, 3, 1);
  auto again = inv.record_assessment(id, fixed, risk::assess(fixed));
  CHECK(again.band() == RatingBand::Amber);
  CHECK(again.assessment_history.size() == 2);
  CHECK(again.latest_assessment == again.assessment_history.back());
  CHECK(again.next_review == Date(2020, 3, 1));

  CHECK(code_of([&] { inv.record_assessment("EUC-424242", red, risk::assess(red)); }) == ErrorCode::UnknownId);
}

TEST_CASE("confirm_review") {
  Inventory inv({}, ticking_clock());
  auto id = inv.upsert_euca(metadata("Claims tracker")).id;
  CHECK(inv.confirm_review(id, Date(2019, 3, 10)).next_review == Date(2020, 3, 10));
  CHECK(inv.confirm_review(id, Date(2020, 2, 29)).next_review == Date(2021, 2, 28));

  auto before = inv.document();
  auto same = inv.confirm_review(id, Date(2020, 2, 29));
  CHECK(same.next_review == Date(2021, 2, 28));
  CHECK(inv.document() == before);

  inv.set_lifecycle(id, Lifecycle::Retired, "replaced by core system");
  CHECK(code_of([&] { inv.confirm_review(id, Date(2020, 3, 1)); }) == ErrorCode::RetiredRecord);
  CHECK(code_of([&] { inv.confirm_review("EUC-777777", Date(2020, 3, 1)); }) == ErrorCode::UnknownId);
}

TEST_CASE("set_lifecycle") {
  Inventory inv({}, ticking_clock());
  auto id = inv.upsert_euca(metadata("HR tracker", "HR")).id;
  auto retired = inv.set_lifecycle(id, Lifecycle::Retired, "no longer used");
  CHECK(retired.lifecycle_status == Lifecycle::Retired);
  auto doc = inv.document();
  auto twice = inv.set_lifecycle(id, Lifecycle::Retired, "again");
  CHECK(twice == retired);
  CHECK(inv.document() == doc);

  CHECK(code_of([&] { inv.set_lifecycle(id, Lifecycle::Live, ""); }) == ErrorCode::MissingField);
  auto revived = inv.set_lifecycle(id, Lifecycle::Live, "back in use for year end");
  CHECK(revived.lifecycle_status == Lifecycle::Live);
  REQUIRE(revived.lifecycle_events.size() == 2);
  CHECK(revived.lifecycle_events.back().reason == "back in use for year end");
  CHECK(code_of([&] { inv.set_lifecycle("EUC-123456", Lifecycle::Retired, "x"); }) == ErrorCode::UnknownId);
}

TEST_CASE("link_risk and close_risk") {
  Inventory inv({}, ticking_clock());
  auto id = inv.upsert_euca(metadata("Commission calc")).id;
  assess_as(inv, id, RatingBand::Amber, ImpactCategory::Financial, Date(2019, 1, 1));

  auto e = inv.link_risk(id, entry(4, 4, 2, 3));
  CHECK(e.status == RiskStatus::Open);
  CHECK(e.inherent_score() == 16);
  CHECK(e.residual_score() == 6);
  CHECK(e.euca_id == id);
  CHECK(inv.get(id).risk_ids == std::vector<std::string>{e.risk_id});

  CHECK(code_of([&] { inv.link_risk(id, entry(4, 4, 5, 5)); }) == ErrorCode::ResidualExceedsInherent);
  CHECK(code_of([&] { inv.link_risk(id, entry(7, 1, 1, 1)); }) == ErrorCode::ScaleViolation);
  CHECK(code_of([&] { inv.link_risk(id, entry(1, 1, 0, 1)); }) == ErrorCode::ScaleViolation);
  CHECK(code_of([&] { inv.link_risk("EUC-000099", entry(2, 2, 1, 1)); }) == ErrorCode::UnknownId);

  CHECK(code_of([&] { inv.close_risk(e.risk_id, Date(2018, 12, 31)); }) == ErrorCode::DateOrder);
  auto closed = inv.close_risk(e.risk_id, Date(2019, 2, 1));
  CHECK(closed.status == RiskStatus::Closed);
  CHECK(closed.closed == Date(2019, 2, 1));
  CHECK(code_of([&] { inv.close_risk(e.risk_id, Date(2019, 3, 1)); }) == ErrorCode::AlreadyClosed);
  CHECK(code_of([&] { inv.close_risk("RSK-000404", Date(2019, 3, 1)); }) == ErrorCode::UnknownRisk);
  CHECK(check_integrity(inv.document()).empty());
}

TEST_CASE("failed operations leave the document untouched") {
  Inventory inv(testing::figure6_store(), ticking_clock());
  auto before = inv.document();
  auto id = before.records.front().id;
  CHECK_THROWS(inv.link_risk(id, entry(2, 2, 3, 3)));
  CHECK_THROWS(inv.upsert_euca(metadata("")));
  CHECK_THROWS(inv.import_csv("id,name\r\n"));
  CHECK(inv.document() == before);
}

TEST_CASE("list_eucas examples") {
  Inventory fig6(testing::figure6_store());
  EucaFilter red;
  red.band = RatingBand::Red;
  CHECK(fig6.list_eucas(red).size() == 8);

  Inventory fresh;
  EucaFilter retired;
  retired.lifecycle = Lifecycle::Retired;
  CHECK(fresh.list_eucas(retired).empty());

  EucaFilter due;
  due.due_before = Date(2019, 9, 1);
  auto listed = fig6.list_eucas(due);
  std::size_t expected = 0;
  for (const auto& r : fig6.document().records) expected += r.next_review && *r.next_review < Date(2019, 9, 1);
  CHECK(listed.size() == expected);
  CHECK(expected > 0);
  CHECK(expected < 158);
  for (const auto& r : listed) CHECK(*r.next_review < Date(2019, 9, 1));
}

TEST_CASE("list_eucas is ordered by department then name") {
  Inventory inv({}, ticking_clock());
  inv.upsert_euca(metadata("b", "Finance"));
  inv.upsert_euca(metadata("a", "HR"));
  inv.upsert_euca(metadata("a", "Finance"));
  auto all = inv.list_eucas();
  REQUIRE(all.size() == 3);
  CHECK((all[0].department == "Finance" && all[0].name == "a"));
  CHECK((all[1].department == "Finance" && all[1].name == "b"));
  CHECK(all[2].department == "HR");
}

TEST_CASE("list_eucas equals a brute-force scan") {
  Inventory inv(testing::figure6_store(), ticking_clock());
  std::mt19937 rng(99);
  auto records = inv.document().records;
  for (int i = 0; i < 20; ++i) inv.set_lifecycle(records[rng() % records.size()].id, Lifecycle::Retired, "x");
  inv.upsert_euca(metadata("unassessed", "Finance"));
  const char* departments[] = {"Finance", "Claims", "HR", "Actuarial", "IT", "Marketing", "Nowhere"};
  for (int trial = 0; trial < 300; ++trial) {
    EucaFilter f;
    if (rng() % 2) f.department = departments[rng() % 7];
    if (rng() % 2) f.band = static_cast<RatingBand>(rng() % 4);
    if (rng() % 3 == 0) f.lifecycle = rng() % 2 ? Lifecycle::Live : Lifecycle::Retired;
    if (rng() % 2) f.due_before = Date(2019, 7, 1).plus_days(static_cast<int>(rng() % 150));

    std::vector<std::string> expected;
    for (const auto& r : inv.document().records) {
      if (f.department && r.department != *f.department) continue;
      if (f.band && r.band() != f.band) continue;
      if (f.lifecycle && r.lifecycle_status != *f.lifecycle) continue;
      if (f.due_before && !(r.next_review && *r.next_review < *f.due_before)) continue;
      expected.push_back(r.id);
    }
    std::vector<std::string> got;
    for (const auto& r : inv.list_eucas(f)) got.push_back(r.id);
    std::sort(expected.begin(), expected.end());
    std::sort(got.begin(), got.end());
    CHECK(got == expected);
  }
}

TEST_CASE("drafts") {
  Inventory inv;
  inv.put_draft("k", json{{"step", "general_details"}});
  CHECK(inv.get_draft("k")["step"] == "general_details");
  CHECK(code_of([&] { inv.get_draft("missing"); }) == ErrorCode::UnknownDraft);
  CHECK(code_of([&] { inv.put_draft("k", json::array()); }) == ErrorCode::InvalidInput);
}

TEST_CASE("CSV export shape") {
  Inventory inv(testing::figure6_store());
  auto text = inv.export_csv();
  auto rows = csv::parse(text);
  REQUIRE(rows.size() == 159);
  CHECK(rows[0].fields == csv_columns());
  CHECK(csv_columns() == std::vector<std::string>{"id", "name", "department", "team", "manager", "sme", "data_owner",
                                                  "app_type", "file_location", "lifecycle_status", "complexity",
                                                  "materiality", "impact", "band", "risk_score", "dlc_required",
                                                  "next_review", "risk_ids", "disposition"});
  CHECK(text.find("\r\n") != std::string::npos);
}

TEST_CASE("CSV round trip onto an empty store") {
  Inventory source(testing::figure6_store(), ticking_clock());
  auto id = source.document().records[3].id;
  source.link_risk(id, entry(3, 3, 2, 2));
  source.link_risk(id, entry(5, 5, 1, 1));
  auto exported = source.export_csv();

  // Import into the same store: no-op, equal field for field.
  auto before = source.document();
  CHECK(source.import_csv(exported) == 158);
  CHECK(source.document() == before);

  // Import into a fresh store: every CSV column reproduced.
  Inventory target({}, ticking_clock());
  auto bare = exported;
  // Read-only columns must be empty for new records.
  auto rows = csv::parse(exported);
  std::string stripped = csv::format_row(rows[0].fields);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    auto f = rows[i].fields;
    for (std::size_t c = 10; c <= 17; ++c) f[c].clear();
    stripped += csv::format_row(f);
  }
  CHECK(target.import_csv(stripped) == 158);
  CHECK(target.export_csv() == stripped);
}

TEST_CASE("CSV import updates metadata and lifecycle") {
  Inventory inv({}, ticking_clock());
  auto id = inv.upsert_euca(metadata("Broker fees", "Sales")).id;
  auto rows = csv::parse(inv.export_csv());
  auto row = rows[1].fields;
  row[4] = "New Manager";
  row[9] = "retired";
  row[18] = "accept";
  inv.import_csv(csv::format_row(csv_columns()) + csv::format_row(row));
  const auto& r = inv.get(id);
  CHECK(r.manager == "New Manager");
  CHECK(r.lifecycle_status == Lifecycle::Retired);
  CHECK(r.disposition == Disposition::Accept);
  CHECK(r.lifecycle_events.back().reason == "csv import");
}

TEST_CASE("CSV import errors") {
  Inventory inv(testing::figure6_store(), ticking_clock());
  auto before = inv.document();
  auto rows = csv::parse(inv.export_csv());

  CHECK(code_of([&] { inv.import_csv("id,name\r\n"); }) == ErrorCode::SchemaMismatch);

  auto bad_band = rows[5].fields;
  bad_band[13] = "Purple";
  std::string text = csv::format_row(csv_columns()) + csv::format_row(rows[1].fields) + csv::format_row(bad_band);
  try {
    inv.import_csv(text);
    FAIL("expected MalformedRow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedRow);
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }

  auto short_row = rows[2].fields;
  short_row.pop_back();
  CHECK(code_of([&] { inv.import_csv(csv::format_row(csv_columns()) + csv::format_row(short_row)); }) ==
        ErrorCode::MalformedRow);

  auto changed_score = rows[2].fields;
  changed_score[14] = changed_score[14] == "1" ? "2" : "1";
  CHECK(code_of([&] { inv.import_csv(csv::format_row(csv_columns()) + csv::format_row(changed_score)); }) ==
        ErrorCode::MalformedRow);

  // A good row followed by a bad one: nothing applied.
  auto good = rows[1].fields;
  good[3] = "Renamed team";
  CHECK(code_of([&] {
          inv.import_csv(csv::format_row(csv_columns()) + csv::format_row(good) + csv::format_row(bad_band));
        }) == ErrorCode::MalformedRow);
  CHECK(inv.document() == before);
}

TEST_CASE("store file round trip") {
  TempDir dir;
  auto path = dir.path / "store.json";
  CHECK(load_store(path) == StoreDocument{});

  auto doc = testing::figure6_store();
  save_store(path, doc);
  CHECK(load_store(path) == doc);
  auto text = slurp(path);
  CHECK(text.back() == '\n');
  save_store(path, load_store(path));
  CHECK(slurp(path) == text);

  std::size_t leftovers = 0;
  for (const auto& e : fs::directory_iterator(dir.path)) leftovers += e.path().filename() != "store.json";
  CHECK(leftovers == 0);
}

TEST_CASE("unreadable stores") {
  TempDir dir;
  auto path = dir.path / "store.json";
  std::ofstream(path) << "{ not json";
  CHECK(code_of([&] { load_store(path); }) == ErrorCode::StoreUnreadable);

  std::ofstream(path, std::ios::trunc) << R"({"schema_version": 2, "records": [], "register": []})";
  CHECK(code_of([&] { load_store(path); }) == ErrorCode::StoreUnreadable);

  // Dangling risk link.
  auto doc = testing::figure6_store();
  doc.records[0].risk_ids.push_back("RSK-000001");
  std::ofstream(path, std::ios::trunc) << json(doc).dump();
  CHECK(code_of([&] { load_store(path); }) == ErrorCode::StoreUnreadable);

  // Hand-edited band.
  doc = testing::figure6_store();
  auto forged = doc.records[0].band() == RatingBand::Red ? RatingBand::Blue : RatingBand::Red;
  doc.records[0].latest_assessment->result.band = forged;
  doc.records[0].assessment_history.back().result.band = forged;
  CHECK_FALSE(check_integrity(doc).empty());
}

TEST_CASE("referential integrity survives random operation sequences") {
  std::mt19937 rng(2019);
  std::size_t violations = 0, applied = 0, rejected = 0;
  for (int seq = 0; seq < 1000; ++seq) {
    Inventory inv({}, ticking_clock());
    std::vector<std::string> ids, risks;
    for (int step = 0; step < 12; ++step) {
      auto pick = [&](const std::vector<std::string>& v, const char* fallback) {
        return v.empty() || rng() % 10 == 0 ? std::string(fallback) : v[rng() % v.size()];
      };
      try {
        switch (rng() % 7) {
          case 0:
          case 1:
            ids.push_back(inv.upsert_euca(metadata("app" + std::to_string(step), rng() % 2 ? "A" : "B")).id);
            break;
          case 2: {
            auto in = testing::input_for(static_cast<RatingBand>(rng() % 4), ImpactCategory::Financial,
                                         Date(2019, 1, 1).plus_days(static_cast<int>(rng() % 365)));
            inv.record_assessment(pick(ids, "EUC-999999"), in, risk::assess(in));
            break;
          }
          case 3:
            inv.confirm_review(pick(ids, "EUC-999999"), Date(2019, 1, 1).plus_days(static_cast<int>(rng() % 800)));
            break;
          case 4:
            inv.set_lifecycle(pick(ids, "EUC-999999"), rng() % 2 ? Lifecycle::Live : Lifecycle::Retired,
                              rng() % 3 ? "reason" : "");
            break;
          case 5: {
            int il = 1 + static_cast<int>(rng() % 6), is = 1 + static_cast<int>(rng() % 5);
            int rl = 1 + static_cast<int>(rng() % 5), rs = 1 + static_cast<int>(rng() % 5);
            risks.push_back(inv.link_risk(pick(ids, "EUC-999999"), entry(il, is, rl, rs)).risk_id);
            break;
          }
          case 6:
            inv.close_risk(pick(risks, "RSK-999999"), Date(2019, 1, 1).plus_days(static_cast<int>(rng() % 30) - 3));
            break;
        }
        ++applied;
      } catch (const Error&) {
        ++rejected;
      }
      if (!check_integrity(inv.document()).empty()) ++violations;
      for (const auto& e : inv.document().risk_register) {
        if (e.residual_score() > e.inherent_score()) ++violations;
      }
    }
    // Serialization must also survive every reachable state.
    auto back = json(inv.document()).get<StoreDocument>();
    if (!(back == inv.document())) ++violations;
  }
  CHECK(violations == 0);
  CHECK(applied > 5000);
  CHECK(rejected > 500);
}
