#include <doctest.h>

#include <functional>
#include <numeric>
#include <random>

#include "eucgov/csv.hpp"
#include "eucgov/error.hpp"
#include "eucgov/inventory/inventory.hpp"
#include "eucgov/reporting/kpi.hpp"
#include "eucgov/reporting/render.hpp"
#include "eucgov/serialization.hpp"
#include "stores.hpp"

using namespace eucgov;
using namespace eucgov::reporting;
using inventory::EucaRecord;
using inventory::Inventory;
using inventory::Lifecycle;
using risk::ImpactCategory;
using risk::RatingBand;

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

std::string add(Inventory& inv, std::string name, std::string department = "Finance") {
  EucaRecord r;
  r.name = std::move(name);
  r.department = std::move(department);
  r.manager = "M";
  return inv.upsert_euca(r).id;
}

void assess_as(Inventory& inv, const std::string& id, RatingBand band, ImpactCategory impact, Date on) {
  auto in = testing::input_for(band, impact, on);
  inv.record_assessment(id, in, risk::assess(in));
}

std::uint64_t matrix_total(const BandImpactMatrix& m) {
  std::uint64_t t = 0;
  for (const auto& row : m) t = std::accumulate(row.begin(), row.end(), t);
  return t;
}

inventory::StoreDocument random_store(std::mt19937& rng) {
  Inventory inv({}, testing::fixed_clock());
  const char* departments[] = {"A", "B", "C", "D"};
  int n = static_cast<int>(rng() % 40);
  for (int i = 0; i < n; ++i) {
    auto id = add(inv, "app" + std::to_string(i), departments[rng() % 4]);
    if (rng() % 4 != 0) {
      // Random grades and controls, so every reachable band/impact pair shows up.
      risk::AssessmentInput in;
      in.complexity = risk::complexity_from_int(1 + static_cast<int>(rng() % 3));
      in.materiality = risk::materiality_from_int(1 + static_cast<int>(rng() % 3));
      in.impact = risk::impact_from_int(1 + static_cast<int>(rng() % 6));
      for (const auto& f : risk::control_fields()) in.controls.*f.member = rng() % 2;
      in.assessed_on = Date(2018, 1, 1).plus_days(static_cast<int>(rng() % 700));
      inv.record_assessment(id, in, risk::assess(in));
    }
    if (rng() % 6 == 0) inv.set_lifecycle(id, Lifecycle::Retired, "gone");
  }
  return std::move(inv).release();
}

}  // namespace

TEST_CASE("figure 6 snapshot") {
  auto doc = testing::figure6_store();
  auto s = kpi_snapshot(doc, Date(2019, 3, 31));
  CHECK(s.band_counts[rank(RatingBand::Red)] == 8);
  CHECK(s.band_counts[rank(RatingBand::Amber)] == 14);
  CHECK(s.band_counts[rank(RatingBand::Green)] == 116);
  CHECK(s.band_counts[rank(RatingBand::Blue)] == 20);
  CHECK(s.total_assessed == 158);
  CHECK(matrix_total(s.band_impact_matrix) == 158);
  for (int b = 0; b < 4; ++b) {
    for (int i = 0; i < 6; ++i) CHECK(s.band_impact_matrix[b][i] == static_cast<std::uint64_t>(testing::figure6_matrix()[b][i]));
  }
  CHECK(s.unregistered_amber_red_count == 22);
  CHECK(s.overdue_count == 0);
}

TEST_CASE("empty store snapshot is all zeros") {
  auto s = kpi_snapshot({}, Date(2019, 3, 31));
  CHECK(s.total_assessed == 0);
  CHECK(matrix_total(s.band_impact_matrix) == 0);
  CHECK(s.department_histogram.empty());
  CHECK(s.band_counts == std::array<std::uint64_t, 4>{});
}

TEST_CASE("remediating a Red record moves it between snapshots") {
  Inventory inv(testing::figure6_store(), testing::fixed_clock());
  auto before = kpi_snapshot(inv.document(), Date(2019, 3, 31));
  inventory::EucaFilter red;
  red.band = RatingBand::Red;
  auto target = inv.list_eucas(red).front();
  auto in = target.latest_assessment->input;
  in.complexity = risk::ComplexityGrade::Medium;
  in.materiality = risk::MaterialityGrade::Medium;
  in.controls = risk::ControlAnswers::all_in_place();
  in.assessed_on = Date(2019, 4, 1);
  inv.record_assessment(target.id, in, risk::assess(in));
  auto after = kpi_snapshot(inv.document(), Date(2019, 4, 30));
  CHECK(after.band_counts[rank(RatingBand::Red)] == before.band_counts[rank(RatingBand::Red)] - 1);
  CHECK(after.band_counts[rank(RatingBand::Green)] == before.band_counts[rank(RatingBand::Green)] + 1);
  CHECK(after.total_assessed == before.total_assessed);
}

TEST_CASE("band_impact_matrix single record") {
  Inventory inv({}, testing::fixed_clock());
  assess_as(inv, add(inv, "x"), RatingBand::Red, ImpactCategory::Financial, Date(2019, 1, 1));
  auto m = band_impact_matrix(inv.document());
  CHECK(matrix_total(m) == 1);
  CHECK(m[rank(RatingBand::Red)][4] == 1);
}

TEST_CASE("conservation on random stores") {
  std::mt19937 rng(1234);
  std::size_t violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto doc = random_store(rng);
    for (bool include_retired : {false, true}) {
      Scope scope{include_retired};
      auto s = kpi_snapshot(doc, Date(2019, 6, 1), scope);
      std::uint64_t assessed = 0, in_scope = 0;
      for (const auto& r : doc.records) {
        if (!scope.contains(r)) continue;
        ++in_scope;
        assessed += r.latest_assessment.has_value();
      }
      auto bands = std::accumulate(s.band_counts.begin(), s.band_counts.end(), std::uint64_t{0});
      if (bands != s.total_assessed || s.total_assessed != assessed) ++violations;
      if (matrix_total(s.band_impact_matrix) != s.total_assessed) ++violations;
      for (int b = 0; b < 4; ++b) {
        auto& row = s.band_impact_matrix[b];
        if (std::accumulate(row.begin(), row.end(), std::uint64_t{0}) != s.band_counts[b]) ++violations;
      }
      std::uint64_t hist = 0;
      for (const auto& [d, c] : s.department_histogram) hist += c;
      if (hist != in_scope) ++violations;
      if (band_impact_matrix(doc, scope) != s.band_impact_matrix) ++violations;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("department concentration") {
  auto fig7 = testing::figure7_store();
  auto c = department_concentration(fig7, 7);
  CHECK(c.total == 100);
  CHECK(c.top_k_total == 85);
  CHECK(c.top_k_share == 0.85);
  REQUIRE(c.departments.size() == 15);
  CHECK(c.departments[0] == DepartmentCount{"Customer Services", 25});
  // Ties broken by name.
  CHECK(c.departments[7].department == "HR");
  CHECK(c.departments[8].department == "IT");

  Inventory one({}, testing::fixed_clock());
  add(one, "a", "Claims");
  add(one, "b", "Claims");
  CHECK(department_concentration(one.document(), 1).top_k_share == 1.0);

  auto clamped = department_concentration(fig7, 50);
  CHECK(clamped.top_k == 15);
  CHECK(clamped.top_k_share == 1.0);

  CHECK(code_of([&] { department_concentration(fig7, 0); }) == ErrorCode::OutOfRange);
  CHECK(code_of([] { department_concentration({}, 3); }) == ErrorCode::EmptyStore);
}

TEST_CASE("concentration share is non-decreasing in k") {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    auto doc = random_store(rng);
    bool any = false;
    for (const auto& r : doc.records) any |= r.lifecycle_status == Lifecycle::Live;
    if (!any) continue;
    double prev = 0.0;
    for (std::size_t k = 1; k <= 6; ++k) {
      auto share = department_concentration(doc, k).top_k_share;
      CHECK(share >= prev);
      prev = share;
    }
    CHECK(prev == 1.0);
  }
}

TEST_CASE("overdue reviews") {
  Inventory inv({}, testing::fixed_clock());
  auto late = add(inv, "late");
  inv.confirm_review(late, Date(2018, 3, 1));  // due 2019-03-01
  auto today = add(inv, "today");
  inv.confirm_review(today, Date(2018, 4, 1));  // due 2019-04-01
  auto retired = add(inv, "retired");
  inv.confirm_review(retired, Date(2018, 1, 1));
  inv.set_lifecycle(retired, Lifecycle::Retired, "gone");
  auto later = add(inv, "later");
  inv.confirm_review(later, Date(2018, 2, 1));

  auto items = overdue_reviews(inv.document(), Date(2019, 4, 1));
  REQUIRE(items.size() == 2);
  CHECK(items[0].record.id == later);
  CHECK(items[0].days_overdue == 59);
  CHECK(items[1].record.id == late);
  CHECK(items[1].days_overdue == 31);
}

TEST_CASE("overdue equals a brute-force scan") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    auto doc = random_store(rng);
    Date as_of = Date(2018, 6, 1).plus_days(static_cast<int>(rng() % 900));
    std::vector<std::string> expected;
    for (const auto& r : doc.records) {
      if (r.lifecycle_status == Lifecycle::Live && r.next_review && *r.next_review < as_of) expected.push_back(r.id);
    }
    auto items = overdue_reviews(doc, as_of);
    std::vector<std::string> got;
    for (std::size_t i = 0; i < items.size(); ++i) {
      got.push_back(items[i].record.id);
      CHECK(items[i].days_overdue == items[i].record.next_review->days_until(as_of));
      if (i > 0) CHECK(items[i - 1].days_overdue >= items[i].days_overdue);
    }
    std::sort(expected.begin(), expected.end());
    std::sort(got.begin(), got.end());
    CHECK(got == expected);
    CHECK(kpi_snapshot(doc, as_of).overdue_count == expected.size());
  }
}

TEST_CASE("unregistered amber and red") {
  Inventory inv({}, testing::fixed_clock());
  auto red = add(inv, "red");
  assess_as(inv, red, RatingBand::Red, ImpactCategory::Financial, Date(2019, 1, 1));
  auto covered = add(inv, "covered");
  assess_as(inv, covered, RatingBand::Red, ImpactCategory::Financial, Date(2019, 1, 1));
  auto green = add(inv, "green");
  assess_as(inv, green, RatingBand::Green, ImpactCategory::Financial, Date(2019, 1, 1));
  auto closed = add(inv, "closed");
  assess_as(inv, closed, RatingBand::Amber, ImpactCategory::Financial, Date(2019, 1, 1));

  inventory::RiskRegisterEntry e;
  e.description = "d";
  e.inherent_likelihood = e.inherent_severity = 3;
  e.residual_likelihood = e.residual_severity = 2;
  e.opened = Date(2019, 1, 1);
  inv.link_risk(covered, e);
  auto gone = inv.link_risk(closed, e);
  inv.close_risk(gone.risk_id, Date(2019, 2, 1));

  auto list = unregistered_amber_red(inv.document());
  std::vector<std::string> ids;
  for (const auto& r : list) ids.push_back(r.id);
  std::sort(ids.begin(), ids.end());
  auto expected = std::vector<std::string>{red, closed};
  std::sort(expected.begin(), expected.end());
  CHECK(ids == expected);
}

TEST_CASE("render formats") {
  CHECK(format_from_string("json") == Format::Json);
  CHECK(format_from_string("md") == Format::Markdown);
  CHECK(format_from_string("markdown") == Format::Markdown);
  CHECK(format_from_string("csv") == Format::Csv);
  CHECK(code_of([] { format_from_string("xml"); }) == ErrorCode::UnsupportedFormat);
}

TEST_CASE("figure 6 snapshot renders") {
  auto s = kpi_snapshot(testing::figure6_store(), Date(2019, 3, 31));
  auto md = render(s, Format::Markdown);
  CHECK(md.find("| Red | 8 |") != std::string::npos);
  CHECK(md.find("| Blue | 20 |") != std::string::npos);
  CHECK(md == render(s, Format::Markdown));

  auto j = parse_json(render(s, Format::Json));
  CHECK(j["band_counts"]["Red"] == 8);
  CHECK(j["band_counts"]["Green"] == 116);
  CHECK(j["total_assessed"] == 158);
  CHECK(j["as_of"] == "2019-03-31");
  CHECK(j == json(s));

  auto rows = csv::parse(render(s, Format::Csv));
  CHECK(rows[0].fields == csv::Row{"metric", "key", "impact", "count"});
  bool red_row = false;
  for (const auto& r : rows) red_row |= r.fields == csv::Row{"band", "Red", "", "8"};
  CHECK(red_row);
}

TEST_CASE("empty snapshot CSV is header only") {
  auto s = kpi_snapshot({}, Date(2019, 3, 31));
  CHECK(render(s, Format::Csv) == "metric,key,impact,count\r\n");
}

TEST_CASE("rendering is pure for every payload") {
  auto doc = testing::figure6_store();
  auto overdue = overdue_reviews(doc, Date(2019, 12, 1));
  auto conc = department_concentration(doc, 3);
  for (auto f : {Format::Json, Format::Markdown, Format::Csv}) {
    CHECK(render(overdue, f) == render(overdue, f));
    CHECK(render(conc, f) == render(conc, f));
    CHECK(render(doc.records, f) == render(doc.records, f));
    CHECK(render(doc.records.front(), f) == render(doc.records.front(), f));
    CHECK_FALSE(render(conc, f).empty());
    CHECK(render(conc, f).back() == '\n');
  }
}

TEST_CASE("record list CSV uses the inventory columns") {
  auto doc = testing::figure6_store();
  auto rows = csv::parse(render(doc.records, Format::Csv));
  REQUIRE(rows.size() == 159);
  CHECK(rows[0].fields == inventory::csv_columns());
  CHECK(rows[1].fields == inventory::csv_row(doc.records[0]));
}

TEST_CASE("diff renders severity outside JSON") {
  scanner::BaselineDiff d;
  d.entries.push_back({"Sheet1", "B5", scanner::ChangeKind::FormulaReplacedByConstant, "=SUM(B1:B4)", "42"});
  auto j = parse_json(render(d, Format::Json));
  CHECK(j["entries"][0]["kind"] == "FORMULA_REPLACED_BY_CONSTANT");
  auto rows = csv::parse(render(d, Format::Csv));
  REQUIRE(rows.size() == 2);
  CHECK(std::find(rows[1].fields.begin(), rows[1].fields.end(), "high") != rows[1].fields.end());
  CHECK(render(d, Format::Markdown).find("FORMULA_REPLACED_BY_CONSTANT") != std::string::npos);
}
