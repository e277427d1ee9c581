#include "eucgov/reporting/kpi.hpp"

#include <algorithm>

#include "eucgov/error.hpp"

namespace eucgov::reporting {

using inventory::EucaRecord;
using inventory::Lifecycle;
using inventory::StoreDocument;
using risk::RatingBand;

namespace {

bool ordered(const EucaRecord& a, const EucaRecord& b) {
  return std::tie(a.department, a.name, a.id) < std::tie(b.department, b.name, b.id);
}

bool has_open_entry(const StoreDocument& doc, const EucaRecord& r) {
  return std::any_of(doc.risk_register.begin(), doc.risk_register.end(), [&](const auto& e) {
    return e.euca_id == r.id && e.status == inventory::RiskStatus::Open;
  });
}

}  // namespace

BandImpactMatrix band_impact_matrix(const StoreDocument& doc, Scope scope) {
  BandImpactMatrix m{};
  for (const auto& r : doc.records) {
    if (!scope.contains(r) || !r.latest_assessment) continue;
    auto band = rank(r.latest_assessment->result.band);
    auto impact = risk::value(r.latest_assessment->input.impact) - 1;
    ++m[band][impact];
  }
  return m;
}

KpiSnapshot kpi_snapshot(const StoreDocument& doc, Date as_of, Scope scope) {
  KpiSnapshot s;
  s.as_of = as_of;
  s.band_impact_matrix = band_impact_matrix(doc, scope);
  for (std::size_t b = 0; b < 4; ++b) {
    for (auto n : s.band_impact_matrix[b]) s.band_counts[b] += n;
    s.total_assessed += s.band_counts[b];
  }
  for (const auto& r : doc.records) {
    if (scope.contains(r)) ++s.department_histogram[r.department];
  }
  s.overdue_count = overdue_reviews(doc, as_of).size();
  s.unregistered_amber_red_count = unregistered_amber_red(doc).size();
  return s;
}

Concentration department_concentration(const StoreDocument& doc, std::size_t top_k, Scope scope) {
  if (top_k < 1) throw Error(ErrorCode::OutOfRange, "top_k must be at least 1", "top_k");
  std::map<std::string, std::uint64_t> histogram;
  for (const auto& r : doc.records) {
    if (scope.contains(r)) ++histogram[r.department];
  }
  if (histogram.empty()) throw Error(ErrorCode::EmptyStore, "no records to rank");

  Concentration c;
  for (const auto& [dept, n] : histogram) {
    c.departments.push_back({dept, n});
    c.total += n;
  }
  std::stable_sort(c.departments.begin(), c.departments.end(),
                   [](const DepartmentCount& a, const DepartmentCount& b) { return a.count > b.count; });
  c.top_k = std::min(top_k, c.departments.size());
  for (std::size_t i = 0; i < c.top_k; ++i) c.top_k_total += c.departments[i].count;
  c.top_k_share = static_cast<double>(c.top_k_total) / static_cast<double>(c.total);
  return c;
}

std::vector<OverdueItem> overdue_reviews(const StoreDocument& doc, Date as_of) {
  std::vector<OverdueItem> out;
  for (const auto& r : doc.records) {
    if (r.lifecycle_status != Lifecycle::Live || !r.next_review || !(*r.next_review < as_of)) continue;
    out.push_back({r, r.next_review->days_until(as_of)});
  }
  std::sort(out.begin(), out.end(), [](const OverdueItem& a, const OverdueItem& b) {
    if (a.days_overdue != b.days_overdue) return a.days_overdue > b.days_overdue;
    return a.record.id < b.record.id;
  });
  return out;
}

std::vector<EucaRecord> unregistered_amber_red(const StoreDocument& doc) {
  std::vector<EucaRecord> out;
  for (const auto& r : doc.records) {
    auto band = r.band();
    if (r.lifecycle_status != Lifecycle::Live || !band) continue;
    if (*band != RatingBand::Amber && *band != RatingBand::Red) continue;
    if (!has_open_entry(doc, r)) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), ordered);
  return out;
}

}  // namespace eucgov::reporting
