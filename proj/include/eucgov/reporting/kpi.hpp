#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "eucgov/inventory/record.hpp"

namespace eucgov::reporting {

/// Rows Blue..Red by band rank, columns impact 1..6.
using BandImpactMatrix = std::array<std::array<std::uint64_t, 6>, 4>;

/// Retired records are left out of every aggregate unless asked for.
struct Scope {
  bool include_retired = false;
  bool contains(const inventory::EucaRecord& r) const {
    return include_retired || r.lifecycle_status == inventory::Lifecycle::Live;
  }
};

struct KpiSnapshot {
  Date as_of;
  std::array<std::uint64_t, 4> band_counts{};  // by band rank
  BandImpactMatrix band_impact_matrix{};
  std::map<std::string, std::uint64_t> department_histogram;  // every in-scope record
  std::uint64_t total_assessed = 0;
  std::uint64_t overdue_count = 0;
  std::uint64_t unregistered_amber_red_count = 0;

  bool operator==(const KpiSnapshot&) const = default;
};

KpiSnapshot kpi_snapshot(const inventory::StoreDocument& doc, Date as_of, Scope scope = {});

BandImpactMatrix band_impact_matrix(const inventory::StoreDocument& doc, Scope scope = {});

struct DepartmentCount {
  std::string department;
  std::uint64_t count = 0;
  bool operator==(const DepartmentCount&) const = default;
};

struct Concentration {
  std::vector<DepartmentCount> departments;  // count descending, then name
  std::size_t top_k = 0;                     // after clamping to the department count
  std::uint64_t top_k_total = 0;
  std::uint64_t total = 0;
  double top_k_share = 0.0;
  bool operator==(const Concentration&) const = default;
};

/// Throws Error{OutOfRange} for top_k < 1 and Error{EmptyStore} when no
/// record is in scope.
Concentration department_concentration(const inventory::StoreDocument& doc, std::size_t top_k,
                                       Scope scope = {});

struct OverdueItem {
  inventory::EucaRecord record;
  long days_overdue = 0;
  bool operator==(const OverdueItem&) const = default;
};

/// Live records with next_review < as_of, most overdue first (then id).
std::vector<OverdueItem> overdue_reviews(const inventory::StoreDocument& doc, Date as_of);

/// Live Amber/Red records without an open register entry, in inventory order.
std::vector<inventory::EucaRecord> unregistered_amber_red(const inventory::StoreDocument& doc);

}  // namespace eucgov::reporting
