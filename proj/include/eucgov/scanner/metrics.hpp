#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eucgov/risk/model.hpp"
#include "eucgov/scanner/workbook.hpp"

namespace eucgov::scanner {

/// Complexity indicators for one workbook.
///
/// `available == false` marks an encrypted package: only `password_protected`
/// is meaningful then and the counts serialize as null.
struct WorkbookMetrics {
  bool available = true;
  std::uint64_t sheet_count = 0;
  std::uint64_t formulas_with_errors = 0;
  std::uint64_t array_formulas = 0;
  std::uint64_t nested_if_count = 0;
  std::uint64_t max_nested_if_level = 0;
  std::uint64_t external_links = 0;
  std::uint64_t pivot_tables = 0;
  std::uint64_t named_items = 0;
  std::uint64_t hidden_rows = 0;
  std::uint64_t hidden_columns = 0;
  std::uint64_t hidden_sheets = 0;
  std::uint64_t very_hidden_sheets = 0;
  bool password_protected = false;
  std::uint64_t workbook_size_bytes = 0;
  std::uint64_t invisible_cells = 0;
  std::uint64_t formula_count = 0;
  bool vba_present = false;

  bool operator==(const WorkbookMetrics&) const = default;

  static WorkbookMetrics encrypted();
};

WorkbookMetrics extract_metrics(const WorkbookModel& model);

/// High when macros, external links, array formulas, pivot tables or IF
/// nesting of depth 3+ are present; Medium when any formula exists; else Low.
/// Unavailable (encrypted) metrics grade High.
risk::ComplexityGrade grade_complexity(const WorkbookMetrics& metrics);

struct ControlsFramework {
  bool present = false;
  std::vector<std::string> missing;  // subset of {Control, Validation, Documentation}
  bool operator==(const ControlsFramework&) const = default;
};

/// Looks for the Control / Validation / Documentation tabs (case-insensitive,
/// surrounding whitespace ignored).
ControlsFramework detect_controls_framework(const WorkbookModel& model);

/// Everything `scan` reports for one file.
struct ScanReport {
  std::string file;
  WorkbookMetrics metrics;
  risk::ComplexityGrade complexity = risk::ComplexityGrade::Low;
  ControlsFramework controls_framework;
  bool operator==(const ScanReport&) const = default;
};

/// parse + extract + grade + detect. Encrypted packages yield unavailable
/// metrics instead of throwing; other parse errors propagate.
ScanReport scan_workbook(const std::filesystem::path& path);

}  // namespace eucgov::scanner
