#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "eucgov/scanner/workbook.hpp"

namespace eucgov::scanner {

enum class ChangeKind {
  SheetAdded,
  SheetRemoved,
  FormulaChanged,
  FormulaReplacedByConstant,
  ConstantReplacedByFormula,
  ValueChanged,
  CellAdded,
  CellRemoved,
};

/// Wire token, e.g. "FORMULA_REPLACED_BY_CONSTANT".
std::string_view to_string(ChangeKind kind);
ChangeKind change_kind_from_string(std::string_view token);

/// A hard-coded constant pasted over a formula is the classic silent
/// spreadsheet error, so it is the only high-severity change.
inline bool is_high_severity(ChangeKind kind) { return kind == ChangeKind::FormulaReplacedByConstant; }

struct DiffEntry {
  std::string sheet;
  std::string address;  // empty for sheet-level entries
  ChangeKind kind = ChangeKind::ValueChanged;
  std::string before;   // "=formula" or cached value; sheet name for sheet entries
  std::string after;
  bool operator==(const DiffEntry&) const = default;
};

struct BaselineDiff {
  std::vector<DiffEntry> entries;
  bool operator==(const BaselineDiff&) const = default;
};

/// Cell-level comparison: formula text first, then cached value. Entries come
/// in baseline sheet order (added sheets last), cells row-major.
BaselineDiff diff_against_baseline(const WorkbookModel& baseline, const WorkbookModel& current);

}  // namespace eucgov::scanner
