#include "eucgov/scanner/diff.hpp"

#include <array>
#include <optional>
#include <utility>

#include "eucgov/error.hpp"

namespace eucgov::scanner {

namespace {

constexpr std::array<std::pair<ChangeKind, std::string_view>, 8> kKindNames{{
    {ChangeKind::SheetAdded, "SHEET_ADDED"},
    {ChangeKind::SheetRemoved, "SHEET_REMOVED"},
    {ChangeKind::FormulaChanged, "FORMULA_CHANGED"},
    {ChangeKind::FormulaReplacedByConstant, "FORMULA_REPLACED_BY_CONSTANT"},
    {ChangeKind::ConstantReplacedByFormula, "CONSTANT_REPLACED_BY_FORMULA"},
    {ChangeKind::ValueChanged, "VALUE_CHANGED"},
    {ChangeKind::CellAdded, "CELL_ADDED"},
    {ChangeKind::CellRemoved, "CELL_REMOVED"},
}};

std::string describe(const Cell& c) {
  return c.formula ? "=" + *c.formula : c.value;
}

void diff_sheet(const Sheet& before, const Sheet& after, std::vector<DiffEntry>& out) {
  auto b = before.cells.begin();
  auto a = after.cells.begin();
  while (b != before.cells.end() || a != after.cells.end()) {
    if (a == after.cells.end() || (b != before.cells.end() && b->first < a->first)) {
      out.push_back({before.name, b->second.address, ChangeKind::CellRemoved, describe(b->second), ""});
      ++b;
      continue;
    }
    if (b == before.cells.end() || a->first < b->first) {
      out.push_back({before.name, a->second.address, ChangeKind::CellAdded, "", describe(a->second)});
      ++a;
      continue;
    }
    const Cell& old_cell = b->second;
    const Cell& new_cell = a->second;
    std::optional<ChangeKind> kind;
    if (old_cell.formula && !new_cell.formula) {
      kind = ChangeKind::FormulaReplacedByConstant;
    } else if (!old_cell.formula && new_cell.formula) {
      kind = ChangeKind::ConstantReplacedByFormula;
    } else if (old_cell.formula != new_cell.formula) {
      kind = ChangeKind::FormulaChanged;
    } else if (old_cell.value != new_cell.value || old_cell.kind != new_cell.kind) {
      kind = ChangeKind::ValueChanged;
    }
    if (kind) {
      // VALUE_CHANGED on a formula cell shows the cached results.
      bool values = *kind == ChangeKind::ValueChanged;
      out.push_back({before.name, old_cell.address, *kind, values ? old_cell.value : describe(old_cell),
                     values ? new_cell.value : describe(new_cell)});
    }
    ++a;
    ++b;
  }
}

}  // namespace

std::string_view to_string(ChangeKind kind) {
  for (auto [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "UNKNOWN";
}

ChangeKind change_kind_from_string(std::string_view token) {
  for (auto [k, name] : kKindNames) {
    if (name == token) return k;
  }
  throw Error(ErrorCode::InvalidInput, "unknown change kind '" + std::string(token) + "'", "kind");
}

BaselineDiff diff_against_baseline(const WorkbookModel& baseline, const WorkbookModel& current) {
  BaselineDiff diff;
  for (const auto& sheet : baseline.sheets) {
    const Sheet* counterpart = current.find_sheet(sheet.name);
    if (!counterpart) {
      diff.entries.push_back({sheet.name, "", ChangeKind::SheetRemoved, sheet.name, ""});
      continue;
    }
    diff_sheet(sheet, *counterpart, diff.entries);
  }
  for (const auto& sheet : current.sheets) {
    if (!baseline.find_sheet(sheet.name)) {
      diff.entries.push_back({sheet.name, "", ChangeKind::SheetAdded, "", sheet.name});
    }
  }
  return diff;
}

}  // namespace eucgov::scanner
