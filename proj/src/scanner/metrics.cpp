#include "eucgov/scanner/metrics.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "eucgov/error.hpp"
#include "eucgov/scanner/formula.hpp"

namespace eucgov::scanner {

WorkbookMetrics WorkbookMetrics::encrypted() {
  WorkbookMetrics m;
  m.available = false;
  m.password_protected = true;
  return m;
}

WorkbookMetrics extract_metrics(const WorkbookModel& model) {
  WorkbookMetrics m;
  m.sheet_count = model.sheets.size();
  m.external_links = model.external_link_targets.size();
  m.pivot_tables = model.pivot_part_count;
  m.vba_present = model.vba_present;
  m.workbook_size_bytes = model.file_size;
  m.password_protected = model.workbook_protection;
  // Built-in names (print areas, filter ranges) are not user named items.
  m.named_items = static_cast<std::uint64_t>(std::count_if(
      model.defined_names.begin(), model.defined_names.end(),
      [](const std::string& n) { return !n.starts_with("_xlnm."); }));

  for (const auto& sheet : model.sheets) {
    if (sheet.visibility == SheetVisibility::Hidden) ++m.hidden_sheets;
    if (sheet.visibility == SheetVisibility::VeryHidden) ++m.very_hidden_sheets;
    if (sheet.protection) m.password_protected = true;
    m.hidden_rows += sheet.hidden_rows;
    m.hidden_columns += sheet.hidden_columns;

    for (const auto& [ref, cell] : sheet.cells) {
      if (cell.style < model.styles.size()) {
        const auto& style = model.styles[cell.style];
        if (style.font_rgb && style.fill_rgb && *style.font_rgb == *style.fill_rgb) ++m.invisible_cells;
      }
      if (!cell.formula) continue;
      ++m.formula_count;
      if (cell.array_formula) ++m.array_formulas;
      if (cell.kind == ValueKind::Error) ++m.formulas_with_errors;
      auto scan = scan_formula(*cell.formula);
      m.nested_if_count += static_cast<std::uint64_t>(scan.if_calls);
      m.max_nested_if_level = std::max<std::uint64_t>(m.max_nested_if_level, static_cast<std::uint64_t>(scan.max_if_depth));
    }
  }
  return m;
}

risk::ComplexityGrade grade_complexity(const WorkbookMetrics& m) {
  if (!m.available) return risk::ComplexityGrade::High;
  bool high = m.vba_present || m.external_links > 0 || m.array_formulas > 0 || m.pivot_tables > 0 ||
              m.max_nested_if_level >= 3;
  if (high) return risk::ComplexityGrade::High;
  if (m.formula_count > 0) return risk::ComplexityGrade::Medium;
  return risk::ComplexityGrade::Low;
}

ControlsFramework detect_controls_framework(const WorkbookModel& model) {
  static constexpr std::array<std::string_view, 3> kTabs{"Control", "Validation", "Documentation"};

  auto normalize = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    std::string out;
    for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
  };

  ControlsFramework out;
  for (auto tab : kTabs) {
    auto wanted = normalize(tab);
    bool found = std::any_of(model.sheets.begin(), model.sheets.end(),
                             [&](const Sheet& s) { return normalize(s.name) == wanted; });
    if (!found) out.missing.emplace_back(tab);
  }
  out.present = out.missing.empty();
  return out;
}

ScanReport scan_workbook(const std::filesystem::path& path) {
  ScanReport report;
  report.file = path.string();
  try {
    auto model = parse_workbook(path);
    report.metrics = extract_metrics(model);
    report.controls_framework = detect_controls_framework(model);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EncryptedWorkbook) throw;
    report.metrics = WorkbookMetrics::encrypted();
    report.metrics.workbook_size_bytes = std::filesystem::file_size(path);
    report.controls_framework.missing = {"Control", "Validation", "Documentation"};
  }
  report.complexity = grade_complexity(report.metrics);
  return report;
}

}  // namespace eucgov::scanner
