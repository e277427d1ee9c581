#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace eucgov::scanner {

enum class SheetVisibility { Visible, Hidden, VeryHidden };
enum class ValueKind { Number, Text, Bool, Error, Empty };

/// Zero-based row/column pair with A1 conversion.
struct CellRef {
  std::uint32_t row = 0;
  std::uint32_t col = 0;

  static std::optional<CellRef> parse(std::string_view a1);
  std::string to_a1() const;
  auto operator<=>(const CellRef&) const = default;
};

struct Cell {
  std::string address;                 // A1 style, e.g. "B5"
  std::optional<std::string> formula;  // stored without the leading '='
  std::string value;                   // cached value as text
  ValueKind kind = ValueKind::Empty;
  bool array_formula = false;          // anchor of an array formula
  std::uint32_t style = 0;

  bool operator==(const Cell&) const = default;
};

struct Sheet {
  std::string name;
  SheetVisibility visibility = SheetVisibility::Visible;
  bool protection = false;
  std::uint32_t hidden_rows = 0;
  std::uint32_t hidden_columns = 0;
  std::map<CellRef, Cell> cells;  // row-major order

  const Cell* find(std::string_view a1) const;
};

/// Explicit ARGB colors per cell format index (`cellXfs`); absent when the
/// format uses a theme/indexed color or no color at all.
struct CellStyle {
  std::optional<std::string> font_rgb;
  std::optional<std::string> fill_rgb;
};

struct WorkbookModel {
  std::vector<Sheet> sheets;
  std::vector<std::string> defined_names;
  std::uint32_t pivot_part_count = 0;
  /// Distinct external workbook targets, from externalLink parts and
  /// `[n]`/`[Book.xlsx]` prefixed formula references.
  std::vector<std::string> external_link_targets;
  bool vba_present = false;
  bool workbook_protection = false;
  std::uint64_t file_size = 0;
  std::vector<CellStyle> styles;

  const Sheet* find_sheet(std::string_view name) const;
};

/// Parses an .xlsx/.xlsm package. Never modifies the file.
/// Throws Error{NotAWorkbook | EncryptedWorkbook | MalformedPart | Io}.
WorkbookModel parse_workbook(const std::filesystem::path& path);
WorkbookModel parse_workbook_bytes(std::vector<std::uint8_t> bytes);

}  // namespace eucgov::scanner
