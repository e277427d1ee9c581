#include "eucgov/scanner/workbook.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <iterator>
#include <set>
#include <unordered_map>

#include "eucgov/error.hpp"
#include "eucgov/scanner/formula.hpp"
#include "eucgov/scanner/zip_archive.hpp"
#include "xml_reader.hpp"

namespace eucgov::scanner {

// ---------------------------------------------------------------------------
// CellRef

std::optional<CellRef> CellRef::parse(std::string_view a1) {
  std::size_t i = 0;
  std::uint64_t col = 0;
  while (i < a1.size() && a1[i] == '$') ++i;
  std::size_t letters = i;
  while (i < a1.size() && std::isalpha(static_cast<unsigned char>(a1[i]))) {
    col = col * 26 + static_cast<std::uint64_t>(std::toupper(static_cast<unsigned char>(a1[i])) - 'A' + 1);
    ++i;
  }
  if (i == letters || i - letters > 3) return std::nullopt;
  while (i < a1.size() && a1[i] == '$') ++i;
  std::uint64_t row = 0;
  std::size_t digits = i;
  while (i < a1.size() && std::isdigit(static_cast<unsigned char>(a1[i]))) {
    row = row * 10 + static_cast<std::uint64_t>(a1[i] - '0');
    if (row > 0xFFFFFFF) return std::nullopt;
    ++i;
  }
  if (i != a1.size() || i == digits || row == 0) return std::nullopt;
  return CellRef{static_cast<std::uint32_t>(row - 1), static_cast<std::uint32_t>(col - 1)};
}

std::string CellRef::to_a1() const {
  std::string letters;
  std::uint32_t c = col + 1;
  while (c > 0) {
    letters.insert(letters.begin(), static_cast<char>('A' + (c - 1) % 26));
    c = (c - 1) / 26;
  }
  return letters + std::to_string(row + 1);
}

const Cell* Sheet::find(std::string_view a1) const {
  auto ref = CellRef::parse(a1);
  if (!ref) return nullptr;
  auto it = cells.find(*ref);
  return it == cells.end() ? nullptr : &it->second;
}

const Sheet* WorkbookModel::find_sheet(std::string_view name) const {
  for (const auto& s : sheets) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Package parsing

namespace {

constexpr std::array<std::uint8_t, 8> kCompoundFileMagic{0xD0, 0xCF, 0x11, 0xE0, 0xA1, 0xB1, 0x1A, 0xE1};

struct Relationship {
  std::string target;  // resolved part name, or raw target when external
  std::string type;
  bool external = false;
};

using Relationships = std::unordered_map<std::string, Relationship>;

std::string dirname(std::string_view part) {
  auto slash = part.rfind('/');
  return slash == std::string_view::npos ? std::string{} : std::string(part.substr(0, slash + 1));
}

// Resolves a relationship target against the directory of its source part.
std::string resolve_part(std::string_view base_dir, std::string_view target) {
  std::string joined = !target.empty() && target.front() == '/' ? std::string(target.substr(1))
                                                                 : std::string(base_dir) + std::string(target);
  std::vector<std::string> segments;
  std::size_t start = 0;
  while (start <= joined.size()) {
    auto slash = joined.find('/', start);
    auto seg = joined.substr(start, slash == std::string::npos ? std::string::npos : slash - start);
    if (seg == "..") {
      if (!segments.empty()) segments.pop_back();
    } else if (!seg.empty() && seg != ".") {
      segments.push_back(seg);
    }
    if (slash == std::string::npos) break;
    start = slash + 1;
  }
  std::string out;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i) out.push_back('/');
    out += segments[i];
  }
  return out;
}

std::string rels_part_for(std::string_view part) {
  auto dir = dirname(part);
  return dir + "_rels/" + std::string(part.substr(dir.size())) + ".rels";
}

Relationships read_relationships(const ZipArchive& zip, std::string_view source_part) {
  Relationships rels;
  auto rels_name = rels_part_for(source_part);
  auto doc = zip.read(rels_name);
  if (!doc) return rels;
  auto base = dirname(source_part);
  xml::Handlers h;
  h.on_start = [&](std::string_view name, const xml::Attributes& a) {
    if (name != "Relationship") return;
    const char* id = a.get("Id");
    const char* target = a.get("Target");
    if (!id || !target) return;
    Relationship r;
    const char* mode = a.get("TargetMode");
    r.external = mode && std::string_view(mode) == "External";
    r.target = r.external ? std::string(target) : resolve_part(base, target);
    if (const char* type = a.get("Type")) r.type = type;
    rels.emplace(id, std::move(r));
  };
  xml::parse(rels_name, *doc, h);
  return rels;
}

std::string normalize_rgb(std::string_view rgb) {
  std::string out;
  for (char c : rgb) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (out.size() == 6) out = "FF" + out;
  return out;
}

// Lower-cased file name of an external workbook reference, used to
// deduplicate link targets across parts and formulas.
std::string link_key(std::string_view target) {
  auto slash = target.find_last_of("/\\");
  std::string_view base = slash == std::string_view::npos ? target : target.substr(slash + 1);
  std::string out;
  for (char c : base) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

struct SheetEntry {
  std::string name;
  std::string rel_id;
  SheetVisibility visibility = SheetVisibility::Visible;
};

struct WorkbookPart {
  std::vector<SheetEntry> sheets;
  std::vector<std::string> defined_names;
  std::vector<std::string> external_ref_ids;
  bool protection = false;
};

WorkbookPart read_workbook_part(std::string_view part, const std::string& doc) {
  WorkbookPart wb;
  bool in_defined_name = false;
  std::string defined_name;
  xml::Handlers h;
  h.on_start = [&](std::string_view name, const xml::Attributes& a) {
    if (name == "sheet") {
      SheetEntry s;
      if (const char* n = a.get("name")) s.name = n;
      if (const char* id = a.get("r:id")) s.rel_id = id;
      if (const char* state = a.get("state")) {
        std::string_view st = state;
        if (st == "hidden") s.visibility = SheetVisibility::Hidden;
        if (st == "veryHidden") s.visibility = SheetVisibility::VeryHidden;
      }
      wb.sheets.push_back(std::move(s));
    } else if (name == "definedName") {
      in_defined_name = true;
      if (const char* n = a.get("name")) defined_name = n;
    } else if (name == "workbookProtection") {
      wb.protection = a.truthy("lockStructure") || a.truthy("lockWindows") || a.truthy("lockRevision") ||
                      a.get("workbookPassword") || a.get("workbookHashValue");
    } else if (name == "externalReference") {
      if (const char* id = a.get("r:id")) wb.external_ref_ids.emplace_back(id);
    }
  };
  h.on_end = [&](std::string_view name) {
    if (name == "definedName" && in_defined_name) {
      in_defined_name = false;
      wb.defined_names.push_back(std::move(defined_name));
      defined_name.clear();
    }
  };
  xml::parse(part, doc, h);
  return wb;
}

std::vector<std::string> read_shared_strings(std::string_view part, const std::string& doc) {
  std::vector<std::string> strings;
  std::string current;
  bool in_si = false, in_t = false;
  int phonetic_depth = 0;
  xml::Handlers h;
  h.on_start = [&](std::string_view name, const xml::Attributes&) {
    if (name == "si") {
      in_si = true;
      current.clear();
    } else if (name == "rPh") {
      ++phonetic_depth;
    } else if (name == "t" && in_si && phonetic_depth == 0) {
      in_t = true;
    }
  };
  h.on_end = [&](std::string_view name) {
    if (name == "si") {
      strings.push_back(std::move(current));
      current.clear();
      in_si = false;
    } else if (name == "rPh") {
      --phonetic_depth;
    } else if (name == "t") {
      in_t = false;
    }
  };
  h.on_text = [&](std::string_view text) {
    if (in_t) current.append(text);
  };
  xml::parse(part, doc, h);
  return strings;
}

std::vector<CellStyle> read_styles(std::string_view part, const std::string& doc) {
  struct Fill {
    std::optional<std::string> rgb;
    bool solid = false;
  };
  std::vector<std::optional<std::string>> fonts;
  std::vector<Fill> fills;
  std::vector<std::pair<std::size_t, std::size_t>> xfs;
  std::vector<std::string> stack;

  auto parent_is = [&](std::size_t up, std::string_view name) {
    return stack.size() > up && stack[stack.size() - 1 - up] == name;
  };

  xml::Handlers h;
  h.on_start = [&](std::string_view name, const xml::Attributes& a) {
    // Only the top-level font/fill/xf tables; dxfs carry their own copies.
    if (name == "font" && parent_is(0, "fonts")) {
      fonts.emplace_back();
    } else if (name == "color" && parent_is(0, "font") && parent_is(1, "fonts") && !fonts.empty()) {
      if (const char* rgb = a.get("rgb")) fonts.back() = normalize_rgb(rgb);
    } else if (name == "fill" && parent_is(0, "fills")) {
      fills.emplace_back();
    } else if (name == "patternFill" && parent_is(0, "fill") && parent_is(1, "fills") && !fills.empty()) {
      const char* type = a.get("patternType");
      fills.back().solid = type && std::string_view(type) == "solid";
    } else if (name == "fgColor" && parent_is(0, "patternFill") && parent_is(2, "fills") && !fills.empty()) {
      if (const char* rgb = a.get("rgb")) fills.back().rgb = normalize_rgb(rgb);
    } else if (name == "xf" && parent_is(0, "cellXfs")) {
      auto font = a.get("fontId");
      auto fill = a.get("fillId");
      xfs.emplace_back(font ? std::stoul(font) : 0, fill ? std::stoul(fill) : 0);
    }
    stack.emplace_back(name);
  };
  h.on_end = [&](std::string_view) {
    if (!stack.empty()) stack.pop_back();
  };
  try {
    xml::parse(part, doc, h);
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::MalformedPart, std::string(part) + ": non-numeric style index", std::string(part));
  } catch (const std::out_of_range&) {
    throw Error(ErrorCode::MalformedPart, std::string(part) + ": style index out of range", std::string(part));
  }

  std::vector<CellStyle> styles;
  styles.reserve(xfs.size());
  for (auto [font, fill] : xfs) {
    CellStyle s;
    if (font < fonts.size()) s.font_rgb = fonts[font];
    if (fill < fills.size() && fills[fill].solid) s.fill_rgb = fills[fill].rgb;
    styles.push_back(std::move(s));
  }
  return styles;
}

Sheet read_sheet(std::string_view part, const std::string& doc, const std::vector<std::string>& shared) {
  Sheet sheet;

  struct PendingCell {
    std::optional<CellRef> ref;
    std::string type;
    std::uint32_t style = 0;
    std::optional<std::string> formula;
    bool array = false;
    std::string shared_index;
    bool shared_anchor = false;
    std::string value;
    bool has_value = false;
  };
  std::unordered_map<std::string, std::string> shared_formulas;

  PendingCell cell;
  bool in_cell = false;
  enum class Text { None, Formula, Value, Inline } text = Text::None;
  std::uint32_t current_row = 0;
  bool any_row = false;
  std::optional<std::uint32_t> last_col;

  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::MalformedPart, std::string(part) + ": " + what, std::string(part));
  };

  xml::Handlers h;
  h.on_start = [&](std::string_view name, const xml::Attributes& a) {
    if (name == "row") {
      if (const char* r = a.get("r")) {
        try {
          current_row = static_cast<std::uint32_t>(std::stoul(r)) - 1;
        } catch (const std::exception&) {
          fail("bad row index '" + std::string(r) + "'");
        }
      } else {
        current_row = any_row ? current_row + 1 : 0;
      }
      any_row = true;
      last_col.reset();
      if (a.truthy("hidden")) ++sheet.hidden_rows;
    } else if (name == "col") {
      if (a.truthy("hidden")) {
        const char* mn = a.get("min");
        const char* mx = a.get("max");
        if (mn && mx) {
          auto lo = std::stoul(mn), hi = std::stoul(mx);
          if (hi >= lo) sheet.hidden_columns += static_cast<std::uint32_t>(hi - lo + 1);
        }
      }
    } else if (name == "c") {
      in_cell = true;
      cell = PendingCell{};
      if (const char* r = a.get("r")) {
        cell.ref = CellRef::parse(r);
        if (!cell.ref) fail("bad cell reference '" + std::string(r) + "'");
      } else {
        cell.ref = CellRef{current_row, last_col ? *last_col + 1 : 0};
      }
      last_col = cell.ref->col;
      current_row = cell.ref->row;
      if (const char* t = a.get("t")) cell.type = t;
      if (const char* s = a.get("s")) cell.style = static_cast<std::uint32_t>(std::strtoul(s, nullptr, 10));
    } else if (in_cell && name == "f") {
      text = Text::Formula;
      cell.formula = std::string{};
      const char* t = a.get("t");
      std::string_view kind = t ? t : "";
      cell.array = kind == "array";
      if (kind == "shared") {
        if (const char* si = a.get("si")) cell.shared_index = si;
        cell.shared_anchor = a.get("ref") != nullptr;
      }
    } else if (in_cell && name == "v") {
      text = Text::Value;
      cell.has_value = true;
    } else if (in_cell && name == "t") {
      text = Text::Inline;
      cell.has_value = true;
    } else if (name == "sheetProtection") {
      sheet.protection = a.truthy("sheet");
    }
  };
  h.on_text = [&](std::string_view s) {
    switch (text) {
      case Text::Formula: cell.formula->append(s); break;
      case Text::Value:
      case Text::Inline: cell.value.append(s); break;
      case Text::None: break;
    }
  };
  h.on_end = [&](std::string_view name) {
    if (name == "f" || name == "v" || name == "t") {
      text = Text::None;
      return;
    }
    if (name != "c" || !in_cell) return;
    in_cell = false;

    if (cell.formula && !cell.shared_index.empty()) {
      if (cell.shared_anchor && !cell.formula->empty()) {
        shared_formulas[cell.shared_index] = *cell.formula;
      } else if (cell.formula->empty()) {
        // Follower cells reuse the anchor text verbatim (references are not
        // shifted; the model does not evaluate formulas).
        auto it = shared_formulas.find(cell.shared_index);
        if (it != shared_formulas.end()) cell.formula = it->second;
      }
    }

    Cell out;
    out.address = cell.ref->to_a1();
    out.formula = std::move(cell.formula);
    out.array_formula = cell.array;
    out.style = cell.style;
    if (cell.has_value) {
      if (cell.type == "s") {
        std::size_t idx = 0;
        try {
          idx = std::stoul(cell.value);
        } catch (const std::exception&) {
          fail("bad shared string index in " + out.address);
        }
        if (idx >= shared.size()) fail("shared string index out of range in " + out.address);
        out.value = shared[idx];
        out.kind = ValueKind::Text;
      } else if (cell.type == "str" || cell.type == "inlineStr" || cell.type == "d") {
        out.value = std::move(cell.value);
        out.kind = ValueKind::Text;
      } else if (cell.type == "b") {
        out.value = cell.value == "1" ? "TRUE" : "FALSE";
        out.kind = ValueKind::Bool;
      } else if (cell.type == "e") {
        out.value = std::move(cell.value);
        out.kind = ValueKind::Error;
      } else {
        out.value = std::move(cell.value);
        out.kind = out.value.empty() ? ValueKind::Empty : ValueKind::Number;
      }
    }
    if (out.formula || out.kind != ValueKind::Empty) {
      auto ref = *cell.ref;
      sheet.cells.insert_or_assign(ref, std::move(out));
    }
  };

  try {
    xml::parse(part, doc, h);
  } catch (const std::invalid_argument&) {
    fail("non-numeric column bound");
  } catch (const std::out_of_range&) {
    fail("column bound out of range");
  }
  return sheet;
}

std::string find_workbook_part(const ZipArchive& zip) {
  // Root relationships point at the office document; fall back to the
  // conventional location.
  if (auto root = zip.read("_rels/.rels")) {
    std::string target;
    xml::Handlers h;
    h.on_start = [&](std::string_view name, const xml::Attributes& a) {
      const char* type = a.get("Type");
      const char* t = a.get("Target");
      if (name == "Relationship" && type && t && std::string_view(type).ends_with("/officeDocument")) {
        target = resolve_part("", t);
      }
    };
    xml::parse("_rels/.rels", *root, h);
    if (!target.empty() && zip.contains(target)) return target;
  }
  return "xl/workbook.xml";
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string(), path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

WorkbookModel parse_workbook(const std::filesystem::path& path) {
  return parse_workbook_bytes(read_file(path));
}

WorkbookModel parse_workbook_bytes(std::vector<std::uint8_t> bytes) {
  if (bytes.size() >= kCompoundFileMagic.size() &&
      std::equal(kCompoundFileMagic.begin(), kCompoundFileMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::EncryptedWorkbook,
                "compound-file container: encrypted workbook (or legacy binary format)");
  }
  bool zip_magic = bytes.size() >= 4 && bytes[0] == 'P' && bytes[1] == 'K' &&
                   ((bytes[2] == 3 && bytes[3] == 4) || (bytes[2] == 5 && bytes[3] == 6));
  if (!zip_magic) throw Error(ErrorCode::NotAWorkbook, "not a ZIP package (bad magic)");

  WorkbookModel model;
  model.file_size = bytes.size();
  ZipArchive zip(std::move(bytes));

  auto wb_part = find_workbook_part(zip);
  auto wb_doc = zip.read(wb_part);
  if (!wb_doc) throw Error(ErrorCode::NotAWorkbook, "package has no workbook part");
  auto wb = read_workbook_part(wb_part, *wb_doc);
  auto rels = read_relationships(zip, wb_part);

  std::vector<std::string> shared;
  std::string shared_part, styles_part;
  for (const auto& [id, rel] : rels) {
    if (rel.type.ends_with("/sharedStrings")) shared_part = rel.target;
    if (rel.type.ends_with("/styles")) styles_part = rel.target;
  }
  if (shared_part.empty()) shared_part = dirname(wb_part) + "sharedStrings.xml";
  if (styles_part.empty()) styles_part = dirname(wb_part) + "styles.xml";
  if (auto doc = zip.read(shared_part)) shared = read_shared_strings(shared_part, *doc);
  if (auto doc = zip.read(styles_part)) model.styles = read_styles(styles_part, *doc);

  std::set<std::string> names;
  for (auto& entry : wb.sheets) {
    if (!names.insert(entry.name).second) {
      throw Error(ErrorCode::MalformedPart, wb_part + ": duplicate sheet name '" + entry.name + "'", wb_part);
    }
    auto rel = rels.find(entry.rel_id);
    if (rel == rels.end()) {
      throw Error(ErrorCode::MalformedPart, wb_part + ": sheet '" + entry.name + "' has no relationship", wb_part);
    }
    const auto& part = rel->second.target;
    auto doc = zip.read(part);
    if (!doc) throw Error(ErrorCode::MalformedPart, "missing sheet part " + part, part);
    Sheet sheet = rel->second.type.ends_with("/chartsheet") ? Sheet{} : read_sheet(part, *doc, shared);
    sheet.name = entry.name;
    sheet.visibility = entry.visibility;
    model.sheets.push_back(std::move(sheet));
  }

  for (auto& n : wb.defined_names) model.defined_names.push_back(std::move(n));
  model.workbook_protection = wb.protection;

  // External links: one target per externalLink part, in workbook order, so
  // formula prefixes `[n]` can be resolved against it.
  std::vector<std::string> ordered_link_parts;
  for (const auto& id : wb.external_ref_ids) {
    auto rel = rels.find(id);
    if (rel != rels.end()) ordered_link_parts.push_back(rel->second.target);
  }
  for (const auto& e : zip.entries()) {
    if (e.name.starts_with("xl/externalLinks/externalLink") && e.name.ends_with(".xml") &&
        std::find(ordered_link_parts.begin(), ordered_link_parts.end(), e.name) == ordered_link_parts.end()) {
      ordered_link_parts.push_back(e.name);
    }
    if (e.name.starts_with("xl/pivotTables/") && e.name.ends_with(".xml")) ++model.pivot_part_count;
    if (e.name.ends_with("vbaProject.bin")) model.vba_present = true;
  }

  std::vector<std::string> link_keys;
  for (const auto& part : ordered_link_parts) {
    std::string key = part;
    for (const auto& [id, rel] : read_relationships(zip, part)) {
      if (rel.external) {
        key = rel.target;
        break;
      }
    }
    link_keys.push_back(link_key(key));
  }

  std::set<std::string> targets(link_keys.begin(), link_keys.end());
  for (const auto& sheet : model.sheets) {
    for (const auto& [ref, cell] : sheet.cells) {
      if (!cell.formula) continue;
      for (const auto& raw : scan_formula(*cell.formula).external_refs) {
        bool numeric = !raw.empty() && std::all_of(raw.begin(), raw.end(), [](char c) { return c >= '0' && c <= '9'; });
        if (numeric && raw.size() < 9) {
          auto n = std::stoul(raw);
          targets.insert(n >= 1 && n <= link_keys.size() ? link_keys[n - 1] : "[" + raw + "]");
        } else {
          targets.insert(link_key(raw));
        }
      }
    }
  }
  model.external_link_targets.assign(targets.begin(), targets.end());
  return model;
}

}  // namespace eucgov::scanner
