#include "eucgov/reporting/render.hpp"

#include "eucgov/csv.hpp"
#include "eucgov/error.hpp"
#include "eucgov/inventory/inventory.hpp"
#include "eucgov/serialization.hpp"

namespace eucgov::reporting {

namespace {

using Rows = std::vector<csv::Row>;

constexpr std::array<std::string_view, 6> kImpactHeadings{
    "Inconvenient", "Poor customer outcomes", "Reputational", "Loss of business", "Financial", "Statutory"};

std::string md_cell(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '|') {
      out += "\\|";
    } else if (c == '\n' || c == '\r') {
      out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string md_table(const csv::Row& header, const Rows& rows) {
  auto line = [](const csv::Row& cells) {
    std::string s = "|";
    for (const auto& c : cells) s += " " + md_cell(c) + " |";
    return s + "\n";
  };
  std::string out = line(header) + "|";
  for (std::size_t i = 0; i < header.size(); ++i) out += "---|";
  out += "\n";
  for (const auto& r : rows) out += line(r);
  return out;
}

std::string csv_table(const csv::Row& header, const Rows& rows) {
  std::string out = csv::format_row(header);
  for (const auto& r : rows) out += csv::format_row(r);
  return out;
}

std::string table(Format f, const csv::Row& header, const Rows& rows) {
  return f == Format::Csv ? csv_table(header, rows) : md_table(header, rows);
}

std::string as_json(const json& j) { return j.dump(2) + "\n"; }

std::string scalar_text(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string out;
    for (const auto& item : v) {
      if (!out.empty()) out.push_back(';');
      out += scalar_text(item);
    }
    return out;
  }
  return v.dump();
}

// Flattens nested objects into dotted field names; arrays of scalars are
// joined with ';' and arrays of objects are counted.
void flatten(const json& j, const std::string& prefix, Rows& out) {
  for (const auto& [key, v] : j.items()) {
    auto name = prefix.empty() ? key : prefix + "." + key;
    if (v.is_object()) {
      flatten(v, name, out);
    } else if (v.is_array() && !v.empty() && v.front().is_object()) {
      out.push_back({name, std::to_string(v.size()) + " entries"});
    } else {
      out.push_back({name, scalar_text(v)});
    }
  }
}

std::string field_listing(const json& j, Format f) {
  if (f == Format::Json) return as_json(j);
  Rows rows;
  flatten(j, "", rows);
  return table(f, {"field", "value"}, rows);
}

std::string band_name(std::size_t b) { return std::string(risk::to_string(static_cast<risk::RatingBand>(b))); }

}  // namespace

Format format_from_string(std::string_view token) {
  if (token == "json") return Format::Json;
  if (token == "md" || token == "markdown") return Format::Markdown;
  if (token == "csv") return Format::Csv;
  throw Error(ErrorCode::UnsupportedFormat, "unsupported format '" + std::string(token) + "' (json, md, csv)",
              "format");
}

std::string render(const KpiSnapshot& s, Format f) {
  if (f == Format::Json) return as_json(s);

  if (f == Format::Csv) {
    Rows rows;
    for (std::size_t b = 4; b-- > 0;) {
      if (s.band_counts[b]) rows.push_back({"band", band_name(b), "", std::to_string(s.band_counts[b])});
    }
    for (std::size_t b = 4; b-- > 0;) {
      for (std::size_t i = 0; i < 6; ++i) {
        if (auto n = s.band_impact_matrix[b][i]) {
          rows.push_back({"matrix", band_name(b), std::to_string(i + 1), std::to_string(n)});
        }
      }
    }
    for (const auto& [dept, n] : s.department_histogram) {
      if (n) rows.push_back({"department", dept, "", std::to_string(n)});
    }
    auto total = [&](const char* name, std::uint64_t n) {
      if (n) rows.push_back({name, "", "", std::to_string(n)});
    };
    total("total_assessed", s.total_assessed);
    total("overdue_count", s.overdue_count);
    total("unregistered_amber_red_count", s.unregistered_amber_red_count);
    return csv_table({"metric", "key", "impact", "count"}, rows);
  }

  std::string out = "# KPI snapshot " + s.as_of.to_string() + "\n\n## Rating bands\n\n";
  Rows bands;
  for (std::size_t b = 4; b-- > 0;) bands.push_back({band_name(b), std::to_string(s.band_counts[b])});
  bands.push_back({"Total", std::to_string(s.total_assessed)});
  out += md_table({"Band", "Count"}, bands);

  out += "\n## Band by impact\n\n";
  csv::Row header{"Band"};
  for (auto h : kImpactHeadings) header.emplace_back(h);
  header.emplace_back("Total");
  Rows matrix;
  for (std::size_t b = 4; b-- > 0;) {
    csv::Row row{band_name(b)};
    for (auto n : s.band_impact_matrix[b]) row.push_back(std::to_string(n));
    row.push_back(std::to_string(s.band_counts[b]));
    matrix.push_back(std::move(row));
  }
  out += md_table(header, matrix);

  out += "\n## Departments\n\n";
  Rows depts;
  for (const auto& [dept, n] : s.department_histogram) depts.push_back({dept, std::to_string(n)});
  out += md_table({"Department", "Count"}, depts);

  out += "\n## Follow-up\n\n";
  out += md_table({"Measure", "Count"},
                  {{"Overdue reviews", std::to_string(s.overdue_count)},
                   {"Amber/Red without an open risk entry", std::to_string(s.unregistered_amber_red_count)}});
  return out;
}

std::string render(const Concentration& c, Format f) {
  if (f == Format::Json) return as_json(c);
  Rows rows;
  for (std::size_t i = 0; i < c.departments.size(); ++i) {
    const auto& d = c.departments[i];
    rows.push_back({std::to_string(i + 1), d.department, std::to_string(d.count)});
  }
  auto out = table(f, {"rank", "department", "count"}, rows);
  if (f == Format::Markdown) {
    char share[32];
    std::snprintf(share, sizeof share, "%.4f", c.top_k_share);
    out += "\nTop " + std::to_string(c.top_k) + " departments hold " + std::to_string(c.top_k_total) + " of " +
           std::to_string(c.total) + " applications (share " + share + ").\n";
  }
  return out;
}

std::string render(const std::vector<OverdueItem>& overdue, Format f) {
  if (f == Format::Json) return as_json(overdue);
  Rows rows;
  for (const auto& o : overdue) {
    rows.push_back({o.record.id, o.record.name, o.record.department, o.record.manager,
                    o.record.next_review ? o.record.next_review->to_string() : "", std::to_string(o.days_overdue)});
  }
  return table(f, {"id", "name", "department", "manager", "next_review", "days_overdue"}, rows);
}

std::string render(const std::vector<inventory::EucaRecord>& records, Format f) {
  if (f == Format::Json) return as_json(records);
  Rows rows;
  for (const auto& r : records) rows.push_back(inventory::csv_row(r));
  return table(f, inventory::csv_columns(), rows);
}

std::string render(const std::vector<scanner::ScanReport>& reports, Format f) {
  if (f == Format::Json) return as_json(reports);
  csv::Row header{"file", "complexity", "controls_framework"};
  json probe = scanner::WorkbookMetrics{};
  for (const auto& [key, _] : probe.items()) header.push_back(key);
  Rows rows;
  for (const auto& r : reports) {
    csv::Row row{r.file, std::to_string(risk::value(r.complexity)), r.controls_framework.present ? "true" : "false"};
    json m = r.metrics;
    for (const auto& [key, v] : m.items()) row.push_back(scalar_text(v));
    rows.push_back(std::move(row));
  }
  return table(f, header, rows);
}

std::string render(const scanner::BaselineDiff& diff, Format f) {
  if (f == Format::Json) return as_json(diff);
  Rows rows;
  for (const auto& e : diff.entries) {
    rows.push_back({e.sheet, e.address, std::string(scanner::to_string(e.kind)),
                    scanner::is_high_severity(e.kind) ? "high" : "normal", e.before, e.after});
  }
  return table(f, {"sheet", "address", "kind", "severity", "before", "after"}, rows);
}

std::string render(const risk::AssessmentResult& result, Format f) { return field_listing(result, f); }
std::string render(const risk::TriageResult& result, Format f) { return field_listing(result, f); }
std::string render(const inventory::EucaRecord& record, Format f) { return field_listing(record, f); }
std::string render(const inventory::RiskRegisterEntry& entry, Format f) { return field_listing(entry, f); }

}  // namespace eucgov::reporting
