#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "eucgov/inventory/record.hpp"
#include "eucgov/reporting/kpi.hpp"
#include "eucgov/risk/model.hpp"
#include "eucgov/risk/triage.hpp"
#include "eucgov/scanner/diff.hpp"
#include "eucgov/scanner/metrics.hpp"

namespace eucgov::reporting {

enum class Format { Json, Markdown, Csv };

/// "json", "md" / "markdown" or "csv"; anything else throws
/// Error{UnsupportedFormat}.
Format format_from_string(std::string_view token);

// All renderers are pure and end with a newline. JSON output is the
// serialized module result, pretty-printed with two-space indent. CSV
// quoting follows RFC 4180 with CRLF record ends.

/// CSV is sparse: header `metric,key,impact,count` and one row per non-zero
/// figure, so an empty snapshot renders as the header alone.
std::string render(const KpiSnapshot& snapshot, Format format);
std::string render(const Concentration& concentration, Format format);
std::string render(const std::vector<OverdueItem>& overdue, Format format);
/// Record lists use the inventory CSV columns.
std::string render(const std::vector<inventory::EucaRecord>& records, Format format);
std::string render(const std::vector<scanner::ScanReport>& reports, Format format);
std::string render(const scanner::BaselineDiff& diff, Format format);

// Single objects: markdown and CSV are `field, value` listings.
std::string render(const risk::AssessmentResult& result, Format format);
std::string render(const risk::TriageResult& result, Format format);
std::string render(const inventory::EucaRecord& record, Format format);
std::string render(const inventory::RiskRegisterEntry& entry, Format format);

}  // namespace eucgov::reporting
