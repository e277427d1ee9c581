#pragma once

// JSON mappings for every wire type. Keys are snake_case field names; grades
// and impact are integers, bands their names, dates ISO-8601 strings.
//
// Parsing is strict where a partial object would be silently wrong (assessment
// input, control answers, triage submissions): missing keys raise
// Error{MissingField}, unknown control names Error{UnknownField}, wrong types
// Error{InvalidInput}.

#include <string>
#include <string_view>

#include <json.hpp>

#include "eucgov/date.hpp"
#include "eucgov/inventory/record.hpp"
#include "eucgov/reporting/kpi.hpp"
#include "eucgov/risk/model.hpp"
#include "eucgov/risk/triage.hpp"
#include "eucgov/scanner/diff.hpp"
#include "eucgov/scanner/metrics.hpp"

namespace eucgov {

using nlohmann::json;

/// Parses JSON text; syntax errors become Error{InvalidInput} naming `what`.
json parse_json(std::string_view text, std::string_view what = "request body");

void to_json(json& j, const Date& d);
void from_json(const json& j, Date& d);

}  // namespace eucgov

namespace eucgov::risk {

void to_json(nlohmann::json& j, RatingBand b);
void from_json(const nlohmann::json& j, RatingBand& b);

void to_json(nlohmann::json& j, const ControlAnswers& c);
void from_json(const nlohmann::json& j, ControlAnswers& c);
void to_json(nlohmann::json& j, const AssessmentInput& in);
void from_json(const nlohmann::json& j, AssessmentInput& in);
void to_json(nlohmann::json& j, const AssessmentResult& r);
void from_json(const nlohmann::json& j, AssessmentResult& r);
void to_json(nlohmann::json& j, const TriageSubmission& s);
void from_json(const nlohmann::json& j, TriageSubmission& s);
void to_json(nlohmann::json& j, const TriageResult& r);

}  // namespace eucgov::risk

namespace eucgov::scanner {

void to_json(nlohmann::json& j, const WorkbookMetrics& m);
void to_json(nlohmann::json& j, const ControlsFramework& c);
void to_json(nlohmann::json& j, const ScanReport& r);
void to_json(nlohmann::json& j, const DiffEntry& e);
void to_json(nlohmann::json& j, const BaselineDiff& d);

}  // namespace eucgov::scanner

namespace eucgov::inventory {

void to_json(nlohmann::json& j, const AssessmentRecord& a);
void from_json(const nlohmann::json& j, AssessmentRecord& a);
void to_json(nlohmann::json& j, const LifecycleEvent& e);
void from_json(const nlohmann::json& j, LifecycleEvent& e);
void to_json(nlohmann::json& j, const EucaRecord& r);
/// Lenient: absent keys keep their defaults, so a POST body may carry just
/// the metadata fields.
void from_json(const nlohmann::json& j, EucaRecord& r);
void to_json(nlohmann::json& j, const RiskRegisterEntry& e);
void from_json(const nlohmann::json& j, RiskRegisterEntry& e);
void to_json(nlohmann::json& j, const StoreDocument& d);
void from_json(const nlohmann::json& j, StoreDocument& d);

}  // namespace eucgov::inventory

namespace eucgov::reporting {

void to_json(nlohmann::json& j, const KpiSnapshot& s);
void to_json(nlohmann::json& j, const Concentration& c);
void to_json(nlohmann::json& j, const OverdueItem& o);

}  // namespace eucgov::reporting
