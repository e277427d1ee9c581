#include "eucgov/serialization.hpp"

#include <limits>

#include "eucgov/error.hpp"

namespace eucgov {

namespace {

[[noreturn]] void wrong_type(std::string_view key, std::string_view expected) {
  throw Error(ErrorCode::InvalidInput, std::string(key) + " must be " + std::string(expected), std::string(key));
}

const json& need(const json& j, std::string_view key) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "expected a JSON object", std::string(key));
  auto it = j.find(std::string(key));
  if (it == j.end() || it->is_null()) {
    throw Error(ErrorCode::MissingField, std::string(key) + " is required", std::string(key));
  }
  return *it;
}

const json* maybe(const json& j, std::string_view key) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "expected a JSON object", std::string(key));
  auto it = j.find(std::string(key));
  return (it == j.end() || it->is_null()) ? nullptr : &*it;
}

int as_int(const json& v, std::string_view key) {
  if (!v.is_number_integer()) wrong_type(key, "an integer");
  auto n = v.get<std::int64_t>();
  if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max()) wrong_type(key, "a small integer");
  return static_cast<int>(n);
}

double as_double(const json& v, std::string_view key) {
  if (!v.is_number()) wrong_type(key, "a number");
  return v.get<double>();
}

bool as_bool(const json& v, std::string_view key) {
  if (!v.is_boolean()) wrong_type(key, "true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, std::string_view key) {
  if (!v.is_string()) wrong_type(key, "a string");
  return v.get<std::string>();
}

Date as_date(const json& v, std::string_view key) { return Date::parse(as_string(v, key), key); }

Timestamp as_timestamp(const json& v, std::string_view key) {
  try {
    return parse_timestamp(as_string(v, key));
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidInput, std::string(key) + ": " + e.what(), std::string(key));
  }
}

std::vector<std::string> as_strings(const json& v, std::string_view key) {
  if (!v.is_array()) wrong_type(key, "an array of strings");
  std::vector<std::string> out;
  for (const auto& item : v) out.push_back(as_string(item, key));
  return out;
}

json optional_date(const std::optional<Date>& d) { return d ? json(d->to_string()) : json(nullptr); }

void reject_unknown(const json& j, std::initializer_list<std::string_view> known) {
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(ErrorCode::UnknownField, "unknown field '" + key + "'", key);
    }
  }
}

}  // namespace

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidInput, std::string(what) + " is not valid JSON: " + e.what());
  }
}

void to_json(json& j, const Date& d) { j = d.to_string(); }
void from_json(const json& j, Date& d) { d = as_date(j, "date"); }

// ---------------------------------------------------------------------------

namespace risk {

void to_json(json& j, RatingBand b) { j = std::string(to_string(b)); }
void from_json(const json& j, RatingBand& b) { b = band_from_string(as_string(j, "band")); }

void to_json(json& j, const ControlAnswers& c) {
  j = json::object();
  for (const auto& f : control_fields()) j[std::string(f.name)] = c.*f.member;
}

void from_json(const json& j, ControlAnswers& c) {
  if (!j.is_object()) wrong_type("controls", "an object");
  for (const auto& [key, _] : j.items()) {
    auto& fields = control_fields();
    if (std::none_of(fields.begin(), fields.end(), [&](const ControlField& f) { return f.name == key; })) {
      throw Error(ErrorCode::UnknownField, "unknown control '" + key + "'", key);
    }
  }
  for (const auto& f : control_fields()) c.*f.member = as_bool(need(j, f.name), f.name);
}

void to_json(json& j, const AssessmentInput& in) {
  j = {{"complexity", value(in.complexity)},
       {"materiality", value(in.materiality)},
       {"impact", value(in.impact)},
       {"controls", in.controls},
       {"assessed_on", in.assessed_on}};
}

void from_json(const json& j, AssessmentInput& in) {
  if (!j.is_object()) wrong_type("input", "an object");
  reject_unknown(j, {"complexity", "materiality", "impact", "controls", "assessed_on"});
  in.complexity = complexity_from_int(as_int(need(j, "complexity"), "complexity"));
  in.materiality = materiality_from_int(as_int(need(j, "materiality"), "materiality"));
  in.impact = impact_from_int(as_int(need(j, "impact"), "impact"));
  in.controls = need(j, "controls").get<ControlAnswers>();
  in.assessed_on = as_date(need(j, "assessed_on"), "assessed_on");
}

void to_json(json& j, const AssessmentResult& r) {
  j = {{"deficiency", r.deficiency},
       {"control_depth", r.control_depth},
       {"risk_score", r.risk_score},
       {"band", r.band},
       {"dlc_required", r.dlc_required},
       {"escalated_for_data", r.escalated_for_data},
       {"clamped_by_impact", r.clamped_by_impact},
       {"reasons", r.reasons},
       {"next_review", r.next_review}};
}

void from_json(const json& j, AssessmentResult& r) {
  r.deficiency = as_double(need(j, "deficiency"), "deficiency");
  r.control_depth = as_int(need(j, "control_depth"), "control_depth");
  r.risk_score = as_int(need(j, "risk_score"), "risk_score");
  r.band = need(j, "band").get<RatingBand>();
  r.dlc_required = as_bool(need(j, "dlc_required"), "dlc_required");
  r.escalated_for_data = as_bool(need(j, "escalated_for_data"), "escalated_for_data");
  r.clamped_by_impact = as_bool(need(j, "clamped_by_impact"), "clamped_by_impact");
  r.reasons = as_strings(need(j, "reasons"), "reasons");
  r.next_review = as_date(need(j, "next_review"), "next_review");
}

void to_json(json& j, const TriageSubmission& s) {
  j = {{"department", s.department},
       {"has_euc", s.has_euc},
       {"process", s.process},
       {"materiality", s.materiality},
       {"complexity", s.complexity},
       {"fix_knowledge", s.fix_knowledge},
       {"staffing_resilience", s.staffing_resilience},
       {"recovery", s.recovery},
       {"version_control", s.version_control},
       {"misuse_protection", s.misuse_protection},
       {"gdpr", s.gdpr}};
}

void from_json(const json& j, TriageSubmission& s) {
  if (!j.is_object()) wrong_type("submission", "an object");
  reject_unknown(j, {"department", "has_euc", "process", "materiality", "complexity", "fix_knowledge",
                     "staffing_resilience", "recovery", "version_control", "misuse_protection", "gdpr"});
  if (auto v = maybe(j, "department")) s.department = as_string(*v, "department");
  if (auto v = maybe(j, "process")) s.process = as_string(*v, "process");
  s.has_euc = as_int(need(j, "has_euc"), "has_euc");
  // "No EUCs" skips the rest of the template.
  if (s.has_euc == 0) return;
  s.materiality = as_int(need(j, "materiality"), "materiality");
  s.complexity = as_int(need(j, "complexity"), "complexity");
  s.fix_knowledge = as_double(need(j, "fix_knowledge"), "fix_knowledge");
  s.staffing_resilience = as_double(need(j, "staffing_resilience"), "staffing_resilience");
  s.recovery = as_double(need(j, "recovery"), "recovery");
  s.version_control = as_double(need(j, "version_control"), "version_control");
  s.misuse_protection = as_double(need(j, "misuse_protection"), "misuse_protection");
  s.gdpr = as_int(need(j, "gdpr"), "gdpr");
}

void to_json(json& j, const TriageResult& r) { j = {{"band", r.band}, {"message", r.message}}; }

}  // namespace risk

// ---------------------------------------------------------------------------

namespace scanner {

void to_json(json& j, const WorkbookMetrics& m) {
  auto count = [&](std::uint64_t v) { return m.available ? json(v) : json(nullptr); };
  j = {{"sheet_count", count(m.sheet_count)},
       {"formulas_with_errors", count(m.formulas_with_errors)},
       {"array_formulas", count(m.array_formulas)},
       {"nested_if_count", count(m.nested_if_count)},
       {"max_nested_if_level", count(m.max_nested_if_level)},
       {"external_links", count(m.external_links)},
       {"pivot_tables", count(m.pivot_tables)},
       {"named_items", count(m.named_items)},
       {"hidden_rows", count(m.hidden_rows)},
       {"hidden_columns", count(m.hidden_columns)},
       {"hidden_sheets", count(m.hidden_sheets)},
       {"very_hidden_sheets", count(m.very_hidden_sheets)},
       {"password_protected", m.password_protected},
       {"workbook_size_bytes", m.workbook_size_bytes},
       {"invisible_cells", count(m.invisible_cells)},
       {"formula_count", count(m.formula_count)},
       {"vba_present", m.available ? json(m.vba_present) : json(nullptr)}};
}

void to_json(json& j, const ControlsFramework& c) { j = {{"present", c.present}, {"missing", c.missing}}; }

void to_json(json& j, const ScanReport& r) {
  j = {{"file", r.file},
       {"metrics", r.metrics},
       {"complexity", risk::value(r.complexity)},
       {"controls_framework", r.controls_framework}};
}

void to_json(json& j, const DiffEntry& e) {
  j = {{"sheet", e.sheet},
       {"address", e.address},
       {"kind", std::string(to_string(e.kind))},
       {"before", e.before},
       {"after", e.after}};
}

void to_json(json& j, const BaselineDiff& d) { j = {{"entries", d.entries}}; }

}  // namespace scanner

// ---------------------------------------------------------------------------

namespace inventory {

void to_json(json& j, const AssessmentRecord& a) { j = {{"input", a.input}, {"result", a.result}}; }

void from_json(const json& j, AssessmentRecord& a) {
  a.input = need(j, "input").get<risk::AssessmentInput>();
  a.result = need(j, "result").get<risk::AssessmentResult>();
}

void to_json(json& j, const LifecycleEvent& e) {
  j = {{"at", format_timestamp(e.at)}, {"status", std::string(to_string(e.status))}, {"reason", e.reason}};
}

void from_json(const json& j, LifecycleEvent& e) {
  e.at = as_timestamp(need(j, "at"), "at");
  e.status = lifecycle_from_string(as_string(need(j, "status"), "status"));
  e.reason = maybe(j, "reason") ? as_string(j.at("reason"), "reason") : std::string{};
}

void to_json(json& j, const EucaRecord& r) {
  j = {{"id", r.id},
       {"group_division", r.group_division},
       {"department", r.department},
       {"team", r.team},
       {"manager", r.manager},
       {"sme", r.sme},
       {"data_steward", r.data_steward},
       {"data_owner", r.data_owner},
       {"tester", r.tester},
       {"name", r.name},
       {"description", r.description},
       {"version", r.version},
       {"last_release_date", optional_date(r.last_release_date)},
       {"last_changed_date", optional_date(r.last_changed_date)},
       {"processes", r.processes},
       {"app_type", r.app_type},
       {"file_location", r.file_location},
       {"lifecycle_status", std::string(to_string(r.lifecycle_status))},
       {"decision_making", r.decision_making},
       {"key_data_items", r.key_data_items},
       {"latest_assessment", r.latest_assessment ? json(*r.latest_assessment) : json(nullptr)},
       {"assessment_history", r.assessment_history},
       {"next_review", optional_date(r.next_review)},
       {"risk_ids", r.risk_ids},
       {"disposition", std::string(to_string(r.disposition))},
       {"lifecycle_events", r.lifecycle_events},
       {"created_at", format_timestamp(r.created_at)},
       {"updated_at", format_timestamp(r.updated_at)}};
}

void from_json(const json& j, EucaRecord& r) {
  if (!j.is_object()) wrong_type("record", "an object");
  auto text = [&](std::string_view key, std::string& out) {
    if (auto v = maybe(j, key)) out = as_string(*v, key);
  };
  auto date = [&](std::string_view key, std::optional<Date>& out) {
    if (auto v = maybe(j, key)) out = as_date(*v, key);
  };
  auto list = [&](std::string_view key, std::vector<std::string>& out) {
    if (auto v = maybe(j, key)) out = as_strings(*v, key);
  };
  text("id", r.id);
  text("group_division", r.group_division);
  text("department", r.department);
  text("team", r.team);
  text("manager", r.manager);
  text("sme", r.sme);
  text("data_steward", r.data_steward);
  text("data_owner", r.data_owner);
  text("tester", r.tester);
  text("name", r.name);
  text("description", r.description);
  text("version", r.version);
  date("last_release_date", r.last_release_date);
  date("last_changed_date", r.last_changed_date);
  list("processes", r.processes);
  text("app_type", r.app_type);
  text("file_location", r.file_location);
  if (auto v = maybe(j, "lifecycle_status")) r.lifecycle_status = lifecycle_from_string(as_string(*v, "lifecycle_status"));
  if (auto v = maybe(j, "decision_making")) r.decision_making = as_bool(*v, "decision_making");
  list("key_data_items", r.key_data_items);
  if (auto v = maybe(j, "latest_assessment")) r.latest_assessment = v->get<AssessmentRecord>();
  if (auto v = maybe(j, "assessment_history")) {
    if (!v->is_array()) wrong_type("assessment_history", "an array");
    r.assessment_history = v->get<std::vector<AssessmentRecord>>();
  }
  date("next_review", r.next_review);
  list("risk_ids", r.risk_ids);
  if (auto v = maybe(j, "disposition")) r.disposition = disposition_from_string(as_string(*v, "disposition"));
  if (auto v = maybe(j, "lifecycle_events")) {
    if (!v->is_array()) wrong_type("lifecycle_events", "an array");
    r.lifecycle_events = v->get<std::vector<LifecycleEvent>>();
  }
  if (auto v = maybe(j, "created_at")) r.created_at = as_timestamp(*v, "created_at");
  if (auto v = maybe(j, "updated_at")) r.updated_at = as_timestamp(*v, "updated_at");
}

void to_json(json& j, const RiskRegisterEntry& e) {
  j = {{"risk_id", e.risk_id},
       {"euca_id", e.euca_id},
       {"description", e.description},
       {"inherent_likelihood", e.inherent_likelihood},
       {"inherent_severity", e.inherent_severity},
       {"residual_likelihood", e.residual_likelihood},
       {"residual_severity", e.residual_severity},
       {"inherent_score", e.inherent_score()},
       {"residual_score", e.residual_score()},
       {"opened", e.opened},
       {"closed", optional_date(e.closed)},
       {"status", std::string(to_string(e.status))}};
}

void from_json(const json& j, RiskRegisterEntry& e) {
  if (!j.is_object()) wrong_type("risk", "an object");
  if (auto v = maybe(j, "risk_id")) e.risk_id = as_string(*v, "risk_id");
  if (auto v = maybe(j, "euca_id")) e.euca_id = as_string(*v, "euca_id");
  if (auto v = maybe(j, "description")) e.description = as_string(*v, "description");
  e.inherent_likelihood = as_int(need(j, "inherent_likelihood"), "inherent_likelihood");
  e.inherent_severity = as_int(need(j, "inherent_severity"), "inherent_severity");
  e.residual_likelihood = as_int(need(j, "residual_likelihood"), "residual_likelihood");
  e.residual_severity = as_int(need(j, "residual_severity"), "residual_severity");
  e.opened = as_date(need(j, "opened"), "opened");
  e.closed.reset();
  if (auto v = maybe(j, "closed")) e.closed = as_date(*v, "closed");
  if (auto v = maybe(j, "status")) e.status = risk_status_from_string(as_string(*v, "status"));
}

void to_json(json& j, const StoreDocument& d) {
  json drafts = json::object();
  for (const auto& [key, draft] : d.drafts) drafts[key] = draft;
  j = {{"schema_version", d.schema_version},
       {"records", d.records},
       {"register", d.risk_register},
       {"drafts", drafts}};
}

void from_json(const json& j, StoreDocument& d) {
  d.schema_version = as_int(need(j, "schema_version"), "schema_version");
  d.records.clear();
  d.risk_register.clear();
  d.drafts.clear();
  if (auto v = maybe(j, "records")) {
    if (!v->is_array()) wrong_type("records", "an array");
    for (const auto& item : *v) d.records.push_back(item.get<EucaRecord>());
  }
  if (auto v = maybe(j, "register")) {
    if (!v->is_array()) wrong_type("register", "an array");
    for (const auto& item : *v) d.risk_register.push_back(item.get<RiskRegisterEntry>());
  }
  if (auto v = maybe(j, "drafts")) {
    if (!v->is_object()) wrong_type("drafts", "an object");
    for (const auto& [key, draft] : v->items()) d.drafts[key] = draft;
  }
}

}  // namespace inventory

// ---------------------------------------------------------------------------

namespace reporting {

void to_json(json& j, const KpiSnapshot& s) {
  json counts = json::object();
  json matrix = json::object();
  for (int b = 0; b < 4; ++b) {
    auto name = std::string(risk::to_string(static_cast<risk::RatingBand>(b)));
    counts[name] = s.band_counts[b];
    matrix[name] = s.band_impact_matrix[b];
  }
  j = {{"as_of", s.as_of},
       {"band_counts", counts},
       {"band_impact_matrix", matrix},
       {"department_histogram", s.department_histogram},
       {"total_assessed", s.total_assessed},
       {"overdue_count", s.overdue_count},
       {"unregistered_amber_red_count", s.unregistered_amber_red_count}};
}

void to_json(json& j, const Concentration& c) {
  json departments = json::array();
  for (const auto& d : c.departments) departments.push_back({{"department", d.department}, {"count", d.count}});
  j = {{"departments", departments},
       {"top_k", c.top_k},
       {"top_k_total", c.top_k_total},
       {"total", c.total},
       {"top_k_share", c.top_k_share}};
}

void to_json(json& j, const OverdueItem& o) { j = {{"record", o.record}, {"days_overdue", o.days_overdue}}; }

}  // namespace reporting

}  // namespace eucgov
