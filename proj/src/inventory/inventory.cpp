#include "eucgov/inventory/inventory.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <set>

#include "eucgov/csv.hpp"
#include "eucgov/error.hpp"

namespace eucgov::inventory {

// ---------------------------------------------------------------------------
// Tokens

namespace {

constexpr std::array<std::string_view, 2> kLifecycleTokens{"live", "retired"};
constexpr std::array<std::string_view, 4> kDispositionTokens{"none", "mitigate", "remove", "accept"};
constexpr std::array<std::string_view, 2> kRiskStatusTokens{"open", "closed"};

template <typename E, std::size_t N>
E from_token(const std::array<std::string_view, N>& names, std::string_view token, std::string_view field) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == token) return static_cast<E>(i);
  }
  throw Error(ErrorCode::InvalidInput, "unknown " + std::string(field) + " '" + std::string(token) + "'",
              std::string(field));
}

}  // namespace

std::string_view to_string(Lifecycle l) { return kLifecycleTokens.at(static_cast<std::size_t>(l)); }
std::string_view to_string(Disposition d) { return kDispositionTokens.at(static_cast<std::size_t>(d)); }
std::string_view to_string(RiskStatus s) { return kRiskStatusTokens.at(static_cast<std::size_t>(s)); }

Lifecycle lifecycle_from_string(std::string_view t) { return from_token<Lifecycle>(kLifecycleTokens, t, "lifecycle_status"); }
Disposition disposition_from_string(std::string_view t) {
  return from_token<Disposition>(kDispositionTokens, t, "disposition");
}
RiskStatus risk_status_from_string(std::string_view t) { return from_token<RiskStatus>(kRiskStatusTokens, t, "status"); }

// ---------------------------------------------------------------------------
// Filter

bool EucaFilter::matches(const EucaRecord& r) const {
  if (department && r.department != *department) return false;
  if (lifecycle && r.lifecycle_status != *lifecycle) return false;
  if (band && r.band() != band) return false;
  if (due_before && !(r.next_review && *r.next_review < *due_before)) return false;
  return true;
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> columns{
      "id",          "name",        "department", "team",   "manager",    "sme",          "data_owner",
      "app_type",    "file_location", "lifecycle_status", "complexity", "materiality", "impact",
      "band",        "risk_score",  "dlc_required", "next_review", "risk_ids", "disposition"};
  return columns;
}

// ---------------------------------------------------------------------------
// Inventory

namespace {

constexpr std::string_view kEucaPrefix = "EUC-";
constexpr std::string_view kRiskPrefix = "RSK-";

std::size_t next_counter(const std::vector<std::string>& ids, std::string_view prefix) {
  std::size_t highest = 0;
  for (const auto& id : ids) {
    if (!id.starts_with(prefix)) continue;
    std::size_t n = 0;
    auto first = id.data() + prefix.size();
    auto last = id.data() + id.size();
    auto [ptr, ec] = std::from_chars(first, last, n);
    if (ec == std::errc{} && ptr == last) highest = std::max(highest, n);
  }
  return highest + 1;
}

void require_text(const std::string& value, std::string_view field) {
  if (value.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(ErrorCode::MissingField, std::string(field) + " is required", std::string(field));
  }
}

void require_scale(int v, std::string_view field) {
  if (v < 1 || v > 5) {
    throw Error(ErrorCode::ScaleViolation, std::string(field) + " must be 1..5, got " + std::to_string(v),
                std::string(field));
  }
}

// Metadata the caller may edit; everything else belongs to the store.
void copy_metadata(const EucaRecord& from, EucaRecord& to) {
  to.group_division = from.group_division;
  to.department = from.department;
  to.team = from.team;
  to.manager = from.manager;
  to.sme = from.sme;
  to.data_steward = from.data_steward;
  to.data_owner = from.data_owner;
  to.tester = from.tester;
  to.name = from.name;
  to.description = from.description;
  to.version = from.version;
  to.last_release_date = from.last_release_date;
  to.last_changed_date = from.last_changed_date;
  to.processes = from.processes;
  to.app_type = from.app_type;
  to.file_location = from.file_location;
  to.decision_making = from.decision_making;
  to.key_data_items = from.key_data_items;
  to.disposition = from.disposition;
}

Timestamp system_now() {
  return std::chrono::floor<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

}  // namespace

Inventory::Inventory(StoreDocument doc, Clock clock) : doc_(std::move(doc)), clock_(std::move(clock)) {
  if (!clock_) clock_ = system_now;
  std::vector<std::string> ids;
  for (const auto& r : doc_.records) ids.push_back(r.id);
  next_euca_ = next_counter(ids, kEucaPrefix);
  ids.clear();
  for (const auto& e : doc_.risk_register) ids.push_back(e.risk_id);
  next_risk_ = next_counter(ids, kRiskPrefix);
}

const EucaRecord& Inventory::get(std::string_view id) const {
  for (const auto& r : doc_.records) {
    if (r.id == id) return r;
  }
  throw Error(ErrorCode::UnknownId, "unknown EUCA id '" + std::string(id) + "'", "id");
}

EucaRecord& Inventory::find(std::string_view id) { return const_cast<EucaRecord&>(std::as_const(*this).get(id)); }

const RiskRegisterEntry& Inventory::get_risk(std::string_view risk_id) const {
  for (const auto& e : doc_.risk_register) {
    if (e.risk_id == risk_id) return e;
  }
  throw Error(ErrorCode::UnknownRisk, "unknown risk id '" + std::string(risk_id) + "'", "risk_id");
}

Timestamp Inventory::next_timestamp(std::optional<Timestamp> after) {
  auto t = clock_();
  if (after && t <= *after) t = *after + std::chrono::milliseconds{1};
  return t;
}

std::string Inventory::mint_id(std::string_view prefix, std::size_t& counter,
                               const std::function<bool(const std::string&)>& taken) {
  for (;;) {
    auto digits = std::to_string(counter++);
    std::string id = std::string(prefix) + std::string(digits.size() < 6 ? 6 - digits.size() : 0, '0') + digits;
    if (!taken(id)) return id;
  }
}

EucaRecord Inventory::upsert_euca(EucaRecord record) {
  require_text(record.name, "name");
  require_text(record.department, "department");
  require_text(record.manager, "manager");

  if (!record.id.empty()) {
    EucaRecord& existing = find(record.id);
    EucaRecord updated = existing;
    copy_metadata(record, updated);
    updated.updated_at = next_timestamp(existing.updated_at);
    existing = std::move(updated);
    return existing;
  }

  EucaRecord created;
  copy_metadata(record, created);
  created.id = mint_id(kEucaPrefix, next_euca_, [this](const std::string& id) {
    return std::any_of(doc_.records.begin(), doc_.records.end(), [&](const EucaRecord& r) { return r.id == id; });
  });
  created.lifecycle_status = Lifecycle::Live;
  created.created_at = next_timestamp();
  created.updated_at = created.created_at;
  doc_.records.push_back(created);
  return created;
}

EucaRecord Inventory::record_assessment(std::string_view id, const risk::AssessmentInput& input,
                                        const risk::AssessmentResult& result) {
  EucaRecord& record = find(id);
  if (risk::assess(input) != result) {
    throw Error(ErrorCode::InconsistentResult,
                "assessment result for '" + std::string(id) + "' does not match recomputation from its input");
  }
  AssessmentRecord entry{input, result};
  record.assessment_history.push_back(entry);
  record.latest_assessment = std::move(entry);
  record.next_review = result.next_review;
  record.updated_at = next_timestamp(record.updated_at);
  return record;
}

EucaRecord Inventory::confirm_review(std::string_view id, Date confirmed_on) {
  EucaRecord& record = find(id);
  if (record.lifecycle_status == Lifecycle::Retired) {
    throw Error(ErrorCode::RetiredRecord, "EUCA '" + std::string(id) + "' is retired");
  }
  auto due = confirmed_on.plus_one_year();
  if (record.next_review != due) {
    record.next_review = due;
    record.updated_at = next_timestamp(record.updated_at);
  }
  return record;
}

EucaRecord Inventory::set_lifecycle(std::string_view id, Lifecycle status, std::string reason) {
  EucaRecord& record = find(id);
  if (record.lifecycle_status == status) return record;
  if (status == Lifecycle::Live) require_text(reason, "reason");
  auto now = next_timestamp(record.updated_at);
  record.lifecycle_status = status;
  record.lifecycle_events.push_back({now, status, std::move(reason)});
  record.updated_at = now;
  return record;
}

RiskRegisterEntry Inventory::link_risk(std::string_view euca_id, RiskRegisterEntry entry) {
  EucaRecord& record = find(euca_id);
  require_scale(entry.inherent_likelihood, "inherent_likelihood");
  require_scale(entry.inherent_severity, "inherent_severity");
  require_scale(entry.residual_likelihood, "residual_likelihood");
  require_scale(entry.residual_severity, "residual_severity");
  if (entry.residual_score() > entry.inherent_score()) {
    throw Error(ErrorCode::ResidualExceedsInherent,
                "residual score " + std::to_string(entry.residual_score()) + " exceeds inherent score " +
                    std::to_string(entry.inherent_score()));
  }
  entry.risk_id = mint_id(kRiskPrefix, next_risk_, [this](const std::string& id) {
    return std::any_of(doc_.risk_register.begin(), doc_.risk_register.end(),
                       [&](const RiskRegisterEntry& e) { return e.risk_id == id; });
  });
  entry.euca_id = record.id;
  entry.status = RiskStatus::Open;
  entry.closed.reset();
  doc_.risk_register.push_back(entry);
  record.risk_ids.push_back(entry.risk_id);
  record.updated_at = next_timestamp(record.updated_at);
  return entry;
}

RiskRegisterEntry Inventory::close_risk(std::string_view risk_id, Date closed_on) {
  auto& entry = const_cast<RiskRegisterEntry&>(get_risk(risk_id));
  if (entry.status == RiskStatus::Closed) {
    throw Error(ErrorCode::AlreadyClosed, "risk '" + std::string(risk_id) + "' is already closed");
  }
  if (closed_on < entry.opened) {
    throw Error(ErrorCode::DateOrder,
                "closing date " + closed_on.to_string() + " precedes opening date " + entry.opened.to_string(),
                "closed_on");
  }
  entry.status = RiskStatus::Closed;
  entry.closed = closed_on;
  return entry;
}

std::vector<EucaRecord> Inventory::list_eucas(const EucaFilter& filter) const {
  std::vector<EucaRecord> out;
  for (const auto& r : doc_.records) {
    if (filter.matches(r)) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const EucaRecord& a, const EucaRecord& b) {
    return std::tie(a.department, a.name, a.id) < std::tie(b.department, b.name, b.id);
  });
  return out;
}

void Inventory::put_draft(const std::string& key, nlohmann::json draft) {
  require_text(key, "key");
  if (!draft.is_object()) throw Error(ErrorCode::InvalidInput, "draft must be a JSON object", "draft");
  doc_.drafts[key] = std::move(draft);
}

const nlohmann::json& Inventory::get_draft(const std::string& key) const {
  auto it = doc_.drafts.find(key);
  if (it == doc_.drafts.end()) throw Error(ErrorCode::UnknownDraft, "no draft named '" + key + "'", "key");
  return it->second;
}

// ---------------------------------------------------------------------------
// CSV exchange

namespace {

enum Column : std::size_t {
  kId, kName, kDepartment, kTeam, kManager, kSme, kDataOwner, kAppType, kFileLocation, kLifecycle,
  kComplexity, kMateriality, kImpact, kBand, kRiskScore, kDlc, kNextReview, kRiskIds, kDisposition,
  kColumnCount
};

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out.push_back(sep);
    out += items[i];
  }
  return out;
}

csv::Row project(const EucaRecord& r) {
  csv::Row row(kColumnCount);
  row[kId] = r.id;
  row[kName] = r.name;
  row[kDepartment] = r.department;
  row[kTeam] = r.team;
  row[kManager] = r.manager;
  row[kSme] = r.sme;
  row[kDataOwner] = r.data_owner;
  row[kAppType] = r.app_type;
  row[kFileLocation] = r.file_location;
  row[kLifecycle] = to_string(r.lifecycle_status);
  if (r.latest_assessment) {
    const auto& in = r.latest_assessment->input;
    const auto& res = r.latest_assessment->result;
    row[kComplexity] = std::to_string(risk::value(in.complexity));
    row[kMateriality] = std::to_string(risk::value(in.materiality));
    row[kImpact] = std::to_string(risk::value(in.impact));
    row[kBand] = risk::to_string(res.band);
    row[kRiskScore] = std::to_string(res.risk_score);
    row[kDlc] = res.dlc_required ? "true" : "false";
  }
  if (r.next_review) row[kNextReview] = r.next_review->to_string();
  row[kRiskIds] = join(r.risk_ids, ';');
  row[kDisposition] = to_string(r.disposition);
  return row;
}

[[noreturn]] void malformed(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::MalformedRow, "row at line " + std::to_string(line) + ": " + what);
}

// Validates a read-only column's syntax so bad tokens are reported as such
// rather than as a mismatch.
void check_token(std::size_t col, const std::string& v, std::size_t line) {
  if (v.empty()) return;
  auto int_in = [&](int lo, int hi) {
    int n = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec != std::errc{} || ptr != v.data() + v.size() || n < lo || n > hi) {
      malformed(line, csv_columns()[col] + " must be " + std::to_string(lo) + ".." + std::to_string(hi) +
                          ", got '" + v + "'");
    }
  };
  switch (col) {
    case kComplexity:
    case kMateriality: int_in(1, 3); break;
    case kImpact: int_in(1, 6); break;
    case kRiskScore: int_in(1, 27); break;
    case kBand:
      try {
        risk::band_from_string(v);
      } catch (const Error&) {
        malformed(line, "unknown band token '" + v + "'");
      }
      break;
    case kDlc:
      if (v != "true" && v != "false") malformed(line, "dlc_required must be true or false, got '" + v + "'");
      break;
    case kNextReview:
      if (!Date::try_parse(v)) malformed(line, "next_review must be YYYY-MM-DD, got '" + v + "'");
      break;
    default: break;
  }
}

}  // namespace

std::vector<std::string> csv_row(const EucaRecord& record) { return project(record); }

std::string Inventory::export_csv() const {
  std::string out = csv::format_row(csv_columns());
  for (const auto& r : list_eucas()) out += csv::format_row(project(r));
  return out;
}

void Inventory::import_row(const std::vector<std::string>& row, std::size_t line) {
  if (row.size() != kColumnCount) {
    malformed(line, "expected " + std::to_string(kColumnCount) + " fields, got " + std::to_string(row.size()));
  }
  for (std::size_t c = kComplexity; c <= kNextReview; ++c) check_token(c, row[c], line);

  Lifecycle lifecycle{};
  Disposition disposition{};
  try {
    lifecycle = lifecycle_from_string(row[kLifecycle]);
    disposition = disposition_from_string(row[kDisposition].empty() ? "none" : row[kDisposition]);
  } catch (const Error& e) {
    malformed(line, e.what());
  }

  EucaRecord incoming;
  incoming.id = row[kId];
  incoming.name = row[kName];
  incoming.department = row[kDepartment];
  incoming.team = row[kTeam];
  incoming.manager = row[kManager];
  incoming.sme = row[kSme];
  incoming.data_owner = row[kDataOwner];
  incoming.app_type = row[kAppType];
  incoming.file_location = row[kFileLocation];
  incoming.disposition = disposition;

  auto existing = std::find_if(doc_.records.begin(), doc_.records.end(),
                               [&](const EucaRecord& r) { return !incoming.id.empty() && r.id == incoming.id; });
  try {
    if (existing == doc_.records.end()) {
      for (std::size_t c = kComplexity; c <= kRiskIds; ++c) {
        if (!row[c].empty()) malformed(line, "new record cannot set read-only column " + csv_columns()[c]);
      }
      std::string wanted_id = incoming.id;
      incoming.id.clear();
      auto created = upsert_euca(std::move(incoming));
      EucaRecord& stored = find(created.id);
      if (!wanted_id.empty()) stored.id = wanted_id;
      if (lifecycle == Lifecycle::Retired) set_lifecycle(stored.id, lifecycle, "csv import");
      return;
    }

    auto current = project(*existing);
    for (std::size_t c = kComplexity; c <= kRiskIds; ++c) {
      if (row[c] != current[c]) {
        malformed(line, "column " + csv_columns()[c] + " is read-only ('" + row[c] + "' vs stored '" +
                            current[c] + "')");
      }
    }
    EucaRecord merged = *existing;
    copy_metadata(incoming, merged);
    // Only the columns carried by the CSV may change.
    merged.group_division = existing->group_division;
    merged.data_steward = existing->data_steward;
    merged.tester = existing->tester;
    merged.description = existing->description;
    merged.version = existing->version;
    merged.last_release_date = existing->last_release_date;
    merged.last_changed_date = existing->last_changed_date;
    merged.processes = existing->processes;
    merged.decision_making = existing->decision_making;
    merged.key_data_items = existing->key_data_items;
    if (!(merged == *existing)) upsert_euca(std::move(merged));
    if (lifecycle != existing->lifecycle_status) set_lifecycle(row[kId], lifecycle, "csv import");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedRow) throw;
    malformed(line, e.what());
  }
}

std::size_t Inventory::import_csv(std::string_view text) {
  auto rows = csv::parse(text);
  if (rows.empty() || rows.front().fields != csv_columns()) {
    throw Error(ErrorCode::SchemaMismatch,
                "header must be: " + join(csv_columns(), ','));
  }

  StoreDocument backup = doc_;
  auto counters = std::pair{next_euca_, next_risk_};
  std::set<std::string> seen;
  std::size_t count = 0;
  try {
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& r = rows[i];
      if (r.fields.size() == 1 && r.fields[0].empty()) continue;  // blank line
      if (!r.fields.empty() && !r.fields[0].empty() && !seen.insert(r.fields[0]).second) {
        malformed(r.line, "duplicate id '" + r.fields[0] + "'");
      }
      import_row(r.fields, r.line);
      ++count;
    }
  } catch (...) {
    doc_ = std::move(backup);
    std::tie(next_euca_, next_risk_) = counters;
    throw;
  }
  return count;
}

// ---------------------------------------------------------------------------
// Integrity

std::vector<std::string> check_integrity(const StoreDocument& doc) {
  std::vector<std::string> problems;
  std::map<std::string, const EucaRecord*> records;
  std::map<std::string, const RiskRegisterEntry*> risks;
  for (const auto& r : doc.records) {
    if (r.id.empty()) problems.push_back("record with empty id");
    if (!records.emplace(r.id, &r).second) problems.push_back("duplicate record id " + r.id);
  }
  for (const auto& e : doc.risk_register) {
    if (!risks.emplace(e.risk_id, &e).second) problems.push_back("duplicate risk id " + e.risk_id);
  }

  for (const auto& r : doc.records) {
    for (const auto& rid : r.risk_ids) {
      auto it = risks.find(rid);
      if (it == risks.end()) {
        problems.push_back(r.id + " links unknown risk " + rid);
      } else if (it->second->euca_id != r.id) {
        problems.push_back(r.id + " links risk " + rid + " owned by " + it->second->euca_id);
      }
    }
    if (r.latest_assessment.has_value() != !r.assessment_history.empty() ||
        (r.latest_assessment && !(*r.latest_assessment == r.assessment_history.back()))) {
      problems.push_back(r.id + " latest assessment disagrees with its history");
    }
    if (r.latest_assessment && risk::assess(r.latest_assessment->input) != r.latest_assessment->result) {
      problems.push_back(r.id + " latest assessment does not match recomputation");
    }
  }

  for (const auto& e : doc.risk_register) {
    auto owner = records.find(e.euca_id);
    if (owner == records.end()) {
      problems.push_back(e.risk_id + " references unknown EUCA " + e.euca_id);
    } else {
      const auto& ids = owner->second->risk_ids;
      if (std::find(ids.begin(), ids.end(), e.risk_id) == ids.end()) {
        problems.push_back(e.risk_id + " is not listed on " + e.euca_id);
      }
    }
    for (int v : {e.inherent_likelihood, e.inherent_severity, e.residual_likelihood, e.residual_severity}) {
      if (v < 1 || v > 5) problems.push_back(e.risk_id + " has a scale value outside 1..5");
    }
    if (e.residual_score() > e.inherent_score()) problems.push_back(e.risk_id + " residual exceeds inherent");
    if ((e.status == RiskStatus::Closed) != e.closed.has_value()) {
      problems.push_back(e.risk_id + " status and closing date disagree");
    }
    if (e.closed && *e.closed < e.opened) problems.push_back(e.risk_id + " closed before it opened");
  }
  return problems;
}

}  // namespace eucgov::inventory
