#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eucgov/inventory/record.hpp"

namespace eucgov::inventory {

struct EucaFilter {
  std::optional<std::string> department;
  std::optional<risk::RatingBand> band;  // of the latest assessment
  std::optional<Lifecycle> lifecycle;
  std::optional<Date> due_before;        // next_review strictly earlier

  bool matches(const EucaRecord& r) const;
};

/// Fixed CSV column order for inventory exchange.
const std::vector<std::string>& csv_columns();
/// A record projected onto csv_columns(); empty cells for unassessed fields.
std::vector<std::string> csv_row(const EucaRecord& record);

/// Operations over one StoreDocument. Every mutating call validates before it
/// touches the document, so a thrown Error leaves the document unchanged.
///
/// Not synchronized: callers serialize writers (the CLI is single-shot, the
/// service holds a lock and works on a copy).
class Inventory {
 public:
  using Clock = std::function<Timestamp()>;

  explicit Inventory(StoreDocument doc = {}, Clock clock = {});

  const StoreDocument& document() const { return doc_; }
  StoreDocument release() && { return std::move(doc_); }

  const EucaRecord& get(std::string_view id) const;
  const RiskRegisterEntry& get_risk(std::string_view risk_id) const;

  /// Creates (empty id) or updates metadata of an existing record. Store-owned
  /// fields (assessments, review date, risk links, lifecycle, timestamps) are
  /// never taken from the argument on update.
  /// Throws MissingField (name, department, manager) or UnknownId.
  EucaRecord upsert_euca(EucaRecord record);

  /// Attaches an assessment after recomputing it. Throws UnknownId or
  /// InconsistentResult.
  EucaRecord record_assessment(std::string_view id, const risk::AssessmentInput& input,
                               const risk::AssessmentResult& result);

  /// Annual review: next_review = confirmed_on + 1 year. Throws UnknownId or
  /// RetiredRecord.
  EucaRecord confirm_review(std::string_view id, Date confirmed_on);

  /// Idempotent. Reviving a retired record requires a reason (MissingField).
  EucaRecord set_lifecycle(std::string_view id, Lifecycle status, std::string reason);

  /// Throws UnknownId, ScaleViolation or ResidualExceedsInherent.
  RiskRegisterEntry link_risk(std::string_view euca_id, RiskRegisterEntry entry);

  /// Throws UnknownRisk, AlreadyClosed or DateOrder.
  RiskRegisterEntry close_risk(std::string_view risk_id, Date closed_on);

  /// Matching records ordered by department, then name, then id.
  std::vector<EucaRecord> list_eucas(const EucaFilter& filter = {}) const;

  void put_draft(const std::string& key, nlohmann::json draft);
  /// Throws UnknownDraft.
  const nlohmann::json& get_draft(const std::string& key) const;

  /// One header row plus one row per record, CRLF terminated.
  std::string export_csv() const;
  /// Upserts rows by id; all-or-nothing. Assessment, review and risk columns
  /// are read-only and must agree with the store (empty for new records).
  /// Returns the number of data rows. Throws SchemaMismatch or MalformedRow.
  std::size_t import_csv(std::string_view text);

 private:
  EucaRecord& find(std::string_view id);
  Timestamp next_timestamp(std::optional<Timestamp> after = std::nullopt);
  std::string mint_id(std::string_view prefix, std::size_t& counter,
                      const std::function<bool(const std::string&)>& taken);
  void import_row(const std::vector<std::string>& row, std::size_t line);

  StoreDocument doc_;
  Clock clock_;
  std::size_t next_euca_ = 1;
  std::size_t next_risk_ = 1;
};

/// Referential and register invariants; returns one message per violation.
std::vector<std::string> check_integrity(const StoreDocument& doc);

/// Reads a store file. A missing file yields an empty document; anything
/// unreadable throws Error{StoreUnreadable}.
StoreDocument load_store(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames over `path`.
void save_store(const std::filesystem::path& path, const StoreDocument& doc);

}  // namespace eucgov::inventory
