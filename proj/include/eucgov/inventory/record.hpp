#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "eucgov/date.hpp"
#include "eucgov/risk/model.hpp"

namespace eucgov::inventory {

enum class Lifecycle { Live, Retired };
/// Risk treatment chosen for the application.
enum class Disposition { None, Mitigate, Remove, Accept };
enum class RiskStatus { Open, Closed };

std::string_view to_string(Lifecycle l);
std::string_view to_string(Disposition d);
std::string_view to_string(RiskStatus s);
Lifecycle lifecycle_from_string(std::string_view token);
Disposition disposition_from_string(std::string_view token);
RiskStatus risk_status_from_string(std::string_view token);

struct AssessmentRecord {
  risk::AssessmentInput input;
  risk::AssessmentResult result;
  bool operator==(const AssessmentRecord&) const = default;
};

struct LifecycleEvent {
  Timestamp at;
  Lifecycle status = Lifecycle::Live;
  std::string reason;
  bool operator==(const LifecycleEvent&) const = default;
};

/// One End User Computing application in the inventory.
struct EucaRecord {
  std::string id;

  // People
  std::string group_division;
  std::string department;
  std::string team;
  std::string manager;
  std::string sme;
  std::string data_steward;
  std::string data_owner;
  std::string tester;

  // Application
  std::string name;
  std::string description;
  std::string version;
  std::optional<Date> last_release_date;
  std::optional<Date> last_changed_date;
  std::vector<std::string> processes;
  std::string app_type;
  std::string file_location;
  Lifecycle lifecycle_status = Lifecycle::Live;
  bool decision_making = false;
  std::vector<std::string> key_data_items;

  // Governance state, maintained by the store.
  std::optional<AssessmentRecord> latest_assessment;
  std::vector<AssessmentRecord> assessment_history;  // append-only, latest last
  std::optional<Date> next_review;
  std::vector<std::string> risk_ids;
  Disposition disposition = Disposition::None;
  std::vector<LifecycleEvent> lifecycle_events;
  Timestamp created_at;
  Timestamp updated_at;

  bool operator==(const EucaRecord&) const = default;

  std::optional<risk::RatingBand> band() const {
    if (!latest_assessment) return std::nullopt;
    return latest_assessment->result.band;
  }
};

/// Likelihood x severity entry on the operational risk register, each on 1..5.
struct RiskRegisterEntry {
  std::string risk_id;
  std::string euca_id;
  std::string description;
  int inherent_likelihood = 1;
  int inherent_severity = 1;
  int residual_likelihood = 1;
  int residual_severity = 1;
  Date opened;
  std::optional<Date> closed;
  RiskStatus status = RiskStatus::Open;

  int inherent_score() const { return inherent_likelihood * inherent_severity; }
  int residual_score() const { return residual_likelihood * residual_severity; }
  bool operator==(const RiskRegisterEntry&) const = default;
};

inline constexpr int kSchemaVersion = 1;

struct StoreDocument {
  int schema_version = kSchemaVersion;
  std::vector<EucaRecord> records;
  std::vector<RiskRegisterEntry> risk_register;
  /// Partially completed questionnaires keyed by caller-chosen name.
  std::map<std::string, nlohmann::json> drafts;

  bool operator==(const StoreDocument&) const = default;
};

}  // namespace eucgov::inventory
