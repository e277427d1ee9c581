#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eucgov/date.hpp"

namespace eucgov::risk {

enum class ComplexityGrade { Low = 1, Medium = 2, High = 3 };
enum class MaterialityGrade { Low = 1, Medium = 2, High = 3 };

/// Worst outcome should the application fail; totally ordered 1..6.
enum class ImpactCategory {
  Inconvenient = 1,
  PoorCustomerOutcomes = 2,
  Reputational = 3,
  LossOfBusiness = 4,
  Financial = 5,
  StatutoryLegislative = 6,
};

/// Ordered Blue < Green < Amber < Red.
///   Blue  - no action
///   Green - no action beyond accountability for results
///   Amber - action plan needed
///   Red   - urgent action, within a month or before the application is next
///           run if later
enum class RatingBand { Blue = 0, Green = 1, Amber = 2, Red = 3 };

inline int rank(RatingBand b) { return static_cast<int>(b); }
inline int value(ComplexityGrade g) { return static_cast<int>(g); }
inline int value(MaterialityGrade g) { return static_cast<int>(g); }
inline int value(ImpactCategory i) { return static_cast<int>(i); }

std::string_view to_string(RatingBand band);
/// Throws Error{InvalidInput} on an unknown token.
RatingBand band_from_string(std::string_view token);
std::string_view to_string(ImpactCategory impact);

/// Throw Error{OutOfRange} naming `field` when the integer is out of range.
ComplexityGrade complexity_from_int(int v, std::string_view field = "complexity");
MaterialityGrade materiality_from_int(int v, std::string_view field = "materiality");
ImpactCategory impact_from_int(int v, std::string_view field = "impact");

/// Yes/no control questions; `true` means the control is in place.
struct ControlAnswers {
  // Accessibility
  bool location_known = false;
  bool operating_instructions = false;
  // Business continuity
  bool backup_in_place = false;
  bool recovery_tested = false;
  // Version control, review and testing
  bool version_controlled = false;
  bool review_current = false;
  bool testing_evidenced = false;
  // Security, privacy and integrity
  bool access_restricted = false;
  bool integrity_protected = false;
  // Ability to fix
  bool second_person_can_fix = false;
  bool technical_docs_exist = false;
  // Data flags: informational, not controls.
  bool holds_personal_data = false;
  bool holds_sensitive_personal_data = false;

  bool operator==(const ControlAnswers&) const = default;

  static ControlAnswers all_in_place();
};

struct ControlField {
  std::string_view name;
  bool ControlAnswers::*member;
  bool is_control;  // false for the two data flags
};

inline constexpr std::size_t kControlCount = 11;

/// All thirteen flags in questionnaire order (controls first).
const std::array<ControlField, 13>& control_fields();

struct AssessmentInput {
  ComplexityGrade complexity = ComplexityGrade::Low;
  MaterialityGrade materiality = MaterialityGrade::Low;
  ImpactCategory impact = ImpactCategory::Inconvenient;
  ControlAnswers controls;
  Date assessed_on;

  bool operator==(const AssessmentInput&) const = default;
};

struct AssessmentResult {
  double deficiency = 0.0;  // failed controls / 11
  int control_depth = 1;    // cube layer K
  int risk_score = 1;       // C * M * K
  RatingBand band = RatingBand::Blue;
  bool dlc_required = false;
  bool escalated_for_data = false;
  bool clamped_by_impact = false;
  std::vector<std::string> reasons;  // failed control names, questionnaire order
  Date next_review;

  bool operator==(const AssessmentResult&) const = default;
};

struct ControlDepth {
  int failures = 0;
  double deficiency = 0.0;
  int depth = 1;
};

/// d = failures/11; K = 1 below a third, 2 below two thirds, else 3.
ControlDepth control_depth(const ControlAnswers& controls);

/// R = C * M * K, always in [1, 27].
int risk_score(ComplexityGrade c, MaterialityGrade m, int depth);

/// Blue <= 2, Green 3..6, Amber 7..12, Red >= 13.
RatingBand base_band(int score);

struct BandDecision {
  RatingBand band = RatingBand::Blue;
  bool escalated_for_data = false;
  bool clamped_by_impact = false;
};

/// Base band, then one-step escalation for sensitive personal data with broken
/// security, then the impact ceiling (Inconvenient caps at Green, Poor Customer
/// Outcomes / Reputational cap at Amber).
BandDecision band_rules(int score, ImpactCategory impact, const ControlAnswers& controls);

/// Band ceiling imposed by an impact category.
RatingBand impact_ceiling(ImpactCategory impact);

/// Development life cycle applies when complexity + materiality >= 5.
inline bool dlc_required(ComplexityGrade c, MaterialityGrade m) { return value(c) + value(m) >= 5; }

AssessmentResult assess(const AssessmentInput& input);

/// Copy of `input` with each named flag flipped (a name listed twice flips
/// back). Throws Error{UnknownField}.
AssessmentInput toggle(const AssessmentInput& input, std::span<const std::string> fields);

/// assess(toggle(input, fields)).
AssessmentResult what_if(const AssessmentInput& input, std::span<const std::string> fields);

}  // namespace eucgov::risk
