#pragma once

#include <string>
#include <string_view>

#include "eucgov/risk/model.hpp"

namespace eucgov::risk {

/// Departmental quick-assessment template: one row per department, scored on
/// the process with the most complex or most material calculations.
struct TriageSubmission {
  std::string department;
  int has_euc = 0;  // 1 yes, 0 no
  std::string process;
  int materiality = 1;
  int complexity = 1;
  // Confidence scores, 1 (bad) to 3 (good); decimals allowed.
  double fix_knowledge = 3.0;
  double staffing_resilience = 3.0;
  double recovery = 3.0;
  double version_control = 3.0;
  double misuse_protection = 3.0;
  int gdpr = 0;  // handles personal / sensitive personal data

  bool operator==(const TriageSubmission&) const = default;
};

struct TriageResult {
  RatingBand band = RatingBand::Green;  // never Blue
  std::string message;
  bool operator==(const TriageResult&) const = default;
};

/// The fixed message returned to a department for Green, Amber or Red.
std::string_view triage_message(RatingBand band);

/// Mean confidence a maps to depth 1 (a >= 2.5), 2 (a >= 1.75) or 3; score
/// C*M*depth is Green <= 6, Amber 7..12, Red >= 13; GDPR data with any
/// confidence below 2 escalates one band. No EUCs at all is Green.
/// Throws Error{OutOfRange} for grades outside 1..3 or scores outside [1, 3].
TriageResult triage(const TriageSubmission& sub);

}  // namespace eucgov::risk
