#include "eucgov/risk/triage.hpp"

#include <array>
#include <cmath>
#include <utility>

#include "eucgov/error.hpp"

namespace eucgov::risk {

namespace {

constexpr std::string_view kGreen =
    "You are Green. Please return this spreadsheet to Data Governance - no further action needed, however "
    "you are accountable for the results which you have returned. Any incidents as a direct result of "
    "spreadsheet errors that impact on a material process will need to be reported to Data Governance "
    "urgently.";
constexpr std::string_view kAmber =
    "You are Amber. Action is needed. Return this spreadsheet to Data Governance. Your spreadsheets and "
    "applications need to be assessed, errant ones recorded on Magique and there needs to be an action plan "
    "to fix.";
constexpr std::string_view kRed =
    "You are Red. Urgent action is needed. Return this spreadsheet to Data Governance. Your spreadsheets and "
    "applications need to be assessed, errant ones recorded on Magique and there needs to be an urgent action "
    "plan to fix.";

void require_flag(int v, std::string_view field) {
  if (v != 0 && v != 1) {
    throw Error(ErrorCode::OutOfRange, std::string(field) + " must be 0 or 1, got " + std::to_string(v),
                std::string(field));
  }
}

}  // namespace

std::string_view triage_message(RatingBand band) {
  switch (band) {
    case RatingBand::Blue:
    case RatingBand::Green: return kGreen;
    case RatingBand::Amber: return kAmber;
    case RatingBand::Red: return kRed;
  }
  return kGreen;
}

TriageResult triage(const TriageSubmission& sub) {
  require_flag(sub.has_euc, "has_euc");
  if (sub.has_euc == 0) return {RatingBand::Green, std::string(kGreen)};

  require_flag(sub.gdpr, "gdpr");
  auto c = complexity_from_int(sub.complexity);
  auto m = materiality_from_int(sub.materiality);

  const std::array<std::pair<std::string_view, double>, 5> scores{{
      {"fix_knowledge", sub.fix_knowledge},
      {"staffing_resilience", sub.staffing_resilience},
      {"recovery", sub.recovery},
      {"version_control", sub.version_control},
      {"misuse_protection", sub.misuse_protection},
  }};
  double sum = 0.0;
  bool any_low = false;
  for (auto [name, s] : scores) {
    if (!std::isfinite(s) || s < 1.0 || s > 3.0) {
      throw Error(ErrorCode::OutOfRange, std::string(name) + " must be within [1, 3], got " + std::to_string(s),
                  std::string(name));
    }
    sum += s;
    any_low = any_low || s < 2.0;
  }
  // Compare the sum rather than the mean: 5 * 2.5 and 5 * 1.75 are exact.
  int depth = sum >= 12.5 ? 1 : (sum >= 8.75 ? 2 : 3);
  int score = value(c) * value(m) * depth;

  RatingBand band = score <= 6 ? RatingBand::Green : (score <= 12 ? RatingBand::Amber : RatingBand::Red);
  if (sub.gdpr == 1 && any_low && band != RatingBand::Red) band = static_cast<RatingBand>(rank(band) + 1);
  return {band, std::string(triage_message(band))};
}

}  // namespace eucgov::risk
