#include "eucgov/risk/model.hpp"

#include <algorithm>

#include "eucgov/error.hpp"

namespace eucgov::risk {

namespace {

constexpr std::array<std::string_view, 4> kBandNames{"Blue", "Green", "Amber", "Red"};

constexpr std::array<std::string_view, 6> kImpactNames{
    "Inconvenient", "Poor Customer Outcomes", "Reputational", "Loss of Business", "Financial",
    "Statutory / Legislative"};

RatingBand step_up(RatingBand b) {
  return b == RatingBand::Red ? RatingBand::Red : static_cast<RatingBand>(rank(b) + 1);
}

int checked(int v, int lo, int hi, std::string_view field) {
  if (v < lo || v > hi) {
    throw Error(ErrorCode::OutOfRange,
                std::string(field) + " must be " + std::to_string(lo) + ".." + std::to_string(hi) + ", got " +
                    std::to_string(v),
                std::string(field));
  }
  return v;
}

}  // namespace

std::string_view to_string(RatingBand band) { return kBandNames.at(static_cast<std::size_t>(rank(band))); }

RatingBand band_from_string(std::string_view token) {
  for (std::size_t i = 0; i < kBandNames.size(); ++i) {
    if (kBandNames[i] == token) return static_cast<RatingBand>(i);
  }
  throw Error(ErrorCode::InvalidInput, "unknown band '" + std::string(token) + "'", "band");
}

std::string_view to_string(ImpactCategory impact) {
  return kImpactNames.at(static_cast<std::size_t>(value(impact) - 1));
}

ComplexityGrade complexity_from_int(int v, std::string_view field) {
  return static_cast<ComplexityGrade>(checked(v, 1, 3, field));
}

MaterialityGrade materiality_from_int(int v, std::string_view field) {
  return static_cast<MaterialityGrade>(checked(v, 1, 3, field));
}

ImpactCategory impact_from_int(int v, std::string_view field) {
  return static_cast<ImpactCategory>(checked(v, 1, 6, field));
}

ControlAnswers ControlAnswers::all_in_place() {
  ControlAnswers a;
  for (const auto& f : control_fields()) {
    if (f.is_control) a.*f.member = true;
  }
  return a;
}

const std::array<ControlField, 13>& control_fields() {
  static const std::array<ControlField, 13> fields{{
      {"location_known", &ControlAnswers::location_known, true},
      {"operating_instructions", &ControlAnswers::operating_instructions, true},
      {"backup_in_place", &ControlAnswers::backup_in_place, true},
      {"recovery_tested", &ControlAnswers::recovery_tested, true},
      {"version_controlled", &ControlAnswers::version_controlled, true},
      {"review_current", &ControlAnswers::review_current, true},
      {"testing_evidenced", &ControlAnswers::testing_evidenced, true},
      {"access_restricted", &ControlAnswers::access_restricted, true},
      {"integrity_protected", &ControlAnswers::integrity_protected, true},
      {"second_person_can_fix", &ControlAnswers::second_person_can_fix, true},
      {"technical_docs_exist", &ControlAnswers::technical_docs_exist, true},
      {"holds_personal_data", &ControlAnswers::holds_personal_data, false},
      {"holds_sensitive_personal_data", &ControlAnswers::holds_sensitive_personal_data, false},
  }};
  return fields;
}

ControlDepth control_depth(const ControlAnswers& controls) {
  ControlDepth out;
  for (const auto& f : control_fields()) {
    if (f.is_control && !(controls.*f.member)) ++out.failures;
  }
  constexpr int n = static_cast<int>(kControlCount);
  out.deficiency = static_cast<double>(out.failures) / n;
  // Exact thirds: d < 1/3  <=>  3 * failures < n.
  if (3 * out.failures < n) {
    out.depth = 1;
  } else if (3 * out.failures < 2 * n) {
    out.depth = 2;
  } else {
    out.depth = 3;
  }
  return out;
}

int risk_score(ComplexityGrade c, MaterialityGrade m, int depth) {
  checked(depth, 1, 3, "control_depth");
  return value(c) * value(m) * depth;
}

RatingBand base_band(int score) {
  if (score <= 2) return RatingBand::Blue;
  if (score <= 6) return RatingBand::Green;
  if (score <= 12) return RatingBand::Amber;
  return RatingBand::Red;
}

RatingBand impact_ceiling(ImpactCategory impact) {
  switch (impact) {
    case ImpactCategory::Inconvenient: return RatingBand::Green;
    case ImpactCategory::PoorCustomerOutcomes:
    case ImpactCategory::Reputational: return RatingBand::Amber;
    default: return RatingBand::Red;
  }
}

BandDecision band_rules(int score, ImpactCategory impact, const ControlAnswers& controls) {
  checked(score, 1, 27, "risk_score");
  BandDecision out;
  out.band = base_band(score);
  if (controls.holds_sensitive_personal_data && (!controls.access_restricted || !controls.integrity_protected)) {
    auto raised = step_up(out.band);
    out.escalated_for_data = raised != out.band;
    out.band = raised;
  }
  auto ceiling = impact_ceiling(impact);
  if (rank(out.band) > rank(ceiling)) {
    out.band = ceiling;
    out.clamped_by_impact = true;
  }
  return out;
}

AssessmentResult assess(const AssessmentInput& input) {
  AssessmentResult r;
  auto depth = control_depth(input.controls);
  r.deficiency = depth.deficiency;
  r.control_depth = depth.depth;
  r.risk_score = risk_score(input.complexity, input.materiality, depth.depth);
  auto decision = band_rules(r.risk_score, input.impact, input.controls);
  r.band = decision.band;
  r.escalated_for_data = decision.escalated_for_data;
  r.clamped_by_impact = decision.clamped_by_impact;
  r.dlc_required = dlc_required(input.complexity, input.materiality);
  for (const auto& f : control_fields()) {
    if (f.is_control && !(input.controls.*f.member)) r.reasons.emplace_back(f.name);
  }
  r.next_review = input.assessed_on.plus_one_year();
  return r;
}

AssessmentInput toggle(const AssessmentInput& input, std::span<const std::string> fields) {
  AssessmentInput out = input;
  const auto& known = control_fields();
  for (const auto& name : fields) {
    auto it = std::find_if(known.begin(), known.end(), [&](const ControlField& f) { return f.name == name; });
    if (it == known.end()) {
      throw Error(ErrorCode::UnknownField, "unknown control field '" + name + "'", name);
    }
    out.controls.*(it->member) = !(out.controls.*(it->member));
  }
  return out;
}

AssessmentResult what_if(const AssessmentInput& input, std::span<const std::string> fields) {
  return assess(toggle(input, fields));
}

}  // namespace eucgov::risk
