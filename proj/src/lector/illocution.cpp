#include "plp/lector/illocution.hpp"

namespace plp::lector {

std::string to_string(IllocutionaryClass c) {
  switch (c) {
    case IllocutionaryClass::Assertive: return "assertive";
    case IllocutionaryClass::Directive: return "directive";
    case IllocutionaryClass::AssertiveDirective: return "assertive+directive";
    case IllocutionaryClass::DirectiveAssertive: return "directive+assertive";
    case IllocutionaryClass::NonCommitment: return "non-commitment";
  }
  return "non-commitment";
}

IllocutionaryClass illocutionary_class(AssertionType t) {
  switch (t) {
    case AssertionType::Indication: return IllocutionaryClass::Assertive;
    case AssertionType::Contraindication: return IllocutionaryClass::Directive;
    case AssertionType::Dosing: return IllocutionaryClass::DirectiveAssertive;
    case AssertionType::Interaction: return IllocutionaryClass::AssertiveDirective;
    case AssertionType::AdverseReaction: return IllocutionaryClass::Assertive;
    case AssertionType::Warning: return IllocutionaryClass::Directive;
    case AssertionType::Precaution: return IllocutionaryClass::Directive;
    case AssertionType::SpecialPopulation: return IllocutionaryClass::AssertiveDirective;
    case AssertionType::NormativeSilence: return IllocutionaryClass::NonCommitment;
  }
  return IllocutionaryClass::NonCommitment;
}

std::optional<IllocutionaryClass> illocutionary_class(std::string_view assertion_type) {
  auto t = assertion_type_from_string(assertion_type);
  if (!t) return std::nullopt;
  return illocutionary_class(*t);
}

std::string illocutionary_force(AssertionType t) {
  switch (t) {
    case AssertionType::Indication: return "Commits to truth of therapeutic applicability";
    case AssertionType::Contraindication: return "Instructs the professional to avoid";
    case AssertionType::Dosing: return "Prescribes conduct with factual basis";
    case AssertionType::Interaction: return "States a fact and warns about consequences";
    case AssertionType::AdverseReaction: return "Reports observed or documented effects";
    case AssertionType::Warning: return "Urges caution under specified conditions";
    case AssertionType::Precaution: return "Recommends monitoring or adjusted use";
    case AssertionType::SpecialPopulation: return "Qualifies applicability to a subgroup";
    case AssertionType::NormativeSilence: return "Signals absence of regulatory pronouncement";
  }
  return {};
}

}  // namespace plp::lector
