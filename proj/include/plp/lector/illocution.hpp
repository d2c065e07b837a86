#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "plp/lector/evidence_pack.hpp"

namespace plp::lector {

enum class IllocutionaryClass {
  Assertive,
  Directive,
  AssertiveDirective,
  DirectiveAssertive,
  NonCommitment,
};

// "assertive", "directive", "assertive+directive", "directive+assertive",
// "non-commitment"
std::string to_string(IllocutionaryClass c);

IllocutionaryClass illocutionary_class(AssertionType t);

// Total over the nine taxonomy names, nullopt for anything else.
std::optional<IllocutionaryClass> illocutionary_class(std::string_view assertion_type);

// One-line description of the communicative force of the type.
std::string illocutionary_force(AssertionType t);

}  // namespace plp::lector
