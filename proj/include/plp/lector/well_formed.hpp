#pragma once

// Well-formedness of Evidence Packs. Six numbered conditions:
//   1 typed question         assertion type is in the taxonomy
//   2 source anchoring       at least one provenance record
//   3 integrity verifiable   every (doc, version, hash) matches the store
//   4 node traceability      every provenance record names >= 1 node
//   5 epistemic completeness all four limit lists explicitly present
//   6 curatorial closure     accepted/rejected packs carry curator and
//                            justification
// Validation never throws; it reports.

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace plp::patos {
class DocumentStore;
}

namespace plp::lector {

struct Finding {
  int condition = 0;
  std::string message;
};

struct ValidationReport {
  std::set<int> violations;
  // Conditions that could not be evaluated (3 without store access).
  std::set<int> unverifiable;
  // Shape problems outside the six conditions (missing question text, ...).
  std::vector<std::string> malformed;
  std::vector<Finding> findings;

  bool no_violations() const { return violations.empty() && malformed.empty(); }
  bool well_formed() const { return no_violations() && unverifiable.empty(); }

  nlohmann::json to_json() const;
};

// All six conditions. Pass nullptr to skip store access; condition 3 is then
// marked unverifiable instead of passed or failed.
ValidationReport validate_well_formed(const nlohmann::json& pack,
                                      const patos::DocumentStore* store);

// Conditions 1, 2, 4 and 5 plus shape, for pack construction.
ValidationReport validate_structure(const nlohmann::json& pack);

}  // namespace plp::lector
