#pragma once

// lector/evidence_pack.hpp: the Evidence Pack tuple <Q, R, P, L, C>.
//
// Canonical serialization is JSON with sorted keys (nlohmann's default object
// ordering) and sorted node id sets. The same document form is what the
// well-formedness validator inspects, so a pack read from disk or from a
// request body can be checked even when it is not representable as a typed
// EvidencePack (unknown assertion type, missing limits).

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace plp::lector {

enum class AssertionType {
  Indication,
  Contraindication,
  Dosing,
  Interaction,
  AdverseReaction,
  Warning,
  Precaution,
  SpecialPopulation,
  NormativeSilence,
};

inline constexpr std::array<AssertionType, 9> kAssertionTypes = {
    AssertionType::Indication,      AssertionType::Contraindication,
    AssertionType::Dosing,          AssertionType::Interaction,
    AssertionType::AdverseReaction, AssertionType::Warning,
    AssertionType::Precaution,      AssertionType::SpecialPopulation,
    AssertionType::NormativeSilence,
};

std::string to_string(AssertionType t);
std::optional<AssertionType> assertion_type_from_string(std::string_view s);

struct QualifiedQuestion {
  std::string text;
  AssertionType assertion_type = AssertionType::Indication;
};

struct GroundedResponse {
  std::string assertion;
  std::vector<std::string> validity_conditions;
  std::vector<std::string> invalidity_conditions;
};

struct ProvenanceChainEntry {
  std::string doc_id;
  std::string version_label;
  std::string checksum;
  std::set<std::string> node_ids;
};

struct EpistemicLimits {
  std::vector<std::string> divergences;
  std::vector<std::string> gaps;
  std::vector<std::string> dependencies;
  std::vector<std::string> silences;
};

enum class PackState { Draft, UnderReview, Accepted, Rejected };

inline constexpr std::array<PackState, 4> kPackStates = {
    PackState::Draft, PackState::UnderReview, PackState::Accepted, PackState::Rejected};

std::string to_string(PackState s);
std::optional<PackState> pack_state_from_string(std::string_view s);

inline bool is_terminal(PackState s) {
  return s == PackState::Accepted || s == PackState::Rejected;
}

struct CuratorialStatus {
  PackState state = PackState::Draft;
  std::optional<std::string> curator;
  std::optional<std::string> justification;
  std::optional<std::string> decided_at;
};

struct EvidencePack {
  std::string pack_id;
  QualifiedQuestion question;
  GroundedResponse response;
  std::vector<ProvenanceChainEntry> provenance;
  EpistemicLimits limits;
  CuratorialStatus status;
  std::string focus;
  std::optional<std::string> derived_from;
};

// Inputs shared by create_pack and derive_pack. `limits` is optional so an
// omitted L can be expressed and rejected (condition 5).
struct PackInput {
  QualifiedQuestion question;
  GroundedResponse response;
  std::vector<ProvenanceChainEntry> provenance;
  std::optional<EpistemicLimits> limits;
  std::string focus;
};

enum class Verdict { Accept, Reject };

std::string to_string(Verdict v);
Verdict verdict_from_string(std::string_view s);

struct CuratorialDecision {
  std::string decision_id;
  std::string pack_id;
  Verdict verdict = Verdict::Accept;
  std::string curator;
  std::string justification;
  std::string timestamp;
};

nlohmann::json to_json(const ProvenanceChainEntry& e);
nlohmann::json to_json(const EpistemicLimits& l);
nlohmann::json to_json(const EvidencePack& pack);
nlohmann::json to_json(const PackInput& input);
nlohmann::json to_json(const CuratorialDecision& d);

// Parses a pack document that has already passed validation.
EvidencePack pack_from_json(const nlohmann::json& j);
CuratorialDecision decision_from_json(const nlohmann::json& j);

// Stable canonical text: sorted keys, no insignificant whitespace.
std::string canonical_text(const EvidencePack& pack);

}  // namespace plp::lector
