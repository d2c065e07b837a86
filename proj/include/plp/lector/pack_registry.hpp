#pragma once

// Evidence Pack registry: construction, the curatorial lifecycle and
// derivation. Lifecycle is strictly forward:
//
//   draft -> under_review -> accepted | rejected
//
// Terminal packs are frozen; the only follow-up is derive_pack, which creates
// a fresh draft with derived_from set. A revision request is expressed as
// reject + derive.
//
// Persistence: packs.jsonl holds a full pack snapshot per change (last one
// wins on replay), decisions.jsonl the curatorial decisions. Both are
// append-only.

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "plp/common/clock.hpp"
#include "plp/common/files.hpp"
#include "plp/lector/evidence_pack.hpp"
#include "plp/lector/well_formed.hpp"

namespace plp::patos {
class DocumentStore;
}

namespace plp::lector {

bool is_legal_transition(PackState from, PackState to);

// Assertion text recorded by normative-silence packs.
inline constexpr const char* kNoPronouncement = "No regulatory pronouncement identified";

class PackRegistry {
 public:
  // Empty `dir` keeps everything in memory.
  explicit PackRegistry(std::filesystem::path dir, Clock clock = system_clock());

  PackRegistry(const PackRegistry&) = delete;
  PackRegistry& operator=(const PackRegistry&) = delete;

  // Throws StructuralViolation (detail.conditions lists ids) when any of
  // conditions 1, 2, 4, 5 fails. `requested_id` is honoured for bulk loads
  // and must not collide with an existing pack.
  EvidencePack create_pack(const PackInput& input,
                           std::optional<std::string> requested_id = std::nullopt);
  EvidencePack create_pack(const nlohmann::json& input,
                           std::optional<std::string> requested_id = std::nullopt);

  EvidencePack submit_for_review(const std::string& pack_id);
  std::pair<EvidencePack, CuratorialDecision> curate(const std::string& pack_id, Verdict verdict,
                                                     const std::string& curator,
                                                     const std::string& justification);
  // Dispatches to submit_for_review / curate; every other pair is illegal.
  EvidencePack transition(const std::string& pack_id, PackState target,
                          const std::string& curator = {}, const std::string& justification = {});

  EvidencePack derive_pack(const std::string& source_pack_id, const PackInput& input);
  EvidencePack derive_pack(const std::string& source_pack_id, const nlohmann::json& input);

  EvidencePack record_normative_silence(const std::string& question_text, const std::string& focus,
                                        const std::vector<ProvenanceChainEntry>& sections_reviewed,
                                        const EpistemicLimits& limits);

  ValidationReport validate(const std::string& pack_id, const patos::DocumentStore* store) const;

  std::optional<EvidencePack> find(const std::string& pack_id) const;
  EvidencePack get(const std::string& pack_id) const;
  std::vector<EvidencePack> all_packs() const;
  std::vector<EvidencePack> packs_in_state(PackState state) const;
  std::vector<CuratorialDecision> decisions() const;
  std::vector<CuratorialDecision> decisions_for(const std::string& pack_id) const;
  // derived_from links from `pack_id` back to the original pack.
  std::vector<std::string> lineage_of(const std::string& pack_id) const;

 private:
  EvidencePack create_locked(const nlohmann::json& input, std::optional<std::string> requested_id,
                             std::optional<std::string> derived_from);
  std::string next_pack_id() const;
  void persist_pack(const EvidencePack& pack);

  Clock clock_;
  RecordLog pack_log_;
  RecordLog decision_log_;

  mutable std::mutex mutex_;
  std::map<std::string, EvidencePack> packs_;
  std::vector<CuratorialDecision> decisions_;
};

}  // namespace plp::lector
