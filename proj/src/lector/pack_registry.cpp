#include "plp/lector/pack_registry.hpp"

#include <algorithm>
#include <cstdio>
#include <regex>

#include "plp/common/error.hpp"
#include "plp/patos/document_store.hpp"

namespace plp::lector {

using nlohmann::json;

namespace {

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

int pack_number(const std::string& pack_id) {
  static const std::regex pattern(R"(^EP-(\d{3,})$)");
  std::smatch m;
  if (!std::regex_match(pack_id, m, pattern)) return -1;
  return std::stoi(m[1]);
}

std::string format_id(const char* prefix, std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%0*zu", prefix, width, n);
  return buf;
}

}  // namespace

bool is_legal_transition(PackState from, PackState to) {
  return (from == PackState::Draft && to == PackState::UnderReview) ||
         (from == PackState::UnderReview && to == PackState::Accepted) ||
         (from == PackState::UnderReview && to == PackState::Rejected);
}

PackRegistry::PackRegistry(std::filesystem::path dir, Clock clock) : clock_(std::move(clock)) {
  if (dir.empty()) return;
  pack_log_.open(dir / "packs.jsonl");
  decision_log_.open(dir / "decisions.jsonl");
  for (const auto& rec : pack_log_.read_all()) {
    auto pack = pack_from_json(rec.at("pack"));
    packs_[pack.pack_id] = std::move(pack);
  }
  for (const auto& rec : decision_log_.read_all()) decisions_.push_back(decision_from_json(rec));
}

void PackRegistry::persist_pack(const EvidencePack& pack) {
  pack_log_.append(json{{"pack", to_json(pack)}});
}

std::string PackRegistry::next_pack_id() const {
  int max_seen = 0;
  for (const auto& [id, pack] : packs_) max_seen = std::max(max_seen, pack_number(id));
  return format_id("EP", static_cast<std::size_t>(max_seen + 1), 3);
}

EvidencePack PackRegistry::create_locked(const json& input, std::optional<std::string> requested_id,
                                         std::optional<std::string> derived_from) {
  json candidate = input;
  if (!candidate.is_object()) {
    throw Error(ErrorCode::StructuralViolation, "pack input must be an object",
                json{{"conditions", json::array()}});
  }
  candidate.erase("status");
  candidate.erase("pack_id");
  candidate.erase("derived_from");
  if (!candidate.contains("focus")) candidate["focus"] = "";

  auto report = validate_structure(candidate);
  if (!report.no_violations()) {
    std::string msg = "structural violation";
    for (int c : report.violations) msg += " " + std::to_string(c);
    throw Error(ErrorCode::StructuralViolation, msg,
                json{{"conditions", report.violations},
                     {"malformed", report.malformed},
                     {"report", report.to_json()}});
  }

  std::string id;
  if (requested_id) {
    if (pack_number(*requested_id) < 0) {
      throw Error(ErrorCode::InvalidArgument, "pack id must look like EP-001");
    }
    if (packs_.contains(*requested_id)) {
      throw Error(ErrorCode::InvalidArgument, "pack id " + *requested_id + " already exists");
    }
    id = *requested_id;
  } else {
    id = next_pack_id();
  }

  candidate["pack_id"] = id;
  candidate["status"] = json{{"state", "draft"},
                             {"curator", nullptr},
                             {"justification", nullptr},
                             {"decided_at", nullptr}};
  candidate["derived_from"] = derived_from ? json(*derived_from) : json(nullptr);
  auto pack = pack_from_json(candidate);
  persist_pack(pack);
  packs_[id] = pack;
  return pack;
}

EvidencePack PackRegistry::create_pack(const PackInput& input,
                                       std::optional<std::string> requested_id) {
  return create_pack(to_json(input), std::move(requested_id));
}

EvidencePack PackRegistry::create_pack(const json& input, std::optional<std::string> requested_id) {
  std::lock_guard lock(mutex_);
  return create_locked(input, std::move(requested_id), std::nullopt);
}

EvidencePack PackRegistry::submit_for_review(const std::string& pack_id) {
  std::lock_guard lock(mutex_);
  auto it = packs_.find(pack_id);
  if (it == packs_.end()) throw Error(ErrorCode::UnknownPack, "unknown pack " + pack_id);
  auto& pack = it->second;
  if (!is_legal_transition(pack.status.state, PackState::UnderReview)) {
    throw Error(ErrorCode::IllegalTransition,
                pack_id + ": " + to_string(pack.status.state) + " -> under_review is not allowed",
                json{{"from", to_string(pack.status.state)}, {"to", "under_review"}});
  }
  auto updated = pack;
  updated.status.state = PackState::UnderReview;
  persist_pack(updated);
  pack = updated;
  return pack;
}

std::pair<EvidencePack, CuratorialDecision> PackRegistry::curate(const std::string& pack_id,
                                                                 Verdict verdict,
                                                                 const std::string& curator,
                                                                 const std::string& justification) {
  std::lock_guard lock(mutex_);
  auto it = packs_.find(pack_id);
  if (it == packs_.end()) throw Error(ErrorCode::UnknownPack, "unknown pack " + pack_id);
  auto& pack = it->second;
  const auto target = verdict == Verdict::Accept ? PackState::Accepted : PackState::Rejected;
  if (!is_legal_transition(pack.status.state, target)) {
    throw Error(ErrorCode::IllegalTransition,
                pack_id + ": " + to_string(pack.status.state) + " -> " + to_string(target) +
                    " is not allowed",
                json{{"from", to_string(pack.status.state)}, {"to", to_string(target)}});
  }
  if (blank(curator)) throw Error(ErrorCode::MissingCurator, "curator identity is required");
  if (blank(justification)) {
    throw Error(ErrorCode::MissingJustification, "a documented justification is required");
  }

  CuratorialDecision decision{format_id("CD", decisions_.size() + 1, 4), pack_id, verdict, curator,
                              justification, clock_()};
  auto updated = pack;
  updated.status = CuratorialStatus{target, curator, justification, decision.timestamp};
  decision_log_.append(to_json(decision));
  persist_pack(updated);
  decisions_.push_back(decision);
  pack = updated;
  return {pack, decision};
}

EvidencePack PackRegistry::transition(const std::string& pack_id, PackState target,
                                      const std::string& curator,
                                      const std::string& justification) {
  auto current = get(pack_id).status.state;
  if (!is_legal_transition(current, target)) {
    throw Error(ErrorCode::IllegalTransition,
                pack_id + ": " + to_string(current) + " -> " + to_string(target) +
                    " is not allowed",
                json{{"from", to_string(current)}, {"to", to_string(target)}});
  }
  if (target == PackState::UnderReview) return submit_for_review(pack_id);
  return curate(pack_id, target == PackState::Accepted ? Verdict::Accept : Verdict::Reject,
                curator, justification)
      .first;
}

EvidencePack PackRegistry::derive_pack(const std::string& source_pack_id, const PackInput& input) {
  return derive_pack(source_pack_id, to_json(input));
}

EvidencePack PackRegistry::derive_pack(const std::string& source_pack_id, const json& input) {
  std::lock_guard lock(mutex_);
  if (!packs_.contains(source_pack_id)) {
    throw Error(ErrorCode::UnknownPack, "unknown pack " + source_pack_id);
  }
  return create_locked(input, std::nullopt, source_pack_id);
}

EvidencePack PackRegistry::record_normative_silence(
    const std::string& question_text, const std::string& focus,
    const std::vector<ProvenanceChainEntry>& sections_reviewed, const EpistemicLimits& limits) {
  if (limits.silences.empty()) {
    throw Error(ErrorCode::MissingSilenceEntry, "epistemic limits record no silence");
  }
  if (std::find(limits.silences.begin(), limits.silences.end(), question_text) ==
      limits.silences.end()) {
    throw Error(ErrorCode::MissingSilenceEntry,
                "the silenced question must appear among the recorded silences");
  }
  PackInput input{{question_text, AssertionType::NormativeSilence},
                  {kNoPronouncement, {}, {}},
                  sections_reviewed,
                  limits,
                  focus};
  return create_pack(input);
}

ValidationReport PackRegistry::validate(const std::string& pack_id,
                                        const patos::DocumentStore* store) const {
  return validate_well_formed(to_json(get(pack_id)), store);
}

std::optional<EvidencePack> PackRegistry::find(const std::string& pack_id) const {
  std::lock_guard lock(mutex_);
  auto it = packs_.find(pack_id);
  if (it == packs_.end()) return std::nullopt;
  return it->second;
}

EvidencePack PackRegistry::get(const std::string& pack_id) const {
  auto p = find(pack_id);
  if (!p) throw Error(ErrorCode::UnknownPack, "unknown pack " + pack_id);
  return *p;
}

std::vector<EvidencePack> PackRegistry::all_packs() const {
  std::lock_guard lock(mutex_);
  std::vector<EvidencePack> out;
  for (const auto& [id, p] : packs_) out.push_back(p);
  return out;
}

std::vector<EvidencePack> PackRegistry::packs_in_state(PackState state) const {
  std::vector<EvidencePack> out;
  for (auto& p : all_packs()) {
    if (p.status.state == state) out.push_back(std::move(p));
  }
  return out;
}

std::vector<CuratorialDecision> PackRegistry::decisions() const {
  std::lock_guard lock(mutex_);
  return decisions_;
}

std::vector<CuratorialDecision> PackRegistry::decisions_for(const std::string& pack_id) const {
  std::lock_guard lock(mutex_);
  std::vector<CuratorialDecision> out;
  for (const auto& d : decisions_) {
    if (d.pack_id == pack_id) out.push_back(d);
  }
  return out;
}

std::vector<std::string> PackRegistry::lineage_of(const std::string& pack_id) const {
  std::vector<std::string> chain{pack_id};
  auto current = get(pack_id);
  while (current.derived_from) {
    chain.push_back(*current.derived_from);
    current = get(*current.derived_from);
  }
  return chain;
}

}  // namespace plp::lector
