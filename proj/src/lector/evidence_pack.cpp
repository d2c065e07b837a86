#include "plp/lector/evidence_pack.hpp"

#include "plp/common/error.hpp"

namespace plp::lector {

using nlohmann::json;

namespace {

constexpr const char* kTypeNames[] = {
    "INDICATION", "CONTRAINDICATION", "DOSING",
    "INTERACTION", "ADVERSE_REACTION", "WARNING",
    "PRECAUTION", "SPECIAL_POPULATION", "NORMATIVE_SILENCE",
};

constexpr const char* kStateNames[] = {"draft", "under_review", "accepted", "rejected"};

json optional_string(const std::optional<std::string>& s) {
  return s ? json(*s) : json(nullptr);
}

std::optional<std::string> read_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

}  // namespace

std::string to_string(AssertionType t) { return kTypeNames[static_cast<int>(t)]; }

std::optional<AssertionType> assertion_type_from_string(std::string_view s) {
  for (auto t : kAssertionTypes) {
    if (s == kTypeNames[static_cast<int>(t)]) return t;
  }
  return std::nullopt;
}

std::string to_string(PackState s) { return kStateNames[static_cast<int>(s)]; }

std::optional<PackState> pack_state_from_string(std::string_view s) {
  for (auto st : kPackStates) {
    if (s == kStateNames[static_cast<int>(st)]) return st;
  }
  return std::nullopt;
}

std::string to_string(Verdict v) { return v == Verdict::Accept ? "accept" : "reject"; }

Verdict verdict_from_string(std::string_view s) {
  if (s == "accept") return Verdict::Accept;
  if (s == "reject") return Verdict::Reject;
  throw Error(ErrorCode::InvalidArgument, "verdict must be 'accept' or 'reject'");
}

json to_json(const ProvenanceChainEntry& e) {
  return json{{"doc_id", e.doc_id},
              {"version_label", e.version_label},
              {"checksum", e.checksum},
              {"node_ids", json(std::vector<std::string>(e.node_ids.begin(), e.node_ids.end()))}};
}

json to_json(const EpistemicLimits& l) {
  return json{{"divergences", l.divergences},
              {"gaps", l.gaps},
              {"dependencies", l.dependencies},
              {"silences", l.silences}};
}

namespace {

json question_json(const QualifiedQuestion& q) {
  return json{{"text", q.text}, {"assertion_type", to_string(q.assertion_type)}};
}

json response_json(const GroundedResponse& r) {
  return json{{"assertion", r.assertion},
              {"validity_conditions", r.validity_conditions},
              {"invalidity_conditions", r.invalidity_conditions}};
}

json provenance_json(const std::vector<ProvenanceChainEntry>& p) {
  json out = json::array();
  for (const auto& e : p) out.push_back(to_json(e));
  return out;
}

}  // namespace

json to_json(const EvidencePack& pack) {
  return json{{"pack_id", pack.pack_id},
              {"question", question_json(pack.question)},
              {"response", response_json(pack.response)},
              {"provenance", provenance_json(pack.provenance)},
              {"limits", to_json(pack.limits)},
              {"status",
               {{"state", to_string(pack.status.state)},
                {"curator", optional_string(pack.status.curator)},
                {"justification", optional_string(pack.status.justification)},
                {"decided_at", optional_string(pack.status.decided_at)}}},
              {"focus", pack.focus},
              {"derived_from", optional_string(pack.derived_from)}};
}

json to_json(const PackInput& input) {
  json j{{"question", question_json(input.question)},
         {"response", response_json(input.response)},
         {"provenance", provenance_json(input.provenance)},
         {"focus", input.focus}};
  if (input.limits) j["limits"] = to_json(*input.limits);
  return j;
}

json to_json(const CuratorialDecision& d) {
  return json{{"decision_id", d.decision_id},
              {"pack_id", d.pack_id},
              {"verdict", to_string(d.verdict)},
              {"curator", d.curator},
              {"justification", d.justification},
              {"timestamp", d.timestamp}};
}

EvidencePack pack_from_json(const json& j) {
  try {
    EvidencePack p;
    p.pack_id = j.at("pack_id").get<std::string>();
    const auto& q = j.at("question");
    p.question.text = q.at("text").get<std::string>();
    auto type = assertion_type_from_string(q.at("assertion_type").get<std::string>());
    if (!type) throw Error(ErrorCode::InvalidArgument, "assertion type outside taxonomy");
    p.question.assertion_type = *type;
    const auto& r = j.at("response");
    p.response.assertion = r.at("assertion").get<std::string>();
    p.response.validity_conditions = r.at("validity_conditions").get<std::vector<std::string>>();
    p.response.invalidity_conditions =
        r.at("invalidity_conditions").get<std::vector<std::string>>();
    for (const auto& e : j.at("provenance")) {
      auto nodes = e.at("node_ids").get<std::vector<std::string>>();
      p.provenance.push_back(ProvenanceChainEntry{
          e.at("doc_id").get<std::string>(), e.at("version_label").get<std::string>(),
          e.at("checksum").get<std::string>(), {nodes.begin(), nodes.end()}});
    }
    const auto& l = j.at("limits");
    p.limits = EpistemicLimits{l.at("divergences").get<std::vector<std::string>>(),
                               l.at("gaps").get<std::vector<std::string>>(),
                               l.at("dependencies").get<std::vector<std::string>>(),
                               l.at("silences").get<std::vector<std::string>>()};
    const auto& s = j.at("status");
    auto state = pack_state_from_string(s.at("state").get<std::string>());
    if (!state) throw Error(ErrorCode::InvalidArgument, "unknown curatorial state");
    p.status.state = *state;
    p.status.curator = read_optional(s, "curator");
    p.status.justification = read_optional(s, "justification");
    p.status.decided_at = read_optional(s, "decided_at");
    p.focus = j.at("focus").get<std::string>();
    p.derived_from = read_optional(j, "derived_from");
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed evidence pack: ") + e.what());
  }
}

CuratorialDecision decision_from_json(const json& j) {
  return CuratorialDecision{j.at("decision_id").get<std::string>(),
                            j.at("pack_id").get<std::string>(),
                            verdict_from_string(j.at("verdict").get<std::string>()),
                            j.at("curator").get<std::string>(),
                            j.at("justification").get<std::string>(),
                            j.at("timestamp").get<std::string>()};
}

std::string canonical_text(const EvidencePack& pack) { return to_json(pack).dump(); }

}  // namespace plp::lector
