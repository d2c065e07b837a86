#include <doctest.h>

#include "lector_fixtures.hpp"
#include "plp/lector/illocution.hpp"
#include "plp/lector/pack_registry.hpp"
#include "plp/lector/well_formed.hpp"
#include "test_support.hpp"

using namespace plp;
using namespace plp::lector;
using namespace plp::testing;
using nlohmann::json;

TEST_CASE("illocutionary typing follows the table row for row") {
  CHECK(to_string(illocutionary_class(AssertionType::Indication)) == "assertive");
  CHECK(to_string(illocutionary_class(AssertionType::Contraindication)) == "directive");
  CHECK(to_string(illocutionary_class(AssertionType::Dosing)) == "directive+assertive");
  CHECK(to_string(illocutionary_class(AssertionType::Interaction)) == "assertive+directive");
  CHECK(to_string(illocutionary_class(AssertionType::AdverseReaction)) == "assertive");
  CHECK(to_string(illocutionary_class(AssertionType::Warning)) == "directive");
  CHECK(to_string(illocutionary_class(AssertionType::Precaution)) == "directive");
  CHECK(to_string(illocutionary_class(AssertionType::SpecialPopulation)) ==
        "assertive+directive");
  CHECK(to_string(illocutionary_class(AssertionType::NormativeSilence)) == "non-commitment");

  CHECK(illocutionary_force(AssertionType::Indication) ==
        "Commits to truth of therapeutic applicability");
  CHECK(illocutionary_force(AssertionType::NormativeSilence) ==
        "Signals absence of regulatory pronouncement");

  for (auto t : kAssertionTypes) {
    CHECK(illocutionary_class(to_string(t)).has_value());
  }
  CHECK_FALSE(illocutionary_class("OFF_LABEL").has_value());
  CHECK_FALSE(illocutionary_class("indication").has_value());
}

TEST_CASE("create_pack yields a draft and enforces structure") {
  TempDir dir;
  patos::DocumentStore store(dir.path() / "patos");
  PackRegistry registry(dir.path() / "lector");
  auto ref = ingest_insert(store);

  auto pack = registry.create_pack(indication_input(ref));
  CHECK(pack.pack_id == "EP-001");
  CHECK(pack.status.state == PackState::Draft);
  CHECK_FALSE(pack.status.curator.has_value());
  CHECK(registry.create_pack(indication_input(ref)).pack_id == "EP-002");

  SUBCASE("empty node set") {
    auto in = indication_input(ref);
    in.provenance[0].node_ids.clear();
    auto err = error_of([&] { registry.create_pack(in); });
    CHECK(err.code() == ErrorCode::StructuralViolation);
    CHECK(err.detail()["conditions"] == json::array({4}));
  }
  SUBCASE("limits omitted") {
    auto in = indication_input(ref);
    in.limits.reset();
    auto err = error_of([&] { registry.create_pack(in); });
    CHECK(err.code() == ErrorCode::StructuralViolation);
    CHECK(err.detail()["conditions"] == json::array({5}));
  }
  SUBCASE("one limits list missing from the serialized form") {
    auto j = to_json(indication_input(ref));
    j["limits"].erase("silences");
    auto err = error_of([&] { registry.create_pack(j); });
    CHECK(err.detail()["conditions"] == json::array({5}));
  }
  SUBCASE("type outside the taxonomy") {
    auto j = to_json(indication_input(ref));
    j["question"]["assertion_type"] = "OFF_LABEL";
    auto err = error_of([&] { registry.create_pack(j); });
    CHECK(err.detail()["conditions"] == json::array({1}));
  }
  SUBCASE("empty provenance") {
    auto in = indication_input(ref);
    in.provenance.clear();
    auto err = error_of([&] { registry.create_pack(in); });
    CHECK(err.detail()["conditions"] == json::array({2}));
  }
}

TEST_CASE("requested ids are kept and allocation continues after them") {
  TempDir dir;
  patos::DocumentStore store(dir.path() / "patos");
  PackRegistry registry(dir.path() / "lector");
  auto ref = ingest_insert(store);
  registry.create_pack(indication_input(ref), "EP-039");
  CHECK(registry.create_pack(indication_input(ref)).pack_id == "EP-040");
  CHECK(error_code_of([&] { registry.create_pack(indication_input(ref), "EP-039"); }) ==
        ErrorCode::InvalidArgument);
  CHECK(error_code_of([&] { registry.create_pack(indication_input(ref), "PACK-1"); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("validate_well_formed on the EP-001 shape") {
  TempDir dir;
  patos::DocumentStore store(dir.path() / "patos");
  PackRegistry registry(dir.path() / "lector");
  auto ref = ingest_insert(store);
  auto pack = registry.create_pack(indication_input(ref), "EP-001");
  registry.submit_for_review(pack.pack_id);
  registry.curate(pack.pack_id, Verdict::Accept, "curator-01",
                  "Indication matches node 1.1 verbatim");
  pack = registry.get("EP-001");

  auto report = validate_well_formed(to_json(pack), &store);
  CHECK(report.well_formed());
  CHECK(report.violations.empty());

  auto no_store = validate_well_formed(to_json(pack), nullptr);
  CHECK(no_store.violations.empty());
  CHECK(no_store.unverifiable == std::set<int>{3});
  CHECK_FALSE(no_store.well_formed());

  SUBCASE("empty provenance") {
    auto j = to_json(pack);
    j["provenance"] = json::array();
    CHECK(validate_well_formed(j, &store).violations == std::set<int>{2});
  }
  SUBCASE("accepted with empty justification") {
    auto j = to_json(pack);
    j["status"]["justification"] = "";
    CHECK(validate_well_formed(j, &store).violations == std::set<int>{6});
  }
  SUBCASE("tampered checksum: one hex char flipped") {
    auto j = to_json(pack);
    auto h = j["provenance"][0]["checksum"].get<std::string>();
    h[10] = h[10] == 'a' ? 'b' : 'a';
    j["provenance"][0]["checksum"] = h;
    CHECK(validate_well_formed(j, &store).violations == std::set<int>{3});
    auto without = validate_well_formed(j, nullptr);
    CHECK(without.violations.empty());
    CHECK(without.unverifiable == std::set<int>{3});
  }
  SUBCASE("report json lists condition ids as integers") {
    auto j = to_json(pack);
    j["provenance"] = json::array();
    auto out = validate_well_formed(j, &store).to_json();
    CHECK(out["violations"] == json::array({2}));
    CHECK(out["well_formed"] == false);
  }
}

TEST_CASE("pinned provenance verifies after a newer version becomes current") {
  TempDir dir;
  patos::DocumentStore store(dir.path() / "patos");
  PackRegistry registry(dir.path() / "lector");
  auto old_ref = ingest_insert(store, "20240215", "2024-02-15");
  auto new_ref = ingest_insert(store, "20260116", "2026-01-16");
  store.mark_current(new_ref.doc_id);
  auto pack = registry.create_pack(indication_input(old_ref));
  CHECK(registry.validate(pack.pack_id, &store).violations.empty());
  CHECK(registry.validate(pack.pack_id, &store).unverifiable.empty());
}

TEST_CASE("submit_for_review only from draft") {
  TempDir dir;
  patos::DocumentStore store(dir.path() / "patos");
  PackRegistry registry(dir.path() / "lector");
  auto ref = ingest_insert(store);
  auto id = registry.create_pack(indication_input(ref)).pack_id;

  CHECK(registry.submit_for_review(id).status.state == PackState::UnderReview);
  CHECK(error_code_of([&] { registry.submit_for_review(id); }) == ErrorCode::IllegalTransition);
  registry.curate(id, Verdict::Accept, "c", "j");
  CHECK(error_code_of([&] { registry.submit_for_review(id); }) == ErrorCode::IllegalTransition);
  CHECK(error_code_of([&] { registry.submit_for_review("EP-999"); }) == ErrorCode::UnknownPack);
}

TEST_CASE("curate requires curator, justification and under_review") {
  TempDir dir;
  patos::DocumentStore store(dir.path() / "patos");
  PackRegistry registry(dir.path() / "lector", stepping_clock(1'769'558'400));
  auto ref = ingest_insert(store);
  auto id = registry.create_pack(indication_input(ref)).pack_id;
  registry.submit_for_review(id);

  CHECK(error_code_of([&] { registry.curate(id, Verdict::Accept, "curator-01", ""); }) ==
        ErrorCode::MissingJustification);
  CHECK(error_code_of([&] { registry.curate(id, Verdict::Accept, "  ", "fine"); }) ==
        ErrorCode::MissingCurator);
  CHECK(registry.decisions().empty());

  auto [pack, decision] = registry.curate(id, Verdict::Accept, "curator-01", "Matches node 1.1");
  CHECK(pack.status.state == PackState::Accepted);
  CHECK(pack.status.curator == "curator-01");
  CHECK(pack.status.decided_at == decision.timestamp);
  CHECK(decision.decision_id == "CD-0001");
  CHECK(decision.timestamp == "2026-01-28T00:00:00Z");
  CHECK(registry.decisions_for(id).size() == 1);

  auto rejected = registry.create_pack(indication_input(ref)).pack_id;
  registry.submit_for_review(rejected);
  registry.curate(rejected, Verdict::Reject, "curator-02", "Superseded wording");
  CHECK(error_code_of([&] { registry.curate(rejected, Verdict::Accept, "c", "j"); }) ==
        ErrorCode::IllegalTransition);
  CHECK(registry.get(rejected).status.state == PackState::Rejected);
}

TEST_CASE("lifecycle matrix: exactly three legal transitions") {
  TempDir dir;
  patos::DocumentStore store(dir.path() / "patos");
  PackRegistry registry(dir.path() / "lector");
  auto ref = ingest_insert(store);

  auto pack_in = [&](PackState s) {
    auto id = registry.create_pack(indication_input(ref)).pack_id;
    if (s == PackState::Draft) return id;
    registry.submit_for_review(id);
    if (s == PackState::UnderReview) return id;
    registry.curate(id, s == PackState::Accepted ? Verdict::Accept : Verdict::Reject, "c", "j");
    return id;
  };

  int legal = 0;
  for (auto from : kPackStates) {
    for (auto to : kPackStates) {
      auto id = pack_in(from);
      auto before = canonical_text(registry.get(id));
      bool ok = true;
      try {
        registry.transition(id, to, "curator", "justification");
      } catch (const Error& e) {
        ok = false;
        CHECK(e.code() == ErrorCode::IllegalTransition);
        CHECK(canonical_text(registry.get(id)) == before);
      }
      CHECK(ok == is_legal_transition(from, to));
      if (ok) {
        ++legal;
        CHECK(registry.get(id).status.state == to);
      }
    }
  }
  CHECK(legal == 3);
  CHECK_FALSE(is_legal_transition(PackState::Rejected, PackState::Accepted));
}

TEST_CASE("derive_pack leaves the source untouched") {
  TempDir dir;
  patos::DocumentStore store(dir.path() / "patos");
  PackRegistry registry(dir.path() / "lector");
  auto ref = ingest_insert(store);

  auto src = registry.create_pack(indication_input(ref)).pack_id;
  registry.submit_for_review(src);
  registry.curate(src, Verdict::Reject, "c", "wrong node cited");
  auto before = canonical_text(registry.get(src));

  auto derived = registry.derive_pack(src, indication_input(ref));
  CHECK(derived.status.state == PackState::Draft);
  CHECK(derived.derived_from == src);
  CHECK(canonical_text(registry.get(src)) == before);

  auto accepted = registry.create_pack(indication_input(ref)).pack_id;
  registry.submit_for_review(accepted);
  registry.curate(accepted, Verdict::Accept, "c", "ok");
  auto accepted_before = canonical_text(registry.get(accepted));
  registry.derive_pack(accepted, indication_input(ref));
  CHECK(canonical_text(registry.get(accepted)) == accepted_before);

  CHECK(error_code_of([&] { registry.derive_pack("EP-404", indication_input(ref)); }) ==
        ErrorCode::UnknownPack);
  auto bad = indication_input(ref);
  bad.provenance.clear();
  CHECK(error_code_of([&] { registry.derive_pack(src, bad); }) ==
        ErrorCode::StructuralViolation);
}

TEST_CASE("chain of derivations reconstructs construction order") {
  TempDir dir;
  patos::DocumentStore store(dir.path() / "patos");
  PackRegistry registry(dir.path() / "lector");
  auto ref = ingest_insert(store);
  std::vector<std::string> built{registry.create_pack(indication_input(ref)).pack_id};
  for (int i = 0; i < 3; ++i) {
    built.push_back(registry.derive_pack(built.back(), indication_input(ref)).pack_id);
  }
  auto lineage = registry.lineage_of(built.back());
  std::reverse(lineage.begin(), lineage.end());
  CHECK(lineage == built);
}

TEST_CASE("record_normative_silence") {
  TempDir dir;
  patos::DocumentStore store(dir.path() / "patos");
  PackRegistry registry(dir.path() / "lector");
  auto ref = ingest_insert(store);
  const std::string q = "Is dipyrone safe for patients with G6PD deficiency?";
  EpistemicLimits limits{{}, {"Silence does NOT equate to safety or permission"},
                         {"Clinical judgment required; consult specialized literature"}, {q}};

  auto pack = registry.record_normative_silence(q, "dipyrone monohydrate 500 mg tablet",
                                                {cite(ref, {"1.3", "1.4"})}, limits);
  CHECK(pack.question.assertion_type == AssertionType::NormativeSilence);
  CHECK(pack.response.assertion == kNoPronouncement);
  CHECK(pack.status.state == PackState::Draft);
  CHECK(pack.provenance[0].node_ids == std::set<std::string>{"1.3", "1.4"});
  CHECK(to_string(illocutionary_class(pack.question.assertion_type)) == "non-commitment");
  CHECK(registry.validate(pack.pack_id, &store).well_formed());

  auto empty = limits;
  empty.silences.clear();
  CHECK(error_code_of([&] {
          registry.record_normative_silence(q, "f", {cite(ref, {"1.3"})}, empty);
        }) == ErrorCode::MissingSilenceEntry);
  auto other = limits;
  other.silences = {"a different question"};
  CHECK(error_code_of([&] {
          registry.record_normative_silence(q, "f", {cite(ref, {"1.3"})}, other);
        }) == ErrorCode::MissingSilenceEntry);
}

TEST_CASE("registry state survives reopening") {
  TempDir dir;
  patos::DocumentStore store(dir.path() / "patos");
  std::string snapshot;
  {
    PackRegistry registry(dir.path() / "lector");
    auto ref = ingest_insert(store);
    auto id = registry.create_pack(indication_input(ref)).pack_id;
    registry.submit_for_review(id);
    registry.curate(id, Verdict::Accept, "curator-01", "ok");
    snapshot = canonical_text(registry.get(id));
  }
  PackRegistry reopened(dir.path() / "lector");
  CHECK(canonical_text(reopened.get("EP-001")) == snapshot);
  CHECK(reopened.decisions().size() == 1);
  CHECK(reopened.packs_in_state(PackState::Accepted).size() == 1);
}

TEST_CASE("canonical pack text is stable and sorted") {
  TempDir dir;
  patos::DocumentStore store(dir.path() / "patos");
  PackRegistry registry("");
  auto ref = ingest_insert(store);
  auto in = indication_input(ref);
  in.provenance[0].node_ids = {"1.3", "1.1", "1.10"};
  auto pack = registry.create_pack(in);
  auto text = canonical_text(pack);
  CHECK(text == canonical_text(pack_from_json(json::parse(text))));
  CHECK(text.find(R"("node_ids":["1.1","1.10","1.3"])") != std::string::npos);
  CHECK(text.find("\"derived_from\"") < text.find("\"focus\""));
}
