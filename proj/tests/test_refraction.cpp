#include <doctest.h>

#include <fstream>

#include "plp/prisma/refraction.hpp"
#include "prisma_fixtures.hpp"
#include "test_support.hpp"

using namespace plp;
using namespace plp::prisma;
using namespace plp::testing;
using nlohmann::json;

namespace {

struct Corpus {
  TempDir dir;
  patos::DocumentStore store{dir.path() / "patos", stepping_clock(1'768'521'600)};
  lector::PackRegistry packs{"", stepping_clock(1'769'558'400)};
  Ontology onto{{}, stepping_clock(1'769'644'800)};
  patos::DocumentRef insert;
  std::string indication;

  Corpus() {
    dipyrone_chain(onto);
    onto.upsert_organization({"ORG-000000032", "Sanofi Medley", OrgRole::Manufacturer});
    onto.upsert_entity(entity("AMP-000200001", CanonicalLevel::Amp, "", {},
                              {{"manufacturer_org", "ORG-000000032"}, {"brand", "NOVALGINA"}}));
    onto.add_synonym({"SUB-000033943", "metamizol", "es"});
    insert = ingest_insert(store);
    indication = accepted_pack(packs, insert);
    onto.link_evidence(indication, "VMP-000051605", packs);
  }

  std::string accept(lector::PackInput in) {
    auto id = packs.create_pack(in).pack_id;
    packs.submit_for_review(id);
    packs.curate(id, lector::Verdict::Accept, "curator-02", "checked");
    return id;
  }

  RefractionCorpus snapshot() const { return RefractionCorpus(onto.snapshot(), packs, &store); }
};

std::set<std::string> attribute_keys(const ContextGraph& g) {
  std::set<std::string> keys;
  for (const auto* n : g.nodes_of_type("attribute")) keys.insert(n->props.at("key"));
  return keys;
}

}  // namespace

TEST_CASE("view kinds declare their root level") {
  CHECK(root_level(ViewKind::MppRegulatory) == CanonicalLevel::Ampp);
  CHECK(root_level(ViewKind::VmpComplete) == CanonicalLevel::Vmp);
  CHECK(root_level(ViewKind::Dispensation) == CanonicalLevel::Vmpp);
  CHECK(root_level(ViewKind::SubstanceProfile) == CanonicalLevel::Substance);
  for (auto v : kViews) CHECK(view_from_string(to_string(v)) == v);
  CHECK_FALSE(view_from_string("CTX_ADMINISTRATION").has_value());
}

TEST_CASE("attribute allowlists are fixed and risk-oriented") {
  const auto& reg = attribute_allowlist(ViewKind::MppRegulatory);
  const auto& disp = attribute_allowlist(ViewKind::Dispensation);
  for (const char* dosing : {"ddd", "concentration", "composition", "atc"}) {
    CHECK_FALSE(reg.contains(dosing));
  }
  for (const char* internal : {"registration", "authorization_status", "regulatory_category"}) {
    CHECK_FALSE(disp.contains(internal));
  }
  for (auto a : kViews) {
    for (auto b : kViews) {
      if (a != b) CHECK(attribute_allowlist(a) != attribute_allowlist(b));
    }
  }
}

TEST_CASE("prescription view exposes ATC and DDD and the linked assertion") {
  Corpus c;
  auto g = refract(c.snapshot(), "VMP-000051605", ViewKind::VmpComplete);
  CHECK(g.graph_id == "CTX_VMP_COMPLETE--VMP-000051605");
  REQUIRE(g.node("attribute:atc"));
  CHECK(g.node("attribute:atc")->props["value"] == "N02BB02");
  CHECK(g.node("attribute:ddd")->props["value"] == "0.167");
  CHECK(g.node("attribute:substance:SUB-000033943"));
  CHECK(g.node("attribute:available_presentation:VMPP-000103766"));
  REQUIRE(g.node("assertion:EP-001"));
  CHECK(g.node("assertion:EP-001")->props["illocutionary_class"] == "assertive");
  CHECK(g.node("qualifier:curatorial_decision:EP-001")->props["decision_id"] == "CD-0001");
  CHECK(g.node("authority:ANVISA"));
  CHECK(g.node("scope:therapeutic_use"));
  CHECK(g.node("population:Mild to moderate pain"));
  CHECK(g.node("clinical_context:Hypersensitivity to dipyrone"));
  CHECK(g.generated_at == "2026-01-29T00:00:00Z");
  for (const auto& key : attribute_keys(g)) {
    CHECK(attribute_allowlist(ViewKind::VmpComplete).contains(key));
  }
}

TEST_CASE("regulatory, dispensing and profile views") {
  Corpus c;
  auto corpus = c.snapshot();
  auto reg = refract(corpus, "AMPP-000300001", ViewKind::MppRegulatory);
  CHECK(reg.node("attribute:registration")->props["value"] == "PMA 183260351");
  CHECK(reg.node("attribute:ean")->props["value"] == "7891058008635");
  CHECK(reg.node("attribute:label")->props["value"] == "OTC");
  CHECK(reg.node("attribute:manufacturer")->props["value"] == "Sanofi Medley");
  CHECK_FALSE(reg.node("attribute:ddd"));
  // The pack is linked to the VMP, outside the regulatory scope.
  CHECK(reg.nodes_of_type("assertion").empty());

  auto disp = refract(corpus, "VMPP-000103766", ViewKind::Dispensation);
  const auto* tp = disp.node("attribute:trade_product:AMPP-000300001");
  REQUIRE(tp);
  CHECK(tp->props["brand"] == "NOVALGINA");
  CHECK(tp->props["manufacturer"] == "Sanofi Medley");
  CHECK(tp->props["ean"] == "7891058008635");
  CHECK_FALSE(disp.node("attribute:registration"));

  auto prof = refract(corpus, "SUB-000033943", ViewKind::SubstanceProfile);
  CHECK(prof.node("attribute:identifier:CAS:5907-38-0"));
  CHECK(prof.node("attribute:synonym:metamizol")->props["language"] == "es");
  CHECK(prof.node("attribute:vtm:VTM-000010750"));
  CHECK(prof.node("attribute:vmp:VMP-000051605"));

  for (auto* g : {&reg, &disp, &prof}) {
    for (const auto& key : attribute_keys(*g)) CHECK(attribute_allowlist(g->view).contains(key));
  }
}

TEST_CASE("refract errors") {
  Corpus c;
  auto corpus = c.snapshot();
  CHECK(error_code_of([&] { refract(corpus, "SUB-000033943", ViewKind::MppRegulatory); }) ==
        ErrorCode::LevelViewMismatch);
  CHECK(error_code_of([&] { refract(corpus, "VMP-404", ViewKind::VmpComplete); }) ==
        ErrorCode::UnknownEntity);
}

TEST_CASE("refract is pure and canonical") {
  Corpus c;
  auto a = refract(c.snapshot(), "VMP-000051605", ViewKind::VmpComplete);
  auto b = refract(c.snapshot(), "VMP-000051605", ViewKind::VmpComplete);
  CHECK(canonical_text(a) == canonical_text(b));
  CHECK(a.content_digest == compute_digest(a));
  CHECK(canonical_text(a) == to_json(a).dump());
  CHECK(canonical_text(graph_from_json(json::parse(canonical_text(a)))) == canonical_text(a));

  auto j = to_json(a);
  j.erase("generated_at");
  j.erase("content_digest");
  CHECK(sha256_hex(j.dump()) == a.content_digest);

  for (std::size_t i = 1; i < a.nodes.size(); ++i) CHECK(a.nodes[i - 1].id < a.nodes[i].id);
  for (std::size_t i = 1; i < a.edges.size(); ++i) CHECK(a.edges[i - 1] < a.edges[i]);
}

TEST_CASE("only accepted packs reach a graph") {
  Corpus c;
  auto draft = c.packs.create_pack(indication_input(c.insert)).pack_id;
  auto review = c.packs.create_pack(indication_input(c.insert)).pack_id;
  c.packs.submit_for_review(review);
  auto rejected = c.packs.create_pack(indication_input(c.insert)).pack_id;
  c.packs.submit_for_review(rejected);
  c.packs.curate(rejected, lector::Verdict::Reject, "c", "no");

  auto g = refract(c.snapshot(), "VMP-000051605", ViewKind::VmpComplete);
  auto assertions = g.nodes_of_type("assertion");
  REQUIRE(assertions.size() == 1);
  CHECK(assertions[0]->props["pack_id"] == c.indication);
  for (const auto& id : {draft, review, rejected}) CHECK_FALSE(g.node("assertion:" + id));
}

TEST_CASE("qualifier mediation") {
  Corpus c;
  auto in = indication_input(c.insert);
  in.question.assertion_type = lector::AssertionType::Contraindication;
  c.onto.link_evidence(c.accept(in), "SUB-000033943", c.packs);
  auto g = refract(c.snapshot(), "VMP-000051605", ViewKind::VmpComplete);
  REQUIRE(g.nodes_of_type("assertion").size() == 2);

  const std::set<std::string> dimensions{"authority", "scope", "population", "clinical_context"};
  for (const auto* a : g.nodes_of_type("assertion")) {
    int pack_qualifiers = 0;
    for (const auto& e : g.edges) {
      if (e.from != a->id) continue;
      const auto* target = g.node(e.to);
      REQUIRE(target);
      CHECK_FALSE(dimensions.contains(target->type));
      if (target->type == "qualifier" && target->props["qualifier"] == "evidence_pack") {
        ++pack_qualifiers;
        CHECK(c.packs.get(target->props["pack_id"]).status.state ==
              lector::PackState::Accepted);
      }
    }
    CHECK(pack_qualifiers == 1);
  }
  for (const auto& e : g.edges) {
    const auto* target = g.node(e.to);
    if (!dimensions.contains(target->type)) continue;
    const auto* source = g.node(e.from);
    CHECK(source->type == "qualifier");
    CHECK(source->props["qualifier"] == "evidence_pack");
  }
}

TEST_CASE("scope rules per view") {
  Corpus c;
  auto on_ampp = c.accept(indication_input(c.insert));
  c.onto.link_evidence(on_ampp, "AMPP-000300001", c.packs);
  auto on_sub = c.accept(indication_input(c.insert));
  c.onto.link_evidence(on_sub, "SUB-000033943", c.packs);
  auto corpus = c.snapshot();

  auto ids = [&](const std::string& entity, ViewKind v) {
    std::set<std::string> out;
    auto g = refract(corpus, entity, v);
    for (const auto* a : g.nodes_of_type("assertion")) {
      out.insert(a->props["pack_id"].get<std::string>());
    }
    return out;
  };
  CHECK(ids("AMPP-000300001", ViewKind::MppRegulatory) == std::set<std::string>{on_ampp});
  CHECK(ids("VMPP-000103766", ViewKind::Dispensation) == std::set<std::string>{on_ampp});
  CHECK(ids("VMP-000051605", ViewKind::VmpComplete) ==
        std::set<std::string>{c.indication, on_ampp, on_sub});
  CHECK(ids("SUB-000033943", ViewKind::SubstanceProfile) == std::set<std::string>{on_sub});
}

TEST_CASE("filter_assertions") {
  Corpus c;
  auto in = indication_input(c.insert);
  in.question.assertion_type = lector::AssertionType::Contraindication;
  auto contra = c.accept(in);
  c.onto.link_evidence(contra, "VMP-000051605", c.packs);
  const std::string q = "Is dipyrone safe for patients with G6PD deficiency?";
  auto silence = c.packs.record_normative_silence(
      q, "dipyrone", {cite(c.insert, {"1.3", "1.4"})},
      {{}, {"Silence does NOT equate to safety"}, {"Clinical judgment required"}, {q}});
  c.packs.submit_for_review(silence.pack_id);
  c.packs.curate(silence.pack_id, lector::Verdict::Accept, "c", "no pronouncement found");
  c.onto.link_evidence(silence.pack_id, "VMP-000051605", c.packs);

  auto g = refract(c.snapshot(), "VMP-000051605", ViewKind::VmpComplete);
  const auto before = canonical_text(g);

  auto only_contra = filter_assertions(g, {lector::AssertionType::Contraindication});
  auto kept = only_contra.nodes_of_type("assertion");
  REQUIRE(kept.size() == 1);
  CHECK(kept[0]->props["pack_id"] == contra);
  CHECK_FALSE(only_contra.node("qualifier:evidence_pack:" + c.indication));
  CHECK(only_contra.node("attribute:atc"));
  CHECK(only_contra.content_digest == compute_digest(only_contra));
  CHECK(canonical_text(g) == before);

  std::set<lector::AssertionType> all(lector::kAssertionTypes.begin(),
                                      lector::kAssertionTypes.end());
  auto identity = filter_assertions(g, all);
  CHECK(identity.nodes_of_type("assertion").size() == g.nodes_of_type("assertion").size());
  CHECK(identity.content_digest == g.content_digest);

  auto silent = filter_assertions(g, {lector::AssertionType::NormativeSilence});
  REQUIRE(silent.nodes_of_type("assertion").size() == 1);
  CHECK(silent.nodes_of_type("assertion")[0]->label ==
        "No regulatory pronouncement identified");
  const auto* limits = silent.node("qualifier:epistemic_limits:" + silence.pack_id);
  REQUIRE(limits);
  CHECK(limits->props["silences"] == json::array({q}));
  CHECK(std::find(silent.edges.begin(), silent.edges.end(),
                  GraphEdge{"assertion:" + silence.pack_id, limits->id, "qualified_by"}) !=
        silent.edges.end());
}

TEST_CASE("trace reaches verified document nodes and flags corruption") {
  Corpus c;
  GraphStore graphs(c.dir.path() / "graphs");
  auto g = refract(c.snapshot(), "VMP-000051605", ViewKind::VmpComplete);
  graphs.put(g);

  auto chain = trace(graphs, g.graph_id, "assertion:EP-001", c.store);
  CHECK(chain.pack_id == "EP-001");
  REQUIRE(chain.entries.size() == 1);
  CHECK(chain.entries[0].node_ids == std::set<std::string>{"1.1"});
  CHECK(chain.entries[0].doc_id == c.insert.doc_id);
  CHECK(chain.verified());

  CHECK(error_code_of([&] { trace(graphs, g.graph_id, "attribute:atc", c.store); }) ==
        ErrorCode::NotAnAssertionNode);
  CHECK(error_code_of([&] { trace(graphs, g.graph_id, "assertion:EP-404", c.store); }) ==
        ErrorCode::NotAnAssertionNode);
  CHECK(error_code_of([&] { trace(graphs, "CTX_VMP_COMPLETE--VMP-404", "x", c.store); }) ==
        ErrorCode::UnknownGraph);

  {
    auto blob = c.store.blob_path(c.insert.checksum);
    std::fstream f(blob, std::ios::in | std::ios::out | std::ios::binary);
    char ch;
    f.seekg(3);
    f.get(ch);
    f.seekp(3);
    f.put(static_cast<char>(ch ^ 0x01));
  }
  auto broken = trace(graphs, g.graph_id, "assertion:EP-001", c.store);
  CHECK(broken.entries[0].status == EntryStatus::Corrupted);
  CHECK_FALSE(broken.verified());
  CHECK(broken.to_json()["entries"][0]["status"] == "corrupted");

  std::filesystem::remove(c.store.blob_path(c.insert.checksum));
  CHECK(trace(graphs, g.graph_id, "assertion:EP-001", c.store).entries[0].status ==
        EntryStatus::Missing);
}

TEST_CASE("refract_all materializes one graph per eligible entity and view") {
  Corpus c;
  GraphStore graphs(c.dir.path() / "graphs");
  std::vector<ViewKind> all(kViews.begin(), kViews.end());

  auto report = refract_all(c.snapshot(), all, graphs, 1);
  CHECK(report.graph_count == 4);
  CHECK(report.failures.empty());
  CHECK(graphs.size() == 4);
  auto bytes = graphs.read_bytes("CTX_VMP_COMPLETE--VMP-000051605");
  REQUIRE(bytes);
  CHECK(*bytes == canonical_text(refract(c.snapshot(), "VMP-000051605", ViewKind::VmpComplete)));

  for (const auto& m : graphs.manifest()) {
    auto g = graphs.load(m.graph_id);
    REQUIRE(g);
    CHECK(g->content_digest == m.digest);
    CHECK(compute_digest(*g) == m.digest);
  }

  c.onto.upsert_entity(entity("AMP-000200002", CanonicalLevel::Amp, "generic", {"VMPP-000103766"}));
  c.onto.upsert_entity(entity("AMPP-000300002", CanonicalLevel::Ampp, "generic x 30",
                              {"AMP-000200002"}));
  auto again = refract_all(c.snapshot(), all, graphs, 3);
  CHECK(again.graph_count == report.graph_count + 1);
  CHECK(graphs.size() == 5);

  Ontology empty;
  TempDir other;
  GraphStore none(other.path());
  CHECK(refract_all(RefractionCorpus(empty.snapshot()), all, none).graph_count == 0);

  GraphStore reopened(c.dir.path() / "graphs");
  CHECK(reopened.size() == 5);
}

TEST_CASE("canonical text matches an independently built JSON tree") {
  ContextGraph g;
  g.graph_id = "CTX_VMP_COMPLETE--VMP-1";
  g.view = ViewKind::VmpComplete;
  g.root_entity_id = "VMP-1";
  g.generated_at = "2026-01-28T00:00:00Z";
  g.nodes = {{"VMP-1", "entity", "quote \" backslash \\ tab \t nl \n bell \x07", json::object()},
             {"attribute:storage", "attribute", "15-30 \xC2\xB0" "C / \x7f",
              {{"key", "storage"}, {"value", "x"}}}};
  g.edges = {{"VMP-1", "attribute:storage", "has_attribute"}};
  g.content_digest = compute_digest(g);

  json nodes = json::array(), edges = json::array();
  for (const auto& n : g.nodes) {
    nodes.push_back({{"id", n.id}, {"label", n.label}, {"props", n.props}, {"type", n.type}});
  }
  for (const auto& e : g.edges) edges.push_back({{"from", e.from}, {"relation", e.relation}, {"to", e.to}});
  json body{{"edges", edges}, {"graph_id", g.graph_id}, {"nodes", nodes},
            {"root_entity_id", g.root_entity_id}, {"view", "CTX_VMP_COMPLETE"}};
  CHECK(g.content_digest == sha256_hex(body.dump()));
  body["content_digest"] = g.content_digest;
  body["generated_at"] = g.generated_at;
  CHECK(canonical_text(g) == body.dump());
}
