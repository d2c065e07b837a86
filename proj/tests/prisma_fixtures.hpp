#pragma once

// A minimal dipyrone chain (one entity per level) for ontology and
// refraction tests.

#include "lector_fixtures.hpp"
#include "plp/lector/pack_registry.hpp"
#include "plp/prisma/ontology.hpp"

namespace plp::testing {

using prisma::CanonicalLevel;

inline prisma::CanonicalEntity entity(std::string id, CanonicalLevel level, std::string name,
                                      std::set<std::string> parents = {},
                                      std::map<std::string, std::string> attrs = {}) {
  return {std::move(id), level, std::move(name), std::move(parents), std::move(attrs)};
}

inline void dipyrone_chain(prisma::Ontology& o) {
  o.upsert_entity(entity("SUB-000033943", CanonicalLevel::Substance, "dipyrone monohydrate"));
  o.upsert_entity(entity("VTM-000010750", CanonicalLevel::Vtm, "dipyrone", {"SUB-000033943"}));
  o.upsert_entity(entity("VMP-000051605", CanonicalLevel::Vmp,
                         "dipyrone monohydrate 500 mg tablet", {"VTM-000010750"},
                         {{"atc", "N02BB02"}, {"ddd", "0.167"}}));
  o.upsert_entity(entity("VMPP-000103766", CanonicalLevel::Vmpp, "dipyrone 500 mg tablet x 30",
                         {"VMP-000051605"}));
  o.upsert_entity(entity("AMP-000200001", CanonicalLevel::Amp, "NOVALGINA 500 mg tablet",
                         {"VMPP-000103766"}, {{"registration", "PMA 183260351"}}));
  o.upsert_entity(entity("AMPP-000300001", CanonicalLevel::Ampp, "NOVALGINA 500 mg x 30",
                         {"AMP-000200001"}, {{"ean", "7891058008635"}, {"label", "OTC"}}));
  o.add_identifier({"CAS", "5907-38-0", "SUB-000033943"});
  o.add_identifier({"EAN", "7891058008635", "AMPP-000300001"});
}

inline std::string accepted_pack(lector::PackRegistry& reg, const patos::DocumentRef& ref) {
  auto id = reg.create_pack(indication_input(ref)).pack_id;
  reg.submit_for_review(id);
  reg.curate(id, lector::Verdict::Accept, "curator-01", "ok");
  return id;
}

}  // namespace plp::testing
