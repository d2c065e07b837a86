#include "plp/service/dipyrone_fixture.hpp"

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "plp/common/error.hpp"
#include "plp/service/workspace.hpp"

namespace plp::service {

using nlohmann::json;
using lector::AssertionType;
using patos::DocKind;
using prisma::CanonicalLevel;

namespace {

constexpr std::int64_t kFixtureEpoch = 1'769'558'400;  // 2026-01-28T00:00:00Z
constexpr const char* kFocus = "dipyrone monohydrate 500 mg tablet";

std::string numbered(const char* prefix, int n, int width = 9) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s-%0*d", prefix, width, n);
  return buf;
}

// ---------------------------------------------------------------------------
// Documents

std::string professional_text(const std::string& brand, const std::string& label) {
  return "1 " + brand + " dipyrone monohydrate professional information\n"
         "Professional package insert, version " + label + ".\n"
         "1.1 What is this medication indicated for?\n"
         "Analgesic and antipyretic for adults. Relieves mild to moderate pain and fever.\n"
         "1.2 How does this medication work?\n"
         "Dipyrone is a pyrazolone derivative with analgesic, antipyretic and spasmolytic effects.\n"
         "1.3 When should I not use this medication?\n"
         "Do not use in hypersensitivity to dipyrone or other pyrazolones. Do not use with impaired\n"
         "bone marrow function or diseases of the hematopoietic system. Do not use in acute\n"
         "intermittent hepatic porphyria or in analgesic asthma syndrome.\n"
         "1.4 What should I know before using this medication?\n"
         "Agranulocytosis may occur; stop treatment at signs of infection. Isolated hypotensive\n"
         "reactions may occur, mostly with high fever. Patients with asthma or chronic urticaria\n"
         "carry an increased risk of anaphylactoid reactions.\n"
         "1.4.1 Drug interactions\n"
         "Dipyrone may reduce the anticoagulant effect of warfarin; monitor INR. Use with\n"
         "methotrexate may increase hematotoxicity. Dipyrone may lower ciclosporin levels and\n"
         "reduce the antiplatelet effect of acetylsalicylic acid.\n"
         "1.5 How should I use this medication?\n"
         "Adults and adolescents over 15 years: one to two tablets up to four times daily.\n"
         "Do not exceed 4 g per day.\n"
         "1.6 What should I do if I forget to use this medication?\n"
         "Take the missed dose when remembered. Do not double the dose.\n"
         "1.7 What adverse effects may this medication cause?\n"
         "Agranulocytosis, anaphylactic reactions and hypotensive reactions have been reported.\n"
         "A red coloration of the urine may occur.\n"
         "1.8 What should be done if someone uses a larger quantity than indicated?\n"
         "Seek medical help and bring the package.\n";
}

std::string patient_text(const std::string& brand, const std::string& label) {
  return "1 " + brand + " dipyrone monohydrate patient information\n"
         "Patient package insert, version " + label + ".\n"
         "1.1 What is this medication indicated for?\n"
         "This medicine relieves pain and fever.\n"
         "1.2 How does this medication work?\n"
         "It reduces pain and fever within about thirty minutes.\n"
         "1.3 When should I not use this medication?\n"
         "Do not use if you are allergic to dipyrone or have blood disorders.\n"
         "1.4 What should I know before using this medication?\n"
         "Avoid use in the first and last three months of pregnancy unless advised by a doctor.\n"
         "1.5 How should I use this medication?\n"
         "Swallow the tablet whole with water.\n"
         "1.6 What should I do if I forget to use this medication?\n"
         "Take it when you remember. Do not take two doses at once.\n"
         "1.7 What adverse effects may this medication cause?\n"
         "Your urine may turn red. Stop use and seek help if you have fever or sore throat.\n"
         "1.8 What should be done if someone uses a larger quantity than indicated?\n"
         "Seek medical help immediately.\n";
}

std::string monograph_text(const std::string& hospital, const std::string& product,
                           const std::string& label) {
  return "1 " + product + " monograph\n"
         + hospital + " pharmacy and therapeutics monograph, revision " + label + ".\n"
         "1.1 Indications\n"
         "Acute pain and fever, including postoperative pain and renal colic.\n"
         "1.2 Dosing\n"
         "Usual adult dose is 500 mg to 1 g every six hours. Maximum 4 g per day.\n"
         "Avoid high repeated doses in renal impairment. Limit treatment to seven days.\n"
         "1.3 Contraindications\n"
         "Third trimester of pregnancy. Infants under three months or under 5 kg.\n"
         "1.4 Interactions\n"
         "Chlorpromazine may cause severe hypothermia. Dipyrone may lower bupropion levels.\n"
         "1.5 Adverse reactions\n"
         "Severe cutaneous reactions and drug-induced liver injury have been reported.\n"
         "1.6 Warnings\n"
         "Monitor blood counts in prolonged use. Reduce dose in elderly patients.\n";
}

std::string database_text(const std::string& record, const std::vector<std::string>& presentations) {
  std::string text = "1 Product record " + record + "\n"
                     "Public pharmaceutical database entry.\n"
                     "1.1 Presentation\n";
  for (const auto& p : presentations) text += "Presentation: " + p + "\n";
  text += "1.2 Composition\n"
          "Each unit contains dipyrone monohydrate.\n";
  return text;
}

struct DocSpec {
  std::string key;
  patos::LineageKey lineage;
  std::string version_label;
  std::string capture_date;
  std::string text;
  bool indexed = false;
};

std::string iso_date(const std::string& label) {
  return label.substr(0, 4) + "-" + label.substr(4, 2) + "-" + label.substr(6, 2);
}

std::vector<DocSpec> document_specs() {
  std::vector<DocSpec> docs;

  // Reference medicine: five versions of each insert, the last one current.
  const std::vector<std::string> versions{"20240215", "20240910", "20250305", "20251020",
                                          "20260116"};
  for (std::size_t v = 0; v < versions.size(); ++v) {
    const auto& label = versions[v];
    bool current = v + 1 == versions.size();
    auto capture = current ? std::string("2026-01-28") : iso_date(label);
    auto suffix = current ? std::string() : "_v" + std::to_string(v + 1);
    docs.push_back({"prof" + suffix,
                    {"ANVISA", "186200018", DocKind::ProfessionalInsert, "NOVALGINA"},
                    label, capture, professional_text("NOVALGINA", label), true});
    docs.push_back({"pat" + suffix,
                    {"ANVISA", "186200018", DocKind::PatientInsert, "NOVALGINA"},
                    label, capture, patient_text("NOVALGINA", label), true});
  }
  docs.push_back({"gen_prof",
                  {"ANVISA", "105730099", DocKind::ProfessionalInsert, "DIPIRONA MONOIDRATADA"},
                  "20251104", "2025-11-04", professional_text("DIPIRONA", "20251104"), true});
  docs.push_back({"gen_pat",
                  {"ANVISA", "105730099", DocKind::PatientInsert, "DIPIRONA MONOIDRATADA"},
                  "20251104", "2025-11-04", patient_text("DIPIRONA", "20251104"), true});

  const std::vector<std::string> products{
      "Dipyrone 500 mg tablet",          "Dipyrone 1 g tablet",
      "Dipyrone 500 mg/mL oral drops",   "Dipyrone 500 mg/mL injection",
      "Dipyrone with caffeine",          "Dipyrone with hyoscine butylbromide"};
  for (const auto& [source, hospital] : std::vector<std::pair<std::string, std::string>>{
           {"HSL", "Hospital Sirio-Libanes"}, {"HIAE", "Hospital Albert Einstein"}}) {
    for (std::size_t i = 0; i < products.size(); ++i) {
      std::string key = source == "HSL" ? "hsl" : "hiae";
      docs.push_back({key + std::to_string(i + 1),
                      {source, source + "-MON-" + std::to_string(101 + i), DocKind::Monograph,
                       products[i]},
                      "20251201", "2025-12-01", monograph_text(hospital, products[i], "20251201"),
                      true});
    }
  }

  // 168 database records cover 170 presentations: the first two list two.
  const std::vector<std::string> forms{"500 mg tablet", "1 g tablet", "500 mg/mL oral drops",
                                       "50 mg/mL oral solution", "500 mg/mL injection"};
  int presentation = 0;
  for (int r = 1; r <= 168; ++r) {
    std::vector<std::string> listed;
    int count = r <= 2 ? 2 : 1;
    for (int k = 0; k < count; ++k) {
      ++presentation;
      listed.push_back("dipyrone " + forms[presentation % forms.size()] + " presentation " +
                       std::to_string(presentation));
    }
    char reg[16];
    std::snprintf(reg, sizeof reg, "DB-%04d", r);
    docs.push_back({std::string("db") + std::to_string(r),
                    {"PUBLIC_DATABASE", reg, DocKind::Smpc, "dipyrone record " + std::to_string(r)},
                    "20260110", "2026-01-10", database_text(reg, listed), r <= 7});
  }
  return docs;
}

// ---------------------------------------------------------------------------
// Evidence packs

struct Cite {
  std::string doc;
  std::set<std::string> nodes;
};

struct PackSpec {
  std::string id;
  AssertionType type;
  std::string question;
  std::string assertion;
  std::vector<std::string> valid_when;
  std::vector<std::string> invalid_when;
  std::vector<Cite> cites;
  std::vector<std::string> divergences;
  std::vector<std::string> gaps;
  std::vector<std::string> dependencies;
  bool accept = true;
  std::string curator;
  std::string justification;
};

std::vector<PackSpec> pack_specs() {
  using T = AssertionType;
  const std::vector<std::string> consult{"Always consult a healthcare professional"};
  return {
      {"EP-001", T::Indication, "What is this medication indicated for?",
       "Analgesic; Antipyretic (adults)", {"Mild to moderate pain"},
       {"Hypersensitivity to dipyrone"}, {{"prof", {"1.1"}}}, {}, {"Off-label indications"},
       consult, true, "curator-01", "Indication matches section 1.1 of the current insert."},
      {"EP-002", T::Indication, "What does the patient insert say this medicine is for?",
       "Relief of pain and fever", {"Adults and adolescents over 15 years"},
       {"Allergy to dipyrone"}, {{"pat", {"1.1"}}}, {}, {"Pediatric wording not covered"},
       consult, true, "curator-02", "Patient wording agrees with the professional insert."},
      {"EP-003", T::Indication, "Which indications does the hospital monograph list?",
       "Acute pain and fever, including postoperative pain and renal colic",
       {"Hospital setting"}, {"Hypersensitivity to pyrazolones"}, {{"hsl1", {"1.1"}}},
       {"Renal colic is not listed in the regulatory insert"}, {}, consult, true, "curator-01",
       "Monograph section read in full; divergence recorded."},
      {"EP-004", T::Indication, "Is dipyrone indicated for postoperative pain?",
       "Indicated for postoperative pain in adults", {"Postoperative setting"},
       {"Hypersensitivity to pyrazolones"}, {{"hiae1", {"1.1"}}}, {},
       {"No comparative efficacy data"}, consult, true, "curator-03",
       "Second hospital source confirms the indication."},
      {"EP-005", T::Indication, "What is the generic product indicated for?",
       "Analgesic and antipyretic (adults)", {"Mild to moderate pain"},
       {"Hypersensitivity to dipyrone"}, {{"gen_prof", {"1.1"}}}, {}, {}, consult, true,
       "curator-02", "Generic insert states the same indication as the reference."},
      {"EP-006", T::Indication, "Do the insert and the hospital monograph agree on indication?",
       "Both sources support analgesic and antipyretic use", {"Adults"},
       {"Hypersensitivity to dipyrone"}, {{"prof", {"1.1"}}, {"hsl1", {"1.1"}}},
       {"Monograph adds renal colic"}, {}, consult, true, "curator-01",
       "Cross-source comparison checked against both cited sections."},

      {"EP-007", T::Contraindication, "Is dipyrone contraindicated in pyrazolone allergy?",
       "Contraindicated in hypersensitivity to dipyrone or other pyrazolones",
       {"Known pyrazolone hypersensitivity"}, {}, {{"prof", {"1.3"}}}, {},
       {"Cross-reactivity rates not quantified"}, consult, true, "curator-03",
       "Stated verbatim in section 1.3."},
      {"EP-008", T::Contraindication, "Can dipyrone be used with bone marrow impairment?",
       "Contraindicated with impaired bone marrow function or hematopoietic disease",
       {"Documented marrow impairment"}, {}, {{"prof", {"1.3"}}}, {}, {}, consult, true,
       "curator-01", "Section 1.3 lists the hematologic contraindication."},
      {"EP-009", T::Contraindication, "Is dipyrone safe in acute intermittent porphyria?",
       "Contraindicated in acute intermittent hepatic porphyria", {"Diagnosed porphyria"}, {},
       {{"prof", {"1.3"}}}, {}, {"Other porphyria types not addressed"}, consult, true,
       "curator-02", "Contraindication confirmed in section 1.3."},
      {"EP-010", T::Contraindication, "Is dipyrone contraindicated in analgesic asthma?",
       "Contraindicated in analgesic asthma syndrome", {"History of analgesic asthma"}, {},
       {{"prof", {"1.3"}}, {"pat", {"1.3"}}}, {}, {}, consult, true, "curator-03",
       "Professional and patient inserts agree."},
      {"EP-011", T::Contraindication, "Can dipyrone be used late in pregnancy?",
       "Contraindicated in the third trimester of pregnancy", {"Third trimester"}, {},
       {{"hsl1", {"1.3"}}}, {"Insert advises avoidance rather than contraindication"}, {},
       consult, true, "curator-01", "Monograph wording is explicit; divergence recorded."},
      {"EP-012", T::Contraindication, "Can dipyrone be given to young infants?",
       "Contraindicated in infants under three months or under 5 kg",
       {"Age under three months"}, {}, {{"hiae1", {"1.3"}}}, {},
       {"Neonatal pharmacokinetics not described"}, consult, true, "curator-02",
       "Age and weight limits read from the monograph."},

      {"EP-013", T::Dosing, "How should this medication be dosed in adults?",
       "One to two tablets up to four times daily", {"Adults and adolescents over 15 years"},
       {"Renal or hepatic impairment"}, {{"prof", {"1.5"}}}, {}, {"Pediatric dosing"},
       consult, true, "curator-01", "Posology matches section 1.5 of the current insert."},
      {"EP-014", T::Dosing, "What adult dose did the insert recommend?",
       "One to two tablets up to four times daily", {"Adults"}, {},
       {{"prof_v1", {"1.5"}}}, {}, {}, consult, false, "curator-02",
       "Cites a superseded insert version; a new pack must cite the current version."},
      {"EP-015", T::Dosing, "How should the tablet be taken?", "Swallow whole with water",
       {"Oral tablet"}, {}, {{"pat", {"1.5"}}}, {}, {}, consult, true, "curator-03",
       "Administration instruction read from the patient insert."},
      {"EP-016", T::Dosing, "What is the maximum daily dose?", "Maximum 4 g per day",
       {"Adults"}, {"Hepatic impairment"}, {{"hsl1", {"1.2"}}}, {}, {}, consult, true,
       "curator-01", "Ceiling dose stated in the monograph."},
      {"EP-017", T::Dosing, "How should dosing change in renal impairment?",
       "Avoid high repeated doses in renal impairment", {"Reduced renal function"}, {},
       {{"hiae1", {"1.2"}}}, {}, {"No creatinine clearance thresholds"}, consult, true,
       "curator-02", "Monograph gives qualitative guidance only; gap recorded."},
      {"EP-018", T::Dosing, "How is the generic product dosed?",
       "One to two tablets up to four times daily", {"Adults"}, {},
       {{"gen_prof", {"1.5"}}}, {}, {}, consult, true, "curator-03",
       "Generic posology matches the reference product."},
      {"EP-019", T::Dosing, "How long may treatment continue?", "Limit treatment to seven days",
       {"Acute pain"}, {"Chronic pain management"}, {{"hsl1", {"1.2"}}, {"hiae1", {"1.2"}}},
       {}, {"Evidence for longer courses"}, consult, true, "curator-01",
       "Both monographs agree on duration."},

      {"EP-020", T::Interaction, "Does dipyrone interact with warfarin?",
       "Moderate interaction: may reduce anticoagulant effect; monitor INR",
       {"Concomitant warfarin"}, {}, {{"prof", {"1.4.1"}}}, {},
       {"Magnitude of INR change"}, consult, true, "curator-02",
       "Interaction stated in the drug interactions subsection."},
      {"EP-021", T::Interaction, "Does dipyrone interact with methotrexate?",
       "Combined use may increase hematotoxicity", {"Concomitant methotrexate"}, {},
       {{"prof", {"1.4.1"}}}, {}, {}, consult, true, "curator-03",
       "Interaction confirmed in the current insert."},
      {"EP-022", T::Interaction, "Does dipyrone affect ciclosporin levels?",
       "May lower ciclosporin blood levels", {"Concomitant ciclosporin"}, {},
       {{"prof", {"1.4.1"}}}, {}, {"Monitoring frequency"}, consult, true, "curator-01",
       "Interaction confirmed in the current insert."},
      {"EP-023", T::Interaction, "Does dipyrone interact with chlorpromazine?",
       "May cause severe hypothermia", {"Concomitant chlorpromazine"}, {},
       {{"hsl1", {"1.4"}}}, {"Not mentioned in the regulatory insert"}, {}, consult, true,
       "curator-02", "Hospital source only; divergence recorded."},
      {"EP-024", T::Interaction, "Does dipyrone interact with bupropion?",
       "May lower bupropion levels", {"Concomitant bupropion"}, {}, {{"hiae1", {"1.4"}}},
       {"Not mentioned in the regulatory insert"}, {}, consult, true, "curator-03",
       "Hospital source only; divergence recorded."},
      {"EP-025", T::Interaction, "Does dipyrone reduce the effect of low-dose aspirin?",
       "May reduce the antiplatelet effect of acetylsalicylic acid",
       {"Cardioprotective aspirin"}, {}, {{"prof", {"1.4.1"}}, {"hsl1", {"1.4"}}}, {},
       {"Timing of administration"}, consult, true, "curator-01",
       "Insert and monograph both checked."},

      {"EP-026", T::AdverseReaction, "Can dipyrone cause agranulocytosis?",
       "Agranulocytosis has been reported", {}, {}, {{"prof", {"1.7"}}}, {},
       {"Incidence varies across populations"}, consult, true, "curator-02",
       "Listed in section 1.7."},
      {"EP-027", T::AdverseReaction, "Can dipyrone cause anaphylaxis?",
       "Anaphylactic reactions have been reported", {}, {}, {{"prof", {"1.7"}}}, {}, {},
       consult, true, "curator-03", "Listed in section 1.7."},
      {"EP-028", T::AdverseReaction, "Can dipyrone lower blood pressure?",
       "Hypotensive reactions have been reported", {}, {}, {{"prof", {"1.7"}}}, {}, {},
       consult, true, "curator-01", "Listed in section 1.7."},
      {"EP-029", T::AdverseReaction, "Why might urine turn red during treatment?",
       "Red coloration of the urine may occur", {}, {}, {{"pat", {"1.7"}}}, {}, {}, consult,
       true, "curator-02", "Patient insert states the effect plainly."},
      {"EP-030", T::AdverseReaction, "Are severe skin reactions reported?",
       "Severe cutaneous reactions have been reported", {}, {}, {{"hsl1", {"1.5"}}}, {},
       {"Frequency not given"}, consult, true, "curator-03", "Monograph section checked."},
      {"EP-031", T::AdverseReaction, "Is liver injury reported?",
       "Drug-induced liver injury has been reported", {}, {}, {{"hiae1", {"1.5"}}},
       {"Not listed in the regulatory insert"}, {}, consult, true, "curator-01",
       "Monograph section checked; divergence recorded."},

      {"EP-032", T::Warning, "What should be done at signs of infection?",
       "Stop treatment at signs of infection because agranulocytosis may occur", {}, {},
       {{"prof", {"1.4"}}}, {}, {}, consult, true, "curator-02", "Warning read from section 1.4."},
      {"EP-033", T::Warning, "Is there a hypotension risk?",
       "Isolated hypotensive reactions may occur, mostly with high fever", {"High fever"}, {},
       {{"prof", {"1.4"}}}, {}, {}, consult, true, "curator-03", "Warning read from section 1.4."},
      {"EP-034", T::Warning, "Are asthmatic patients at higher risk?",
       "Asthma or chronic urticaria increases the risk of anaphylactoid reactions",
       {"Asthma", "Chronic urticaria"}, {}, {{"prof", {"1.4"}}}, {}, {}, consult, true,
       "curator-01", "Warning read from section 1.4."},
      {"EP-035", T::Warning, "Can dipyrone be used during pregnancy?",
       "Avoid in the first and last three months of pregnancy unless advised",
       {"Pregnancy"}, {}, {{"pat", {"1.4"}}}, {"Monograph lists a third trimester contraindication"},
       {}, consult, true, "curator-02", "Patient insert checked; divergence recorded."},
      {"EP-036", T::Warning, "Is blood count monitoring needed?",
       "Monitor blood counts in prolonged use", {"Prolonged use"}, {}, {{"hsl1", {"1.6"}}}, {},
       {}, consult, true, "curator-03", "Monograph warning checked."},
      {"EP-037", T::Warning, "Do elderly patients need a lower dose?",
       "Reduce dose in elderly patients", {"Age over 65"}, {}, {{"hiae1", {"1.6"}}}, {},
       {"No specific dose given"}, consult, true, "curator-01", "Monograph warning checked."},
  };
}

// ---------------------------------------------------------------------------
// Ontology

json entity(const std::string& id, CanonicalLevel level, const std::string& name,
            std::vector<std::string> parents, json attributes = json::object()) {
  return {{"record", "entity"},       {"entity_id", id},   {"level", prisma::to_string(level)},
          {"display_name", name},     {"parent_ids", parents}, {"attributes", attributes}};
}

json identifier(const std::string& scheme, const std::string& value, const std::string& id) {
  return {{"record", "identifier"}, {"scheme", scheme}, {"value", value}, {"entity_id", id}};
}

json organization(const std::string& id, const std::string& name, const std::string& role) {
  return {{"record", "organization"}, {"org_id", id}, {"name", name}, {"role", role}};
}

std::vector<json> ontology_records() {
  std::vector<json> out;
  const std::string sub = kDipyroneSubstance;

  out.push_back(organization("ORG-000000032", "Sanofi Medley", "manufacturer"));
  for (int m = 1; m <= 23; ++m) {
    char name[32];
    std::snprintf(name, sizeof name, "Manufacturer %02d", m);
    out.push_back(organization(numbered("ORG", 100000000 + m), name, "manufacturer"));
  }
  out.push_back(organization("ORG-100000101", "ANVISA", "regulator"));
  out.push_back(organization("ORG-100000102", "Hospital Sirio-Libanes", "hospital"));
  out.push_back(organization("ORG-100000103", "Hospital Albert Einstein", "hospital"));
  out.push_back(organization("ORG-100000104", "Public pharmaceutical database", "database"));

  // Substances: dipyrone plus the partners of its fixed combinations.
  out.push_back(entity(sub, CanonicalLevel::Substance, "dipyrone", {}));
  const std::vector<std::string> partners{"caffeine",      "orphenadrine", "hyoscine butylbromide",
                                          "adiphenine",    "promethazine", "isometheptene",
                                          "pitofenone",    "fenpiverinium"};
  for (std::size_t i = 0; i < partners.size(); ++i) {
    out.push_back(entity(numbered("SUB", 100000001 + static_cast<int>(i)),
                         CanonicalLevel::Substance, partners[i], {}));
  }
  auto partner = [](int i) { return numbered("SUB", 100000001 + i); };

  // Therapeutic moieties: the single-ingredient one and fifteen combinations.
  out.push_back(entity(kDipyroneVtm, CanonicalLevel::Vtm, "dipyrone", {sub}));
  const std::vector<std::vector<int>> combos{{0}, {1}, {2}, {3}, {4}, {5}, {6}, {0, 1}, {0, 5},
                                             {6, 7}, {0, 2}, {3, 4}, {1, 2}, {2, 4}, {0, 6}};
  std::vector<std::string> combo_vtms;
  for (std::size_t c = 0; c < combos.size(); ++c) {
    std::vector<std::string> parents{sub};
    std::string name = "dipyrone";
    for (int p : combos[c]) {
      parents.push_back(partner(p));
      name += " + " + partners[p];
    }
    combo_vtms.push_back(numbered("VTM", 100000001 + static_cast<int>(c)));
    out.push_back(entity(combo_vtms.back(), CanonicalLevel::Vtm, name, parents));
  }

  // Virtual products: seven single-ingredient formulations, 29 combinations.
  out.push_back(entity(kDipyroneVmp, CanonicalLevel::Vmp, "dipyrone monohydrate 500 mg tablet",
                       {kDipyroneVtm},
                       {{"atc", "N02BB02"},
                        {"ddd", "0.167"},
                        {"substance", "dipyrone monohydrate"},
                        {"concentration", "500 mg"},
                        {"composition", "dipyrone monohydrate 500 mg"},
                        {"pharmaceutical_form", "tablet (PDF-000002766)"},
                        {"form_taxonomy", "oral / solid / ingestion / conventional release"},
                        {"route", "oral"},
                        {"available_presentation", "13 virtual packs"}}));
  const std::vector<std::pair<std::string, std::string>> mono{
      {"dipyrone monohydrate 1 g tablet", "tablet"},
      {"dipyrone monohydrate 500 mg/mL oral drops", "oral drops"},
      {"dipyrone monohydrate 50 mg/mL oral solution", "oral solution"},
      {"dipyrone monohydrate 500 mg/mL injection", "solution for injection"},
      {"dipyrone monohydrate 1 g suppository", "suppository"},
      {"dipyrone monohydrate 300 mg suppository", "suppository"}};
  int vmp_n = 100000001;
  for (const auto& [name, form] : mono) {
    out.push_back(entity(numbered("VMP", vmp_n++), CanonicalLevel::Vmp, name, {kDipyroneVtm},
                         {{"atc", "N02BB02"}, {"pharmaceutical_form", form}}));
  }
  for (std::size_t c = 0; c < combo_vtms.size(); ++c) {
    int forms = c + 1 == combo_vtms.size() ? 1 : 2;
    for (int f = 0; f < forms; ++f) {
      out.push_back(entity(numbered("VMP", vmp_n++), CanonicalLevel::Vmp,
                           "combination " + std::to_string(c + 1) + (f == 0 ? " tablet" : " drops"),
                           {combo_vtms[c]},
                           {{"atc", "N02BB52"}, {"pharmaceutical_form", f == 0 ? "tablet" : "oral drops"}}));
    }
  }

  // Virtual packs of the 500 mg tablet.
  std::vector<std::string> vmpps{kDipyroneVmpp};
  out.push_back(entity(kDipyroneVmpp, CanonicalLevel::Vmpp, "dipyrone 500 mg tablet x 30",
                       {kDipyroneVmp},
                       {{"prescribable_unit", "tablet"}, {"packaging", "blister"}, {"pack_size", "30"}}));
  const std::vector<int> sizes{4, 10, 12, 20, 24, 50, 100, 200, 240, 250, 300, 500};
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    vmpps.push_back(numbered("VMPP", 100000001 + static_cast<int>(i)));
    out.push_back(entity(vmpps.back(), CanonicalLevel::Vmpp,
                         "dipyrone 500 mg tablet x " + std::to_string(sizes[i]), {kDipyroneVmp},
                         {{"prescribable_unit", "tablet"},
                          {"packaging", sizes[i] >= 200 ? "hospital blister" : "blister"},
                          {"pack_size", std::to_string(sizes[i])}}));
  }

  // 92 trade presentations from 24 manufacturers: 17 for the x 30 pack, the
  // rest spread over the other twelve virtual packs.
  std::vector<std::size_t> per_vmpp{17, 7, 7, 7, 6, 6, 6, 6, 6, 6, 6, 6, 6};
  int k = 0;
  for (std::size_t v = 0; v < vmpps.size(); ++v) {
    for (std::size_t j = 0; j < per_vmpp[v]; ++j, ++k) {
      bool reference = k == 0;
      auto amp = reference ? std::string(kDipyroneAmp) : numbered("AMP", 100000000 + k);
      auto ampp = reference ? std::string(kDipyroneAmpp) : numbered("AMPP", 100000000 + k);
      auto org = k % 24 == 0 ? std::string("ORG-000000032") : numbered("ORG", 100000000 + k % 24);
      auto brand = reference ? std::string("NOVALGINA") : "DIPIRONA " + std::to_string(k);
      auto pack = v == 0 ? std::string("30") : std::to_string(sizes[v - 1]);
      char ean[16];
      std::snprintf(ean, sizeof ean, "789%010d", 100000 + k);
      std::string ean_value = reference ? "7891058008635" : ean;
      out.push_back(entity(amp, CanonicalLevel::Amp, brand + " 500 mg", {vmpps[v]},
                           {{"brand", brand},
                            {"manufacturer_org", org},
                            {"registration", reference ? "PMA 183260351"
                                                       : "PMA " + std::to_string(183300000 + k)},
                            {"therapeutic_class", "non-narcotic analgesics"}}));
      out.push_back(entity(ampp, CanonicalLevel::Ampp, brand + " 500 mg box x " + pack, {amp},
                           {{"ean", ean_value},
                            {"label", reference ? "OTC" : (k % 3 == 0 ? "OTC" : "prescription")},
                            {"authorization_status", "active"},
                            {"regulatory_category", reference ? "reference" : "generic"},
                            {"storage", "15-30 \xC2\xB0""C"},
                            {"shelf_life", "24 months"}}));
      out.push_back(identifier("EAN", ean_value, ampp));
    }
  }

  // Substance identifiers: three published codes and fourteen fixture codes.
  out.push_back(identifier("CAS", "5907-38-0", sub));
  out.push_back(identifier("UNII", "6429L0L52Y", sub));
  out.push_back(identifier("DCB", "9564", sub));
  for (const char* scheme : {"ChEBI", "ChEMBL", "DrugBank", "PubChem", "KEGG", "MeSH", "RxNorm",
                             "SNOMED", "EDQM", "INN", "EC", "Wikidata", "HMDB", "NCIt"}) {
    out.push_back(identifier(scheme, std::string("FX-") + scheme + "-33943", sub));
  }

  const std::vector<std::pair<std::string, std::string>> synonyms{
      {"dipyrone", "en"},          {"dipirona", "pt"},         {"metamizol", "es"},
      {"metamizole", "en"},        {"analgin", "ru"},          {"novaminsulfon", "de"},
      {"metamizolum", "la"},       {"dipyronum", "la"},        {"metamizole sodium", "en"},
      {"metamizol sodico", "es"},  {"dipirona sodica", "pt"},  {"dipirona monoidratada", "pt"},
      {"dipyrone monohydrate", "en"}, {"metamizolo", "it"},    {"metamizole sodique", "fr"},
      {"Metamizol-Natrium", "de"}, {"sulpyrine", "ja"},        {"noramidopyrine", "fr"},
      {"methampyrone", "en"},      {"metamizol sodowy", "pl"}, {"dipiron", "tr"},
      {"metamitsoli", "fi"},       {"analgina", "it"},         {"novalgin", "de"}};
  for (const auto& [text, lang] : synonyms) {
    out.push_back({{"record", "synonym"}, {"entity_id", sub}, {"text", text}, {"language", lang}});
  }
  return out;
}

}  // namespace

json load_dipyrone_fixture(const std::filesystem::path& data_dir) {
  Workspace ws(data_dir, stepping_clock(kFixtureEpoch, 60));
  if (!ws.empty()) {
    throw Error(ErrorCode::InvalidArgument, "fixture needs an empty data directory",
                json{{"data_dir", data_dir.string()}});
  }

  // Documents, currency and reader trees.
  std::map<std::string, patos::DocumentRef> docs;
  std::vector<DocSpec> specs = document_specs();
  for (const auto& d : specs) {
    patos::IngestRequest req;
    req.bytes = to_bytes("%PDF-1.4\n%fixture rendition\n" + d.text);
    req.lineage = d.lineage;
    req.version_label = d.version_label;
    req.format = d.lineage.source == "PUBLIC_DATABASE" ? "html" : "pdf";
    req.capture_date = d.capture_date;
    req.active_ingredient = "dipyrone";
    docs[d.key] = ws.documents().ingest_document(req);
  }
  ws.documents().mark_current(docs.at("prof").doc_id);
  ws.documents().mark_current(docs.at("pat").doc_id);
  for (const auto& d : specs) {
    if (!d.indexed) continue;
    ws.documents().promote_maturity(docs.at(d.key).doc_id, patos::MaturityStage::Cleaned,
                                    to_bytes(d.text));
    ws.index(docs.at(d.key).doc_id);
  }

  auto cite = [&](const Cite& c) {
    const auto& ref = docs.at(c.doc);
    return lector::ProvenanceChainEntry{ref.doc_id, ref.version_label, ref.checksum, c.nodes};
  };

  // Packs: 37 argued through review, then the recorded silence.
  auto& packs = ws.packs();
  std::vector<std::string> accepted;
  for (const auto& p : pack_specs()) {
    lector::PackInput in;
    in.question = {p.question, p.type};
    in.response = {p.assertion, p.valid_when, p.invalid_when};
    for (const auto& c : p.cites) in.provenance.push_back(cite(c));
    in.limits = lector::EpistemicLimits{p.divergences, p.gaps, p.dependencies, {}};
    in.focus = kFocus;
    packs.create_pack(in, p.id);
    packs.submit_for_review(p.id);
    packs.curate(p.id, p.accept ? lector::Verdict::Accept : lector::Verdict::Reject, p.curator,
                 p.justification);
    if (p.accept) accepted.push_back(p.id);
  }

  const std::string silence = "Is dipyrone safe for patients with G6PD deficiency?";
  lector::PackInput in;
  in.question = {silence, AssertionType::NormativeSilence};
  in.response = {lector::kNoPronouncement, {}, {}};
  in.provenance = {cite({"prof", {"1.3", "1.4"}})};
  in.limits = lector::EpistemicLimits{
      {}, {}, {"Clinical judgment required; consult specialized literature"},
      {silence, "Silence does NOT equate to safety or permission"}};
  in.focus = kFocus;
  packs.create_pack(in, std::string("EP-039"));
  packs.submit_for_review("EP-039");
  packs.curate("EP-039", lector::Verdict::Accept, "curator-01",
               "Sections 1.3 and 1.4 reviewed; no pronouncement on G6PD deficiency.");
  accepted.push_back("EP-039");

  // Ontology, then links: every accepted pack anchors to the VMP; the
  // substance takes all but the formulation-specific dosing packs and the
  // silence; the pack levels take fixed slices of the accepted list.
  ws.ontology().load_records(ontology_records(), nullptr);
  std::vector<json> links;
  auto link = [&](const std::string& pack, const std::string& entity_id) {
    links.push_back({{"record", "link"}, {"pack_id", pack}, {"entity_id", entity_id}});
  };
  for (const auto& id : accepted) link(id, kDipyroneVmp);
  for (const auto& id : accepted) {
    auto type = packs.get(id).question.assertion_type;
    if (type != AssertionType::Dosing && type != AssertionType::NormativeSilence) {
      link(id, kDipyroneSubstance);
    }
  }
  for (std::size_t i = 0; i < 27; ++i) link(accepted[i], kDipyroneVmpp);
  for (std::size_t i = accepted.size() - 25; i < accepted.size(); ++i) link(accepted[i], kDipyroneAmpp);
  ws.ontology().load_records(links, &packs);

  ws.refract(kDipyroneAmpp, prisma::ViewKind::MppRegulatory);
  ws.refract(kDipyroneVmp, prisma::ViewKind::VmpComplete);
  ws.refract(kDipyroneVmpp, prisma::ViewKind::Dispensation);
  ws.refract(kDipyroneSubstance, prisma::ViewKind::SubstanceProfile);

  return ws.metrics().to_json();
}

}  // namespace plp::service
