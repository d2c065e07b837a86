#include "plp/prisma/refraction.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <thread>

#include <fcntl.h>
#include <unistd.h>

#include "plp/common/error.hpp"
#include "plp/common/files.hpp"
#include "plp/common/hashing.hpp"
#include "plp/lector/illocution.hpp"
#include "plp/lector/pack_registry.hpp"
#include "plp/patos/document_store.hpp"

namespace plp::prisma {

using nlohmann::json;
using lector::AssertionType;

namespace {

constexpr const char* kEpoch = "1970-01-01T00:00:00Z";

// Regulatory never carries dosing or composition; dispensing never carries
// registration internals. Tests pin these lists.
const std::set<std::string> kRegulatoryKeys{
    "registration", "authorization_status", "marketing_date", "label",     "therapeutic_class",
    "regulatory_category", "storage",       "shelf_life",     "ean",       "manufacturer"};
const std::set<std::string> kPrescriptionKeys{
    "substance", "concentration", "atc",   "ddd", "pharmaceutical_form", "form_taxonomy",
    "route",     "composition",   "available_presentation"};
const std::set<std::string> kDispensingKeys{"prescribable_unit", "packaging", "pack_size",
                                            "trade_product"};
const std::set<std::string> kProfileKeys{"identifier", "synonym", "vtm", "vmp"};

std::string scope_domain(AssertionType t) {
  switch (t) {
    case AssertionType::Indication: return "therapeutic_use";
    case AssertionType::Contraindication:
    case AssertionType::Warning:
    case AssertionType::Precaution: return "patient_safety";
    case AssertionType::Dosing: return "posology";
    case AssertionType::Interaction: return "drug_interaction";
    case AssertionType::AdverseReaction: return "pharmacovigilance";
    case AssertionType::SpecialPopulation: return "special_population";
    case AssertionType::NormativeSilence: return "regulatory_silence";
  }
  return "unspecified";
}

class Builder {
 public:
  Builder(const std::string& root_id, ViewKind view) : root_(root_id), view_(view) {}

  void node(const std::string& id, const char* type, std::string label, json props = json::object()) {
    nodes_.try_emplace(id, GraphNode{id, type, std::move(label), std::move(props)});
  }
  void edge(const std::string& from, const std::string& to, const char* relation) {
    edges_.insert({from, to, relation});
  }

  void attribute(const std::string& key, const std::string& value, const std::string& suffix = "",
                 json extra = json::object()) {
    if (!attribute_allowlist(view_).contains(key)) return;
    std::string id = "attribute:" + key + (suffix.empty() ? "" : ":" + suffix);
    extra["key"] = key;
    extra["value"] = value;
    node(id, "attribute", value, std::move(extra));
    edge(root_, id, "has_attribute");
  }

  ContextGraph finish(ContextGraph g) {
    g.nodes.reserve(nodes_.size());
    for (auto& [id, n] : nodes_) g.nodes.push_back(std::move(n));
    g.edges.assign(edges_.begin(), edges_.end());
    return g;
  }

 private:
  std::string root_;
  ViewKind view_;
  std::map<std::string, GraphNode> nodes_;
  std::set<GraphEdge> edges_;
};

const std::string* attr(const CanonicalEntity* e, const std::string& key) {
  if (!e) return nullptr;
  auto it = e->attributes.find(key);
  return it == e->attributes.end() ? nullptr : &it->second;
}

std::string manufacturer_name(const OntologyData& onto, const std::string& org_id) {
  const auto* org = onto.organization(org_id);
  return org ? org->name : org_id;
}

void regulatory_attributes(const OntologyData& onto, const CanonicalEntity& ampp, Builder& b) {
  const CanonicalEntity* amp =
      ampp.parent_ids.empty() ? nullptr : onto.find(*ampp.parent_ids.begin());
  for (const auto& key : kRegulatoryKeys) {
    if (key == "manufacturer") continue;
    const auto* v = attr(&ampp, key);
    if (!v) v = attr(amp, key);
    if (v) b.attribute(key, *v);
  }
  const auto* org = attr(&ampp, "manufacturer_org");
  if (!org) org = attr(amp, "manufacturer_org");
  if (org) b.attribute("manufacturer", manufacturer_name(onto, *org), "", {{"org_id", *org}});
}

void prescription_attributes(const OntologyData& onto, const CanonicalEntity& vmp, Builder& b) {
  for (const auto& id : onto.ancestors(vmp.entity_id)) {
    const auto& e = onto.get(id);
    if (e.level == CanonicalLevel::Substance) {
      b.attribute("substance", e.display_name, id, {{"entity_id", id}});
    }
  }
  for (const char* key : {"concentration", "atc", "ddd", "pharmaceutical_form", "form_taxonomy",
                          "route", "composition"}) {
    if (const auto* v = attr(&vmp, key)) b.attribute(key, *v);
  }
  for (const auto& id : onto.children_of(vmp.entity_id)) {
    b.attribute("available_presentation", onto.get(id).display_name, id, {{"entity_id", id}});
  }
}

void dispensing_attributes(const OntologyData& onto, const CanonicalEntity& vmpp, Builder& b) {
  for (const char* key : {"prescribable_unit", "packaging", "pack_size"}) {
    if (const auto* v = attr(&vmpp, key)) b.attribute(key, *v);
  }
  for (const auto& amp_id : onto.children_of(vmpp.entity_id)) {
    const auto& amp = onto.get(amp_id);
    for (const auto& ampp_id : onto.children_of(amp_id)) {
      const auto& ampp = onto.get(ampp_id);
      json extra{{"entity_id", ampp_id}, {"product_id", amp_id}};
      const auto* brand = attr(&ampp, "brand");
      if (!brand) brand = attr(&amp, "brand");
      extra["brand"] = brand ? json(*brand) : json(nullptr);
      const auto* org = attr(&ampp, "manufacturer_org");
      if (!org) org = attr(&amp, "manufacturer_org");
      extra["manufacturer"] = org ? json(manufacturer_name(onto, *org)) : json(nullptr);
      const auto* ean = attr(&ampp, "ean");
      extra["ean"] = ean ? json(*ean) : json(nullptr);
      b.attribute("trade_product", ampp.display_name, ampp_id, std::move(extra));
    }
  }
}

void profile_attributes(const OntologyData& onto, const CanonicalEntity& sub, Builder& b) {
  for (const auto& id : onto.identifiers_of(sub.entity_id)) {
    b.attribute("identifier", id.value, id.scheme + ":" + id.value, {{"scheme", id.scheme}});
  }
  for (const auto& s : onto.synonyms_of(sub.entity_id)) {
    b.attribute("synonym", s.text, s.text,
                {{"language", s.language ? json(*s.language) : json(nullptr)}});
  }
  for (const auto& vtm_id : onto.children_of(sub.entity_id)) {
    b.attribute("vtm", onto.get(vtm_id).display_name, vtm_id, {{"entity_id", vtm_id}});
    for (const auto& vmp_id : onto.children_of(vtm_id)) {
      b.attribute("vmp", onto.get(vmp_id).display_name, vmp_id,
                  {{"entity_id", vmp_id}, {"vtm_id", vtm_id}});
    }
  }
}

// Entities whose links feed the view.
std::set<std::string> scope_entities(const OntologyData& onto, const CanonicalEntity& root,
                                     ViewKind view) {
  std::set<std::string> scope{root.entity_id};
  switch (view) {
    case ViewKind::MppRegulatory:
    case ViewKind::Dispensation:
      for (const auto& c : onto.children_of(root.entity_id)) {
        const auto& child = onto.get(c);
        if (child.level != CanonicalLevel::Amp && child.level != CanonicalLevel::Ampp) continue;
        scope.insert(c);
        for (const auto& gc : onto.children_of(c)) {
          if (onto.get(gc).level == CanonicalLevel::Ampp) scope.insert(gc);
        }
      }
      break;
    case ViewKind::VmpComplete: {
      auto up = onto.ancestors(root.entity_id);
      auto down = onto.descendants(root.entity_id);
      scope.insert(up.begin(), up.end());
      scope.insert(down.begin(), down.end());
      break;
    }
    case ViewKind::SubstanceProfile:
      for (const auto& c : onto.children_of(root.entity_id)) {
        if (onto.get(c).level == CanonicalLevel::Vtm) scope.insert(c);
      }
      break;
  }
  return scope;
}

void add_assertion(const RefractionCorpus& corpus, const lector::EvidencePack& pack,
                   const std::set<std::string>& linked_via, const std::string& root_id,
                   Builder& b) {
  const auto& id = pack.pack_id;
  const auto type = pack.question.assertion_type;
  const auto cls = lector::to_string(lector::illocutionary_class(type));
  const std::string assertion = "assertion:" + id;
  const std::string q_pack = "qualifier:evidence_pack:" + id;
  const std::string q_type = "qualifier:assertion_type:" + id;
  const std::string q_limits = "qualifier:epistemic_limits:" + id;
  const std::string q_decision = "qualifier:curatorial_decision:" + id;

  b.node(assertion, "assertion", pack.response.assertion,
         {{"pack_id", id},
          {"assertion_type", lector::to_string(type)},
          {"illocutionary_class", cls},
          {"question", pack.question.text},
          {"validity_conditions", pack.response.validity_conditions},
          {"invalidity_conditions", pack.response.invalidity_conditions},
          {"linked_via", linked_via}});
  b.edge(root_id, assertion, "asserts");

  json provenance = json::array();
  for (const auto& e : pack.provenance) provenance.push_back(lector::to_json(e));
  b.node(q_pack, "qualifier", id,
         {{"qualifier", "evidence_pack"},
          {"pack_id", id},
          {"focus", pack.focus},
          {"derived_from", pack.derived_from ? json(*pack.derived_from) : json(nullptr)},
          {"provenance", provenance}});
  b.node(q_type, "qualifier", lector::to_string(type),
         {{"qualifier", "assertion_type"},
          {"assertion_type", lector::to_string(type)},
          {"illocutionary_class", cls},
          {"illocutionary_force", lector::illocutionary_force(type)}});
  b.node(q_limits, "qualifier", "epistemic limits",
         {{"qualifier", "epistemic_limits"},
          {"divergences", pack.limits.divergences},
          {"gaps", pack.limits.gaps},
          {"dependencies", pack.limits.dependencies},
          {"silences", pack.limits.silences}});
  json decision{{"qualifier", "curatorial_decision"},
                {"verdict", "accept"},
                {"curator", pack.status.curator.value_or("")},
                {"justification", pack.status.justification.value_or("")},
                {"decided_at", pack.status.decided_at.value_or("")},
                {"decision_id", nullptr}};
  if (const auto* d = corpus.accept_decision(id)) decision["decision_id"] = d->decision_id;
  b.node(q_decision, "qualifier", pack.status.curator.value_or(""), std::move(decision));
  for (const auto* q : {&q_pack, &q_type, &q_limits, &q_decision}) {
    b.edge(assertion, *q, "qualified_by");
  }

  for (const auto& e : pack.provenance) {
    if (const auto* source = corpus.authority_of(e.doc_id)) {
      const std::string node = "authority:" + *source;
      b.node(node, "authority", *source, {{"source", *source}});
      b.edge(q_pack, node, "issued_by");
    }
  }
  const auto domain = scope_domain(type);
  b.node("scope:" + domain, "scope", domain, {{"domain", domain}});
  b.edge(q_pack, "scope:" + domain, "scoped_to");
  for (const auto& v : pack.response.validity_conditions) {
    b.node("population:" + v, "population", v);
    b.edge(q_pack, "population:" + v, "applies_to");
  }
  for (const auto& d : pack.limits.dependencies) {
    b.node("clinical_context:" + d, "clinical_context", d);
    b.edge(q_pack, "clinical_context:" + d, "valid_in");
  }
  for (const auto& v : pack.response.invalidity_conditions) {
    b.node("clinical_context:" + v, "clinical_context", v);
    b.edge(q_pack, "clinical_context:" + v, "excluded_in");
  }
}

// Graph without generated_at / content_digest.
ContextGraph build(const RefractionCorpus& corpus, const CanonicalEntity& root, ViewKind view) {
  const auto& onto = corpus.ontology();
  Builder b(root.entity_id, view);
  b.node(root.entity_id, "entity", root.display_name,
         {{"level", to_string(root.level)}, {"entity_id", root.entity_id}});
  switch (view) {
    case ViewKind::MppRegulatory: regulatory_attributes(onto, root, b); break;
    case ViewKind::VmpComplete: prescription_attributes(onto, root, b); break;
    case ViewKind::Dispensation: dispensing_attributes(onto, root, b); break;
    case ViewKind::SubstanceProfile: profile_attributes(onto, root, b); break;
  }

  std::map<std::string, std::set<std::string>> linked;
  for (const auto& e : scope_entities(onto, root, view)) {
    for (const auto& l : onto.links_for_entity(e)) linked[l.pack_id].insert(e);
  }
  for (const auto& [pack_id, via] : linked) {
    if (const auto* pack = corpus.accepted_pack(pack_id)) {
      add_assertion(corpus, *pack, via, root.entity_id, b);
    }
  }
  ContextGraph g;
  g.graph_id = make_graph_id(view, root.entity_id);
  g.view = view;
  g.root_entity_id = root.entity_id;
  return b.finish(std::move(g));
}

// Appends `s` as a JSON string literal, escaped exactly as nlohmann's dump().
void append_quoted(std::string& out, const std::string& s) {
  static const char* hex = "0123456789abcdef";
  out.push_back('"');
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          out += "\\u00";
          out.push_back(hex[c >> 4]);
          out.push_back(hex[c & 0xF]);
        } else {
          out.push_back(static_cast<char>(c));
        }
    }
  }
  out.push_back('"');
}

// Per-array renderings, assembled into the body (digest input) and the full
// document without building a json tree for the whole graph.
struct Rendered {
  std::string edges;
  std::string nodes;
  std::string graph_id;
  std::string root;
  std::string view;

  explicit Rendered(const ContextGraph& g) {
    edges.reserve(g.edges.size() * 96);
    edges.push_back('[');
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
      const auto& x = g.edges[i];
      if (i) edges.push_back(',');
      edges += "{\"from\":";
      append_quoted(edges, x.from);
      edges += ",\"relation\":";
      append_quoted(edges, x.relation);
      edges += ",\"to\":";
      append_quoted(edges, x.to);
      edges.push_back('}');
    }
    edges.push_back(']');

    nodes.reserve(g.nodes.size() * 160);
    nodes.push_back('[');
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const auto& x = g.nodes[i];
      if (i) nodes.push_back(',');
      nodes += "{\"id\":";
      append_quoted(nodes, x.id);
      nodes += ",\"label\":";
      append_quoted(nodes, x.label);
      nodes += ",\"props\":";
      nodes += x.props.dump();
      nodes += ",\"type\":";
      append_quoted(nodes, x.type);
      nodes.push_back('}');
    }
    nodes.push_back(']');

    append_quoted(graph_id, g.graph_id);
    append_quoted(root, g.root_entity_id);
    append_quoted(view, to_string(g.view));
  }

  std::string body() const {
    return "{\"edges\":" + edges + ",\"graph_id\":" + graph_id + ",\"nodes\":" + nodes +
           ",\"root_entity_id\":" + root + ",\"view\":" + view + "}";
  }

  std::string full(const std::string& digest, const std::string& generated_at) const {
    return "{\"content_digest\":" + json(digest).dump() + ",\"edges\":" + edges +
           ",\"generated_at\":" + json(generated_at).dump() + ",\"graph_id\":" + graph_id +
           ",\"nodes\":" + nodes + ",\"root_entity_id\":" + root + ",\"view\":" + view + "}";
  }
};

const CanonicalEntity& checked_root(const RefractionCorpus& corpus, const std::string& entity_id,
                                    ViewKind view) {
  const auto& root = corpus.ontology().get(entity_id);
  if (root.level != root_level(view)) {
    throw Error(ErrorCode::LevelViewMismatch,
                to_string(view) + " applies to " + to_string(root_level(view)) + " entities; " +
                    entity_id + " is " + to_string(root.level),
                json{{"entity_id", entity_id},
                     {"level", to_string(root.level)},
                     {"view", to_string(view)}});
  }
  return root;
}

}  // namespace

std::string to_string(ViewKind v) {
  switch (v) {
    case ViewKind::MppRegulatory: return "CTX_MPP_REGULATORY";
    case ViewKind::VmpComplete: return "CTX_VMP_COMPLETE";
    case ViewKind::Dispensation: return "CTX_DISPENSATION";
    case ViewKind::SubstanceProfile: return "CTX_SUBSTANCE_PROFILE";
  }
  return "CTX_VMP_COMPLETE";
}

std::optional<ViewKind> view_from_string(std::string_view s) {
  for (auto v : kViews) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

CanonicalLevel root_level(ViewKind v) {
  switch (v) {
    case ViewKind::MppRegulatory: return CanonicalLevel::Ampp;
    case ViewKind::VmpComplete: return CanonicalLevel::Vmp;
    case ViewKind::Dispensation: return CanonicalLevel::Vmpp;
    case ViewKind::SubstanceProfile: return CanonicalLevel::Substance;
  }
  return CanonicalLevel::Vmp;
}

const std::set<std::string>& attribute_allowlist(ViewKind v) {
  switch (v) {
    case ViewKind::MppRegulatory: return kRegulatoryKeys;
    case ViewKind::VmpComplete: return kPrescriptionKeys;
    case ViewKind::Dispensation: return kDispensingKeys;
    case ViewKind::SubstanceProfile: return kProfileKeys;
  }
  return kPrescriptionKeys;
}

std::string make_graph_id(ViewKind v, const std::string& entity_id) {
  return to_string(v) + "--" + entity_id;
}

const GraphNode* ContextGraph::node(std::string_view id) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                             [](const GraphNode& n, std::string_view key) { return n.id < key; });
  return it != nodes.end() && it->id == id ? &*it : nullptr;
}

std::vector<const GraphNode*> ContextGraph::nodes_of_type(std::string_view type) const {
  std::vector<const GraphNode*> out;
  for (const auto& n : nodes) {
    if (n.type == type) out.push_back(&n);
  }
  return out;
}

json to_json(const GraphNode& n) {
  return {{"id", n.id}, {"type", n.type}, {"label", n.label}, {"props", n.props}};
}

json to_json(const GraphEdge& e) {
  return {{"from", e.from}, {"to", e.to}, {"relation", e.relation}};
}

json to_json(const ContextGraph& g) {
  return json::parse(canonical_text(g));
}

ContextGraph graph_from_json(const json& j) {
  try {
    ContextGraph g;
    g.graph_id = j.at("graph_id").get<std::string>();
    auto view = view_from_string(j.at("view").get<std::string>());
    if (!view) throw Error(ErrorCode::InvalidArgument, "unknown view");
    g.view = *view;
    g.root_entity_id = j.at("root_entity_id").get<std::string>();
    for (const auto& n : j.at("nodes")) {
      g.nodes.push_back({n.at("id").get<std::string>(), n.at("type").get<std::string>(),
                         n.at("label").get<std::string>(), n.at("props")});
    }
    for (const auto& e : j.at("edges")) {
      g.edges.push_back({e.at("from").get<std::string>(), e.at("to").get<std::string>(),
                         e.at("relation").get<std::string>()});
    }
    g.generated_at = j.value("generated_at", "");
    g.content_digest = j.value("content_digest", "");
    return g;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed graph: ") + e.what());
  }
}

std::string canonical_text(const ContextGraph& g) {
  return Rendered(g).full(g.content_digest, g.generated_at);
}

std::string compute_digest(const ContextGraph& g) { return sha256_hex(Rendered(g).body()); }

// ------------------------------------------------------------ RefractionCorpus

RefractionCorpus::RefractionCorpus(OntologyData ontology) : ontology_(std::move(ontology)) {
  stamp();
}

RefractionCorpus::RefractionCorpus(OntologyData ontology, const lector::PackRegistry& packs,
                                   const patos::DocumentStore* store)
    : ontology_(std::move(ontology)) {
  for (auto& p : packs.packs_in_state(lector::PackState::Accepted)) {
    for (const auto& e : p.provenance) {
      if (authorities_.contains(e.doc_id) || !store) continue;
      if (auto doc = store->find(e.doc_id)) authorities_[e.doc_id] = doc->lineage.source;
    }
    accepted_.emplace(p.pack_id, std::move(p));
  }
  for (auto& d : packs.decisions()) {
    if (d.verdict == lector::Verdict::Accept && accepted_.contains(d.pack_id)) {
      decisions_[d.pack_id] = std::move(d);
    }
  }
  stamp();
}

void RefractionCorpus::stamp() {
  generated_at_ = kEpoch;
  for (const auto& [id, d] : decisions_) generated_at_ = std::max(generated_at_, d.timestamp);
  for (const auto& l : ontology_.links()) generated_at_ = std::max(generated_at_, l.created_at);
}

const lector::EvidencePack* RefractionCorpus::accepted_pack(const std::string& pack_id) const {
  auto it = accepted_.find(pack_id);
  return it == accepted_.end() ? nullptr : &it->second;
}

const lector::CuratorialDecision* RefractionCorpus::accept_decision(
    const std::string& pack_id) const {
  auto it = decisions_.find(pack_id);
  return it == decisions_.end() ? nullptr : &it->second;
}

const std::string* RefractionCorpus::authority_of(const std::string& doc_id) const {
  auto it = authorities_.find(doc_id);
  return it == authorities_.end() ? nullptr : &it->second;
}

// ------------------------------------------------------------------ operations

ContextGraph refract(const RefractionCorpus& corpus, const std::string& entity_id, ViewKind view) {
  auto g = build(corpus, checked_root(corpus, entity_id, view), view);
  g.generated_at = corpus.generated_at();
  g.content_digest = compute_digest(g);
  return g;
}

ContextGraph filter_assertions(const ContextGraph& graph,
                               const std::set<lector::AssertionType>& types) {
  std::set<std::string> keep;
  std::set<std::string> packs_kept;
  for (const auto& n : graph.nodes) {
    if (n.type == "entity" || n.type == "attribute") keep.insert(n.id);
    if (n.type != "assertion") continue;
    auto t = lector::assertion_type_from_string(n.props.value("assertion_type", ""));
    if (t && types.contains(*t)) {
      keep.insert(n.id);
      packs_kept.insert("qualifier:evidence_pack:" + n.props.value("pack_id", ""));
    }
  }
  for (const auto& e : graph.edges) {
    if (e.relation == "qualified_by" && keep.contains(e.from)) keep.insert(e.to);
  }
  for (const auto& e : graph.edges) {
    if (packs_kept.contains(e.from)) keep.insert(e.to);
  }

  ContextGraph out;
  out.graph_id = graph.graph_id;
  out.view = graph.view;
  out.root_entity_id = graph.root_entity_id;
  out.generated_at = graph.generated_at;
  for (const auto& n : graph.nodes) {
    if (keep.contains(n.id)) out.nodes.push_back(n);
  }
  for (const auto& e : graph.edges) {
    if (keep.contains(e.from) && keep.contains(e.to)) out.edges.push_back(e);
  }
  out.content_digest = compute_digest(out);
  return out;
}

// ------------------------------------------------------------------ GraphStore

GraphStore::GraphStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
  auto manifest = dir_ / "manifest.jsonl";
  if (!std::filesystem::exists(manifest)) return;
  for (const auto& r : read_json_lines(manifest)) {
    ManifestEntry e{r.at("graph_id"), r.at("view"), r.at("root_entity_id"), r.at("digest")};
    manifest_[e.graph_id] = e;
  }
}

std::filesystem::path GraphStore::graph_path(const std::string& graph_id) const {
  return dir_ / (graph_id + ".json");
}

void GraphStore::write_graph_file(const std::string& graph_id, const std::string& bytes) const {
  auto path = graph_path(graph_id);
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  std::size_t done = 0;
  while (done < bytes.size()) {
    auto n = ::write(fd, bytes.data() + done, bytes.size() - done);
    if (n <= 0) {
      ::close(fd);
      throw Error(ErrorCode::IoFailure, "short write " + path.string());
    }
    done += static_cast<std::size_t>(n);
  }
  if (::close(fd) != 0) throw Error(ErrorCode::IoFailure, "cannot close " + path.string());
}

void GraphStore::record(std::vector<ManifestEntry> entries) {
  std::lock_guard lock(mutex_);
  for (auto& e : entries) manifest_[e.graph_id] = std::move(e);
  std::string text;
  text.reserve(manifest_.size() * 160);
  for (const auto& [id, e] : manifest_) {
    text += "{\"digest\":";
    append_quoted(text, e.digest);
    text += ",\"graph_id\":";
    append_quoted(text, e.graph_id);
    text += ",\"root_entity_id\":";
    append_quoted(text, e.root_entity_id);
    text += ",\"view\":";
    append_quoted(text, e.view);
    text += "}\n";
  }
  write_file_atomic(dir_ / "manifest.jsonl", text);
}

void GraphStore::put(const ContextGraph& graph) {
  write_file_atomic(graph_path(graph.graph_id), canonical_text(graph));
  record({{graph.graph_id, to_string(graph.view), graph.root_entity_id, graph.content_digest}});
}

std::optional<std::string> GraphStore::read_bytes(const std::string& graph_id) const {
  auto path = graph_path(graph_id);
  if (graph_id.find('/') != std::string::npos || !std::filesystem::exists(path)) {
    return std::nullopt;
  }
  return read_text_file(path);
}

std::optional<ContextGraph> GraphStore::load(const std::string& graph_id) const {
  auto bytes = read_bytes(graph_id);
  if (!bytes) return std::nullopt;
  return graph_from_json(json::parse(*bytes));
}

std::vector<ManifestEntry> GraphStore::manifest() const {
  std::lock_guard lock(mutex_);
  std::vector<ManifestEntry> out;
  for (const auto& [id, e] : manifest_) out.push_back(e);
  return out;
}

std::size_t GraphStore::size() const {
  std::lock_guard lock(mutex_);
  return manifest_.size();
}

json MaterializationReport::to_json() const {
  json f = json::array();
  for (const auto& x : failures) {
    f.push_back({{"entity_id", x.entity_id}, {"view", x.view}, {"code", x.code},
                 {"message", x.message}});
  }
  return {{"graph_count", graph_count},
          {"elapsed_seconds", elapsed_seconds},
          {"graphs_per_view", graphs_per_view},
          {"failures", f}};
}

MaterializationReport refract_all(const RefractionCorpus& corpus,
                                  const std::vector<ViewKind>& views, GraphStore& out,
                                  unsigned threads) {
  struct Task {
    ViewKind view;
    const CanonicalEntity* entity;
  };
  std::vector<Task> tasks;
  for (auto v : views) {
    for (const auto* e : corpus.ontology().entities_at(root_level(v))) tasks.push_back({v, e});
  }

  const auto start = std::chrono::steady_clock::now();
  std::vector<std::optional<ManifestEntry>> done(tasks.size());
  std::vector<RefractionFailure> failures;
  std::mutex failures_mutex;
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      const auto& t = tasks[i];
      try {
        auto g = build(corpus, *t.entity, t.view);
        Rendered r(g);
        auto digest = sha256_hex(r.body());
        out.write_graph_file(g.graph_id, r.full(digest, corpus.generated_at()));
        done[i] = ManifestEntry{g.graph_id, to_string(t.view), g.root_entity_id, digest};
      } catch (const std::exception& e) {
        const auto* err = dynamic_cast<const Error*>(&e);
        std::lock_guard lock(failures_mutex);
        failures.push_back({t.entity->entity_id, to_string(t.view),
                            err ? std::string(err->code_name()) : std::string("internal"), e.what()});
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, tasks.size())));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(work);
  }

  MaterializationReport report;
  std::vector<ManifestEntry> entries;
  entries.reserve(tasks.size());
  for (auto& d : done) {
    if (!d) continue;
    ++report.graphs_per_view[d->view];
    entries.push_back(std::move(*d));
  }
  report.graph_count = entries.size();
  out.record(std::move(entries));
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::sort(failures.begin(), failures.end(), [](const auto& a, const auto& b) {
    return std::tie(a.view, a.entity_id) < std::tie(b.view, b.entity_id);
  });
  report.failures = std::move(failures);
  return report;
}

// ----------------------------------------------------------------------- trace

std::string to_string(EntryStatus s) {
  switch (s) {
    case EntryStatus::Verified: return "verified";
    case EntryStatus::Corrupted: return "corrupted";
    case EntryStatus::Missing: return "missing";
  }
  return "missing";
}

bool TraceChain::verified() const {
  return !entries.empty() && std::all_of(entries.begin(), entries.end(), [](const auto& e) {
    return e.status == EntryStatus::Verified;
  });
}

json TraceChain::to_json() const {
  json list = json::array();
  for (const auto& e : entries) {
    list.push_back({{"doc_id", e.doc_id},
                    {"version_label", e.version_label},
                    {"checksum", e.checksum},
                    {"node_ids", e.node_ids},
                    {"status", to_string(e.status)},
                    {"detail", e.detail}});
  }
  return {{"graph_id", graph_id},
          {"assertion_node_id", assertion_node_id},
          {"pack_id", pack_id},
          {"assertion_type", assertion_type},
          {"entries", list},
          {"verified", verified()}};
}

TraceChain trace(const ContextGraph& graph, const std::string& node_id,
                 const patos::DocumentStore& store) {
  const auto* node = graph.node(node_id);
  if (!node || node->type != "assertion") {
    throw Error(ErrorCode::NotAnAssertionNode,
                node_id + (node ? " is a " + node->type + " node" : " is not in the graph"),
                json{{"graph_id", graph.graph_id}, {"node_id", node_id}});
  }
  TraceChain chain;
  chain.graph_id = graph.graph_id;
  chain.assertion_node_id = node_id;
  chain.pack_id = node->props.value("pack_id", "");
  chain.assertion_type = node->props.value("assertion_type", "");

  const auto* q = graph.node("qualifier:evidence_pack:" + chain.pack_id);
  if (!q) return chain;
  for (const auto& p : q->props.at("provenance")) {
    TraceEntry e;
    e.doc_id = p.at("doc_id").get<std::string>();
    e.version_label = p.at("version_label").get<std::string>();
    e.checksum = p.at("checksum").get<std::string>();
    e.node_ids = p.at("node_ids").get<std::set<std::string>>();
    auto doc = store.find(e.doc_id);
    if (!doc) {
      e.status = EntryStatus::Missing;
      e.detail = "document not preserved";
    } else if (doc->version_label != e.version_label || doc->checksum != e.checksum) {
      e.status = EntryStatus::Corrupted;
      e.detail = "cited version or checksum differs from the preserved record";
    } else {
      auto report = store.check_integrity(e.doc_id);
      if (report.ok) {
        e.status = EntryStatus::Verified;
      } else if (report.actual_checksum.empty()) {
        e.status = EntryStatus::Missing;
        e.detail = "blob missing";
      } else {
        e.status = EntryStatus::Corrupted;
        e.detail = "blob hashes to " + report.actual_checksum;
      }
    }
    chain.entries.push_back(std::move(e));
  }
  return chain;
}

TraceChain trace(const GraphStore& graphs, const std::string& graph_id,
                 const std::string& node_id, const patos::DocumentStore& store) {
  auto g = graphs.load(graph_id);
  if (!g) throw Error(ErrorCode::UnknownGraph, "unknown graph " + graph_id,
                      json{{"graph_id", graph_id}});
  return trace(*g, node_id, store);
}

}  // namespace plp::prisma
