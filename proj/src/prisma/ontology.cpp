#include "plp/prisma/ontology.hpp"

#include <algorithm>
#include <cstdio>
#include <mutex>

#include "plp/common/error.hpp"
#include "plp/lector/pack_registry.hpp"

namespace plp::prisma {

using nlohmann::json;

namespace {

struct LevelRow {
  CanonicalLevel level;
  const char* name;
  const char* prefix;
  const char* functional;
  const char* dmd;
  const char* idmp;
};

// nullptr marks a level with no counterpart in the external standard.
constexpr std::array<LevelRow, 6> kRows{{
    {CanonicalLevel::Substance, "SUBSTANCE", "SUB", "Substance", "Substance", "Substance"},
    {CanonicalLevel::Vtm, "VTM", "VTM", "Qualitative Composition", "Virtual Therapeutic Moiety",
     nullptr},
    {CanonicalLevel::Vmp, "VMP", "VMP", "Formulation", "Virtual Medicinal Product",
     "Pharmaceutical Product"},
    {CanonicalLevel::Vmpp, "VMPP", "VMPP", "Pack", "Virtual Medicinal Product Pack", nullptr},
    {CanonicalLevel::Amp, "AMP", "AMP", "Product", "Actual Medicinal Product",
     "Medicinal Product"},
    {CanonicalLevel::Ampp, "AMPP", "AMPP", "Trade Presentation", "Actual Medicinal Product Pack",
     "Packaged Medicinal Product"},
}};

const LevelRow& row(CanonicalLevel level) { return kRows[static_cast<std::size_t>(level)]; }

std::optional<std::string> opt(const char* s) {
  return s ? std::optional<std::string>(s) : std::nullopt;
}

const std::set<std::string> kNoChildren;

std::string require_string(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string() || j.at(key).get<std::string>().empty()) {
    throw Error(ErrorCode::InvalidArgument, std::string("record field '") + key + "' is required",
                json{{"record", j}});
  }
  return j.at(key).get<std::string>();
}

}  // namespace

std::string to_string(CanonicalLevel level) { return row(level).name; }

std::optional<CanonicalLevel> level_from_string(std::string_view s) {
  for (const auto& r : kRows) {
    if (s == r.name) return r.level;
  }
  return std::nullopt;
}

int rank(CanonicalLevel level) { return static_cast<int>(level); }

std::string_view id_prefix(CanonicalLevel level) { return row(level).prefix; }

std::optional<CanonicalLevel> level_of_id(std::string_view entity_id) {
  auto dash = entity_id.find('-');
  if (dash == std::string_view::npos || dash + 1 == entity_id.size()) return std::nullopt;
  auto prefix = entity_id.substr(0, dash);
  for (const auto& r : kRows) {
    if (prefix == r.prefix) return r.level;
  }
  return std::nullopt;
}

ExternalLevelMapping map_external_level(CanonicalLevel level) {
  const auto& r = row(level);
  return {r.functional, opt(r.dmd), opt(r.idmp)};
}

json to_json(const ExternalLevelMapping& m) {
  return {{"functional", m.functional},
          {"dmd", m.dmd ? json(*m.dmd) : json(nullptr)},
          {"idmp", m.idmp ? json(*m.idmp) : json(nullptr)}};
}

std::string to_string(OrgRole role) {
  switch (role) {
    case OrgRole::Manufacturer: return "manufacturer";
    case OrgRole::Regulator: return "regulator";
    case OrgRole::Hospital: return "hospital";
    case OrgRole::Database: return "database";
  }
  return "manufacturer";
}

std::optional<OrgRole> org_role_from_string(std::string_view s) {
  for (auto r : {OrgRole::Manufacturer, OrgRole::Regulator, OrgRole::Hospital, OrgRole::Database}) {
    if (s == to_string(r)) return r;
  }
  return std::nullopt;
}

json to_json(const CanonicalEntity& e) {
  return {{"record", "entity"},
          {"entity_id", e.entity_id},
          {"level", to_string(e.level)},
          {"display_name", e.display_name},
          {"parent_ids", e.parent_ids},
          {"attributes", e.attributes}};
}

json to_json(const ExternalIdentifier& i) {
  return {{"record", "identifier"},
          {"scheme", i.scheme},
          {"value", i.value},
          {"entity_id", i.entity_id}};
}

json to_json(const Synonym& s) {
  return {{"record", "synonym"},
          {"entity_id", s.entity_id},
          {"text", s.text},
          {"language", s.language ? json(*s.language) : json(nullptr)}};
}

json to_json(const Organization& o) {
  return {{"record", "organization"},
          {"org_id", o.org_id},
          {"name", o.name},
          {"role", to_string(o.role)}};
}

json to_json(const CanonicalLink& l) {
  return {{"record", "link"},
          {"link_id", l.link_id},
          {"pack_id", l.pack_id},
          {"entity_id", l.entity_id},
          {"created_at", l.created_at}};
}

CanonicalEntity entity_from_json(const json& j) {
  CanonicalEntity e;
  e.entity_id = require_string(j, "entity_id");
  auto level = level_from_string(require_string(j, "level"));
  if (!level) {
    throw Error(ErrorCode::InvalidArgument, "unknown level " + j.at("level").dump());
  }
  e.level = *level;
  e.display_name = j.value("display_name", "");
  try {
    if (j.contains("parent_ids")) e.parent_ids = j.at("parent_ids").get<std::set<std::string>>();
    if (j.contains("attributes")) {
      e.attributes = j.at("attributes").get<std::map<std::string, std::string>>();
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed entity record: ") + ex.what());
  }
  return e;
}

json to_json(const HierarchyNode& n) {
  json children = json::array();
  for (const auto& c : n.children) children.push_back(to_json(c));
  return {{"entity_id", n.entity.entity_id},
          {"level", to_string(n.entity.level)},
          {"display_name", n.entity.display_name},
          {"children", children}};
}

json CoverageMetrics::to_json() const {
  json levels = json::object();
  for (auto level : kLevels) {
    auto it = entities_per_level.find(level);
    levels[to_string(level)] = it == entities_per_level.end() ? 0 : it->second;
  }
  return {{"packs_total", packs_total},
          {"packs_accepted", packs_accepted},
          {"packs_rejected", packs_rejected},
          {"links_total", links_total},
          {"entities_per_level", levels}};
}

// ---------------------------------------------------------------- OntologyData

const CanonicalEntity* OntologyData::find(const std::string& entity_id) const {
  auto it = entities_.find(entity_id);
  return it == entities_.end() ? nullptr : &it->second;
}

const CanonicalEntity& OntologyData::get(const std::string& entity_id) const {
  const auto* e = find(entity_id);
  if (!e) throw Error(ErrorCode::UnknownEntity, "unknown entity " + entity_id);
  return *e;
}

const std::set<std::string>& OntologyData::children_of(const std::string& entity_id) const {
  auto it = children_.find(entity_id);
  return it == children_.end() ? kNoChildren : it->second;
}

std::set<std::string> OntologyData::ancestors(const std::string& entity_id) const {
  std::set<std::string> out;
  std::vector<std::string> stack{entity_id};
  while (!stack.empty()) {
    auto id = std::move(stack.back());
    stack.pop_back();
    for (const auto& p : get(id).parent_ids) {
      if (out.insert(p).second) stack.push_back(p);
    }
  }
  return out;
}

std::set<std::string> OntologyData::descendants(const std::string& entity_id) const {
  get(entity_id);
  std::set<std::string> out;
  std::vector<std::string> stack{entity_id};
  while (!stack.empty()) {
    auto id = std::move(stack.back());
    stack.pop_back();
    for (const auto& c : children_of(id)) {
      if (out.insert(c).second) stack.push_back(c);
    }
  }
  return out;
}

std::vector<const CanonicalEntity*> OntologyData::entities_at(CanonicalLevel level) const {
  std::vector<const CanonicalEntity*> out;
  for (const auto& [id, e] : entities_) {
    if (e.level == level) out.push_back(&e);
  }
  return out;
}

std::vector<ExternalIdentifier> OntologyData::identifiers_of(const std::string& entity_id) const {
  std::vector<ExternalIdentifier> out;
  for (const auto& [key, owners] : identifiers_) {
    if (owners.contains(entity_id)) out.push_back({key.first, key.second, entity_id});
  }
  return out;
}

std::vector<Synonym> OntologyData::synonyms_of(const std::string& entity_id) const {
  auto it = synonyms_.find(entity_id);
  return it == synonyms_.end() ? std::vector<Synonym>{} : it->second;
}

const Organization* OntologyData::organization(const std::string& org_id) const {
  auto it = orgs_.find(org_id);
  return it == orgs_.end() ? nullptr : &it->second;
}

std::vector<CanonicalLink> OntologyData::links_for_entity(const std::string& entity_id) const {
  std::vector<CanonicalLink> out;
  if (auto it = links_by_entity_.find(entity_id); it != links_by_entity_.end()) {
    for (auto i : it->second) out.push_back(links_[i]);
  }
  return out;
}

std::vector<CanonicalLink> OntologyData::links_for_pack(const std::string& pack_id) const {
  std::vector<CanonicalLink> out;
  if (auto it = links_by_pack_.find(pack_id); it != links_by_pack_.end()) {
    for (auto i : it->second) out.push_back(links_[i]);
  }
  return out;
}

std::vector<json> OntologyData::export_records() const {
  std::vector<json> out;
  for (const auto& [id, o] : orgs_) out.push_back(to_json(o));
  std::vector<const CanonicalEntity*> ordered;
  for (const auto& [id, e] : entities_) ordered.push_back(&e);
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
    return rank(a->level) < rank(b->level);
  });
  for (const auto* e : ordered) out.push_back(to_json(*e));
  for (const auto& [key, owners] : identifiers_) {
    for (const auto& owner : owners) out.push_back(to_json(ExternalIdentifier{key.first, key.second, owner}));
  }
  for (const auto& [id, list] : synonyms_) {
    for (const auto& s : list) out.push_back(to_json(s));
  }
  for (const auto& l : links_) out.push_back(to_json(l));
  return out;
}

// -------------------------------------------------------------------- Ontology

Ontology::Ontology(std::filesystem::path log_path, Clock clock) : clock_(std::move(clock)) {
  if (log_path.empty()) return;
  log_.open(std::move(log_path));
  for (const auto& rec : log_.read_all()) apply(rec, nullptr, true);
}

std::string Ontology::apply_entity(const CanonicalEntity& entity, bool trusted) {
  auto implied = level_of_id(entity.entity_id);
  if (!implied || *implied != entity.level) {
    throw Error(ErrorCode::LevelMismatch,
                entity.entity_id + " does not carry the " + std::string(id_prefix(entity.level)) +
                    "- prefix required for level " + to_string(entity.level),
                json{{"entity_id", entity.entity_id}, {"level", to_string(entity.level)}});
  }
  auto existing = data_.entities_.find(entity.entity_id);
  if (existing != data_.entities_.end() && existing->second.level != entity.level) {
    throw Error(ErrorCode::LevelMismatch, "cannot change the level of " + entity.entity_id);
  }
  if (!trusted) {
    for (const auto& p : entity.parent_ids) {
      const auto* parent = data_.find(p);
      if (!parent) {
        throw Error(ErrorCode::UnknownParent, "unknown parent " + p,
                    json{{"entity_id", entity.entity_id}, {"parent_id", p}});
      }
      if (rank(parent->level) + 1 != rank(entity.level)) {
        throw Error(ErrorCode::IllegalParentLevel,
                    "parent " + p + " (" + to_string(parent->level) + ") is not one level above " +
                        to_string(entity.level),
                    json{{"entity_id", entity.entity_id}, {"parent_id", p}});
      }
    }
  }

  if (existing == data_.entities_.end()) {
    data_.entities_.emplace(entity.entity_id, entity);
  } else {
    auto& e = existing->second;
    if (!entity.display_name.empty()) e.display_name = entity.display_name;
    e.parent_ids.insert(entity.parent_ids.begin(), entity.parent_ids.end());
    for (const auto& [k, v] : entity.attributes) e.attributes[k] = v;
  }
  for (const auto& p : entity.parent_ids) data_.children_[p].insert(entity.entity_id);
  return entity.entity_id;
}

void Ontology::apply_identifier(const ExternalIdentifier& id, bool trusted) {
  if (id.scheme.empty() || id.value.empty()) {
    throw Error(ErrorCode::InvalidArgument, "identifier needs scheme and value");
  }
  auto& owners = data_.identifiers_[{id.scheme, id.value}];
  if (!trusted) {
    if (!data_.find(id.entity_id)) {
      throw Error(ErrorCode::UnknownEntity, "unknown entity " + id.entity_id);
    }
    if (!owners.empty() && !owners.contains(id.entity_id)) {
      throw Error(ErrorCode::AmbiguousIdentifier,
                  id.scheme + " " + id.value + " already identifies " + *owners.begin(),
                  json{{"scheme", id.scheme}, {"value", id.value}, {"entities", owners}});
    }
  }
  owners.insert(id.entity_id);
}

CanonicalLink Ontology::apply_link(CanonicalLink link, const lector::PackRegistry* packs,
                                   bool trusted) {
  if (!trusted) {
    if (!data_.find(link.entity_id)) {
      throw Error(ErrorCode::UnknownEntity, "unknown entity " + link.entity_id);
    }
    if (packs) {
      auto pack = packs->get(link.pack_id);
      if (pack.status.state != lector::PackState::Accepted) {
        throw Error(ErrorCode::PackNotAccepted,
                    link.pack_id + " is " + lector::to_string(pack.status.state) +
                        "; only accepted packs can be linked",
                    json{{"pack_id", link.pack_id}, {"state", lector::to_string(pack.status.state)}});
      }
    }
    for (auto i : data_.links_by_entity_[link.entity_id]) {
      if (data_.links_[i].pack_id == link.pack_id) {
        throw Error(ErrorCode::DuplicateLink,
                    link.pack_id + " is already linked to " + link.entity_id,
                    json{{"link_id", data_.links_[i].link_id}});
      }
    }
  }
  if (link.link_id.empty()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "CL-%06zu", data_.links_.size() + 1);
    link.link_id = buf;
  }
  if (link.created_at.empty()) link.created_at = clock_();
  data_.links_.push_back(link);
  data_.links_by_entity_[link.entity_id].push_back(data_.links_.size() - 1);
  data_.links_by_pack_[link.pack_id].push_back(data_.links_.size() - 1);
  return link;
}

json Ontology::apply(const json& record, const lector::PackRegistry* packs, bool trusted) {
  if (!record.is_object()) throw Error(ErrorCode::InvalidArgument, "record must be an object");
  auto kind = require_string(record, "record");
  if (kind == "entity") {
    auto e = entity_from_json(record);
    apply_entity(e, trusted);
    return to_json(e);
  }
  if (kind == "identifier") {
    ExternalIdentifier id{require_string(record, "scheme"), require_string(record, "value"),
                          require_string(record, "entity_id")};
    apply_identifier(id, trusted);
    return to_json(id);
  }
  if (kind == "synonym") {
    Synonym s{require_string(record, "entity_id"), require_string(record, "text"), std::nullopt};
    if (record.contains("language") && record.at("language").is_string()) {
      s.language = record.at("language").get<std::string>();
    }
    if (!trusted && !data_.find(s.entity_id)) {
      throw Error(ErrorCode::UnknownEntity, "unknown entity " + s.entity_id);
    }
    data_.synonyms_[s.entity_id].push_back(s);
    return to_json(s);
  }
  if (kind == "organization") {
    auto role = org_role_from_string(require_string(record, "role"));
    if (!role) throw Error(ErrorCode::InvalidArgument, "unknown organization role");
    Organization o{require_string(record, "org_id"), require_string(record, "name"), *role};
    data_.orgs_[o.org_id] = o;
    return to_json(o);
  }
  if (kind == "link") {
    CanonicalLink l{record.value("link_id", ""), require_string(record, "pack_id"),
                    require_string(record, "entity_id"), record.value("created_at", "")};
    return to_json(apply_link(l, packs, trusted));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown record kind " + kind);
}

std::string Ontology::upsert_entity(const CanonicalEntity& entity) {
  std::unique_lock lock(mutex_);
  apply_entity(entity, false);
  log_.append(to_json(entity));
  return entity.entity_id;
}

void Ontology::add_identifier(const ExternalIdentifier& id) {
  std::unique_lock lock(mutex_);
  auto& owners = data_.identifiers_[{id.scheme, id.value}];
  bool fresh = !owners.contains(id.entity_id);
  apply_identifier(id, false);
  if (fresh) log_.append(to_json(id));
}

void Ontology::add_synonym(const Synonym& synonym) {
  std::unique_lock lock(mutex_);
  log_.append(apply(to_json(synonym), nullptr, false));
}

void Ontology::upsert_organization(const Organization& org) {
  std::unique_lock lock(mutex_);
  log_.append(apply(to_json(org), nullptr, false));
}

CanonicalEntity Ontology::resolve_identifier(const std::string& scheme,
                                             const std::string& value) const {
  std::shared_lock lock(mutex_);
  auto it = data_.identifiers_.find({scheme, value});
  if (it == data_.identifiers_.end() || it->second.empty()) {
    throw Error(ErrorCode::NotFound, "no entity carries " + scheme + " " + value);
  }
  if (it->second.size() > 1) {
    throw Error(ErrorCode::AmbiguousIdentifier,
                scheme + " " + value + " resolves to " + std::to_string(it->second.size()) +
                    " entities",
                json{{"scheme", scheme}, {"value", value}, {"entities", it->second}});
  }
  return data_.get(*it->second.begin());
}

namespace {

HierarchyNode walk(const OntologyData& data, const std::string& id, WalkDirection dir) {
  HierarchyNode node{data.get(id), {}};
  const auto& next =
      dir == WalkDirection::Descend ? data.children_of(id) : node.entity.parent_ids;
  for (const auto& n : next) node.children.push_back(walk(data, n, dir));
  return node;
}

}  // namespace

HierarchyNode Ontology::hierarchy_walk(const std::string& entity_id,
                                       WalkDirection direction) const {
  std::shared_lock lock(mutex_);
  return walk(data_, entity_id, direction);
}

CanonicalLink Ontology::link_evidence(const std::string& pack_id, const std::string& entity_id,
                                      const lector::PackRegistry& packs) {
  std::unique_lock lock(mutex_);
  auto link = apply_link({"", pack_id, entity_id, ""}, &packs, false);
  log_.append(to_json(link));
  return link;
}

std::size_t Ontology::load_records(const std::vector<json>& records,
                                   const lector::PackRegistry* packs) {
  std::unique_lock lock(mutex_);
  std::vector<json> applied;
  applied.reserve(records.size());
  try {
    for (const auto& r : records) applied.push_back(apply(r, packs, false));
  } catch (...) {
    log_.append_many(applied);
    throw;
  }
  log_.append_many(applied);
  return applied.size();
}

std::size_t Ontology::load_file(const std::filesystem::path& path,
                                const lector::PackRegistry* packs) {
  return load_records(read_json_lines(path), packs);
}

void Ontology::export_file(const std::filesystem::path& path) const {
  std::string out;
  for (const auto& r : snapshot().export_records()) {
    out += r.dump();
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

CoverageMetrics Ontology::coverage_metrics(const lector::PackRegistry& packs) const {
  CoverageMetrics m;
  for (const auto& p : packs.all_packs()) {
    ++m.packs_total;
    if (p.status.state == lector::PackState::Accepted) ++m.packs_accepted;
    if (p.status.state == lector::PackState::Rejected) ++m.packs_rejected;
  }
  std::shared_lock lock(mutex_);
  m.links_total = data_.links_.size();
  for (auto level : kLevels) m.entities_per_level[level] = 0;
  for (const auto& [id, e] : data_.entities_) ++m.entities_per_level[e.level];
  return m;
}

OntologyData Ontology::snapshot() const {
  std::shared_lock lock(mutex_);
  return data_;
}

std::optional<CanonicalEntity> Ontology::find(const std::string& entity_id) const {
  std::shared_lock lock(mutex_);
  const auto* e = data_.find(entity_id);
  return e ? std::optional<CanonicalEntity>(*e) : std::nullopt;
}

CanonicalEntity Ontology::get(const std::string& entity_id) const {
  std::shared_lock lock(mutex_);
  return data_.get(entity_id);
}

std::vector<CanonicalLink> Ontology::links_for_entity(const std::string& entity_id) const {
  std::shared_lock lock(mutex_);
  return data_.links_for_entity(entity_id);
}

std::vector<CanonicalLink> Ontology::links_for_pack(const std::string& pack_id) const {
  std::shared_lock lock(mutex_);
  return data_.links_for_pack(pack_id);
}

std::size_t Ontology::entity_count() const {
  std::shared_lock lock(mutex_);
  return data_.entities_.size();
}

std::size_t Ontology::link_count() const {
  std::shared_lock lock(mutex_);
  return data_.links_.size();
}

}  // namespace plp::prisma
