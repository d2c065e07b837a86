#pragma once

// Six-level medication hierarchy with external identifiers, synonyms,
// organizations and the links that bind accepted packs to entities.
//
// Levels run SUBSTANCE > VTM > VMP > VMPP > AMP > AMPP. Every parent sits
// exactly one level above its child; a child may have several parents, so
// the hierarchy is a level-ordered DAG.

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "plp/common/clock.hpp"
#include "plp/common/files.hpp"

namespace plp::lector {
class PackRegistry;
}

namespace plp::prisma {

enum class CanonicalLevel { Substance, Vtm, Vmp, Vmpp, Amp, Ampp };

inline constexpr std::array<CanonicalLevel, 6> kLevels{
    CanonicalLevel::Substance, CanonicalLevel::Vtm, CanonicalLevel::Vmp,
    CanonicalLevel::Vmpp,      CanonicalLevel::Amp, CanonicalLevel::Ampp};

std::string to_string(CanonicalLevel level);  // "SUBSTANCE", "VTM", ...
std::optional<CanonicalLevel> level_from_string(std::string_view s);
int rank(CanonicalLevel level);  // 0 for SUBSTANCE ... 5 for AMPP
std::string_view id_prefix(CanonicalLevel level);  // "SUB", "VTM", ...
// Level implied by the id prefix ("VMPP-..." is VMPP, not VMP).
std::optional<CanonicalLevel> level_of_id(std::string_view entity_id);

struct ExternalLevelMapping {
  std::string functional;
  std::optional<std::string> dmd;
  std::optional<std::string> idmp;
};
ExternalLevelMapping map_external_level(CanonicalLevel level);
nlohmann::json to_json(const ExternalLevelMapping& m);

struct CanonicalEntity {
  std::string entity_id;
  CanonicalLevel level = CanonicalLevel::Substance;
  std::string display_name;
  std::set<std::string> parent_ids;
  std::map<std::string, std::string> attributes;
};

struct ExternalIdentifier {
  std::string scheme;
  std::string value;
  std::string entity_id;
};

struct Synonym {
  std::string entity_id;
  std::string text;
  std::optional<std::string> language;
};

enum class OrgRole { Manufacturer, Regulator, Hospital, Database };
std::string to_string(OrgRole role);
std::optional<OrgRole> org_role_from_string(std::string_view s);

struct Organization {
  std::string org_id;
  std::string name;
  OrgRole role = OrgRole::Manufacturer;
};

struct CanonicalLink {
  std::string link_id;
  std::string pack_id;
  std::string entity_id;
  std::string created_at;
};

// Record serialization. Every record carries a "record" discriminator:
// entity, identifier, synonym, organization, link.
nlohmann::json to_json(const CanonicalEntity& e);
nlohmann::json to_json(const ExternalIdentifier& i);
nlohmann::json to_json(const Synonym& s);
nlohmann::json to_json(const Organization& o);
nlohmann::json to_json(const CanonicalLink& l);
CanonicalEntity entity_from_json(const nlohmann::json& j);

struct HierarchyNode {
  CanonicalEntity entity;
  std::vector<HierarchyNode> children;
};
nlohmann::json to_json(const HierarchyNode& n);

enum class WalkDirection { Ascend, Descend };

struct CoverageMetrics {
  std::size_t packs_total = 0;
  std::size_t packs_accepted = 0;
  std::size_t packs_rejected = 0;
  std::size_t links_total = 0;
  std::map<CanonicalLevel, std::size_t> entities_per_level;
  nlohmann::json to_json() const;
};

// Plain-value view of the registry. Refraction works on one of these so a
// long materialization never holds the registry lock.
class OntologyData {
 public:
  const CanonicalEntity* find(const std::string& entity_id) const;
  const CanonicalEntity& get(const std::string& entity_id) const;  // UnknownEntity
  const std::set<std::string>& children_of(const std::string& entity_id) const;
  // Transitive closure, excluding the start entity.
  std::set<std::string> ancestors(const std::string& entity_id) const;
  std::set<std::string> descendants(const std::string& entity_id) const;
  std::vector<const CanonicalEntity*> entities_at(CanonicalLevel level) const;
  std::size_t entity_count() const { return entities_.size(); }

  std::vector<ExternalIdentifier> identifiers_of(const std::string& entity_id) const;
  std::vector<Synonym> synonyms_of(const std::string& entity_id) const;
  const Organization* organization(const std::string& org_id) const;
  const std::map<std::string, Organization>& organizations() const { return orgs_; }

  std::vector<CanonicalLink> links_for_entity(const std::string& entity_id) const;
  std::vector<CanonicalLink> links_for_pack(const std::string& pack_id) const;
  const std::vector<CanonicalLink>& links() const { return links_; }

  // Every record, in an order that loads back cleanly: organizations,
  // entities by level then id, identifiers, synonyms, links.
  std::vector<nlohmann::json> export_records() const;

 private:
  friend class Ontology;

  std::map<std::string, CanonicalEntity> entities_;
  std::map<std::string, std::set<std::string>> children_;
  // (scheme, value) -> entities. More than one entry signals corruption.
  std::map<std::pair<std::string, std::string>, std::set<std::string>> identifiers_;
  std::map<std::string, std::vector<Synonym>> synonyms_;
  std::map<std::string, Organization> orgs_;
  std::vector<CanonicalLink> links_;
  std::map<std::string, std::vector<std::size_t>> links_by_entity_;
  std::map<std::string, std::vector<std::size_t>> links_by_pack_;
};

class Ontology {
 public:
  // Empty path keeps everything in memory. Otherwise records are appended
  // to `log_path` and replayed on construction.
  explicit Ontology(std::filesystem::path log_path = {}, Clock clock = system_clock());
  Ontology(const Ontology&) = delete;
  Ontology& operator=(const Ontology&) = delete;

  // Inserts or merges. A merge adds parents and attributes and never
  // changes level or id.
  std::string upsert_entity(const CanonicalEntity& entity);
  void add_identifier(const ExternalIdentifier& id);
  void add_synonym(const Synonym& synonym);
  void upsert_organization(const Organization& org);

  CanonicalEntity resolve_identifier(const std::string& scheme, const std::string& value) const;
  HierarchyNode hierarchy_walk(const std::string& entity_id, WalkDirection direction) const;

  CanonicalLink link_evidence(const std::string& pack_id, const std::string& entity_id,
                              const lector::PackRegistry& packs);

  // Applies records in order and persists them in one append. Link records
  // are gated on `packs` when it is given; replayed logs skip gating.
  std::size_t load_records(const std::vector<nlohmann::json>& records,
                           const lector::PackRegistry* packs);
  std::size_t load_file(const std::filesystem::path& path, const lector::PackRegistry* packs);
  void export_file(const std::filesystem::path& path) const;

  CoverageMetrics coverage_metrics(const lector::PackRegistry& packs) const;

  OntologyData snapshot() const;
  std::optional<CanonicalEntity> find(const std::string& entity_id) const;
  CanonicalEntity get(const std::string& entity_id) const;
  std::vector<CanonicalLink> links_for_entity(const std::string& entity_id) const;
  std::vector<CanonicalLink> links_for_pack(const std::string& pack_id) const;
  std::size_t entity_count() const;
  std::size_t link_count() const;

 private:
  // Validates and applies one record; returns the record as it should be
  // persisted (links gain id and timestamp).
  nlohmann::json apply(const nlohmann::json& record, const lector::PackRegistry* packs,
                       bool trusted);
  std::string apply_entity(const CanonicalEntity& entity, bool trusted);
  void apply_identifier(const ExternalIdentifier& id, bool trusted);
  CanonicalLink apply_link(CanonicalLink link, const lector::PackRegistry* packs, bool trusted);

  OntologyData data_;
  mutable std::shared_mutex mutex_;
  RecordLog log_;
  Clock clock_;
};

}  // namespace plp::prisma
