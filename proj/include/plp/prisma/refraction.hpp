#pragma once

// RPDA refraction: one informational core projected into four views.
//
// A context graph is rooted at a canonical entity. Attribute nodes come from
// a fixed per-view allowlist. Each accepted pack in the view's scope becomes
// an assertion node with four qualifier nodes; the evidence_pack qualifier
// connects the assertion to its authority, scope, population and clinical
// context nodes.

#include <array>
#include <chrono>
#include <compare>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "plp/lector/evidence_pack.hpp"
#include "plp/prisma/ontology.hpp"

namespace plp::patos {
class DocumentStore;
}
namespace plp::lector {
class PackRegistry;
}

namespace plp::prisma {

enum class ViewKind { MppRegulatory, VmpComplete, Dispensation, SubstanceProfile };

inline constexpr std::array<ViewKind, 4> kViews{ViewKind::MppRegulatory, ViewKind::VmpComplete,
                                                ViewKind::Dispensation,
                                                ViewKind::SubstanceProfile};

std::string to_string(ViewKind v);  // "CTX_MPP_REGULATORY", ...
std::optional<ViewKind> view_from_string(std::string_view s);
CanonicalLevel root_level(ViewKind v);
// Attribute keys a view may expose. Fixed; see refraction.cpp for the lists.
const std::set<std::string>& attribute_allowlist(ViewKind v);

std::string make_graph_id(ViewKind v, const std::string& entity_id);

struct GraphNode {
  std::string id;
  std::string type;  // entity, attribute, assertion, qualifier, authority, scope,
                     // population, clinical_context
  std::string label;
  nlohmann::json props = nlohmann::json::object();
};

struct GraphEdge {
  std::string from;
  std::string to;
  std::string relation;
  auto operator<=>(const GraphEdge&) const = default;
};

struct ContextGraph {
  std::string graph_id;
  ViewKind view = ViewKind::VmpComplete;
  std::string root_entity_id;
  std::vector<GraphNode> nodes;  // sorted by id
  std::vector<GraphEdge> edges;  // sorted
  std::string generated_at;
  std::string content_digest;

  const GraphNode* node(std::string_view id) const;
  std::vector<const GraphNode*> nodes_of_type(std::string_view type) const;
};

nlohmann::json to_json(const GraphNode& n);
nlohmann::json to_json(const GraphEdge& e);
nlohmann::json to_json(const ContextGraph& g);
ContextGraph graph_from_json(const nlohmann::json& j);

// Canonical bytes: sorted keys, no whitespace. Equal to to_json(g).dump().
std::string canonical_text(const ContextGraph& g);
// SHA-256 over the canonical form with generated_at and content_digest left out.
std::string compute_digest(const ContextGraph& g);

// Immutable inputs for refraction: an ontology snapshot, the accepted packs
// with their accept decisions, and the authority of every cited document.
class RefractionCorpus {
 public:
  RefractionCorpus(OntologyData ontology, const lector::PackRegistry& packs,
                   const patos::DocumentStore* store);
  // Ontology only; no assertions. Used by the synthetic benchmark.
  explicit RefractionCorpus(OntologyData ontology);

  const OntologyData& ontology() const { return ontology_; }
  const lector::EvidencePack* accepted_pack(const std::string& pack_id) const;
  const lector::CuratorialDecision* accept_decision(const std::string& pack_id) const;
  // Lineage source of a stored document ("ANVISA", ...), if known.
  const std::string* authority_of(const std::string& doc_id) const;
  // Latest decision or link instant: the graphs' generated_at.
  const std::string& generated_at() const { return generated_at_; }

 private:
  void stamp();

  OntologyData ontology_;
  std::map<std::string, lector::EvidencePack> accepted_;
  std::map<std::string, lector::CuratorialDecision> decisions_;
  std::map<std::string, std::string> authorities_;
  std::string generated_at_;
};

// LevelViewMismatch when the entity level differs from the view's root
// level; UnknownEntity when the entity is absent.
ContextGraph refract(const RefractionCorpus& corpus, const std::string& entity_id, ViewKind view);

// Assertion nodes of the requested types plus their qualifier and dimension
// neighborhoods. The input graph is not modified; the digest is recomputed.
ContextGraph filter_assertions(const ContextGraph& graph,
                               const std::set<lector::AssertionType>& types);

struct ManifestEntry {
  std::string graph_id;
  std::string view;
  std::string root_entity_id;
  std::string digest;
};

// Materialized graphs: <dir>/<graph_id>.json plus <dir>/manifest.jsonl.
class GraphStore {
 public:
  explicit GraphStore(std::filesystem::path dir);
  GraphStore(const GraphStore&) = delete;
  GraphStore& operator=(const GraphStore&) = delete;

  void put(const ContextGraph& graph);
  std::optional<ContextGraph> load(const std::string& graph_id) const;
  std::optional<std::string> read_bytes(const std::string& graph_id) const;
  std::vector<ManifestEntry> manifest() const;
  std::size_t size() const;
  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path graph_path(const std::string& graph_id) const;

  // Bulk path for refract_all: files first, then one manifest rewrite.
  void write_graph_file(const std::string& graph_id, const std::string& bytes) const;
  void record(std::vector<ManifestEntry> entries);

 private:

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::map<std::string, ManifestEntry> manifest_;
};

struct RefractionFailure {
  std::string entity_id;
  std::string view;
  std::string code;
  std::string message;
};

struct MaterializationReport {
  std::size_t graph_count = 0;
  double elapsed_seconds = 0;
  std::vector<RefractionFailure> failures;
  std::map<std::string, std::size_t> graphs_per_view;
  nlohmann::json to_json() const;
};

// One graph per eligible entity and applicable view, written to `out`.
// Per-entity failures are collected, never thrown. `threads` 0 means one
// worker per hardware thread.
MaterializationReport refract_all(const RefractionCorpus& corpus,
                                  const std::vector<ViewKind>& views, GraphStore& out,
                                  unsigned threads = 0);

enum class EntryStatus { Verified, Corrupted, Missing };
std::string to_string(EntryStatus s);

struct TraceEntry {
  std::string doc_id;
  std::string version_label;
  std::string checksum;
  std::set<std::string> node_ids;
  EntryStatus status = EntryStatus::Missing;
  std::string detail;
};

struct TraceChain {
  std::string graph_id;
  std::string assertion_node_id;
  std::string pack_id;
  std::string assertion_type;
  std::vector<TraceEntry> entries;

  // At least one entry and every entry verified.
  bool verified() const;
  nlohmann::json to_json() const;
};

// NotAnAssertionNode for any node that is not an assertion.
TraceChain trace(const ContextGraph& graph, const std::string& node_id,
                 const patos::DocumentStore& store);
// UnknownGraph when the graph was never materialized.
TraceChain trace(const GraphStore& graphs, const std::string& graph_id,
                 const std::string& node_id, const patos::DocumentStore& store);

}  // namespace plp::prisma
