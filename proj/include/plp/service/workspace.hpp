#pragma once

// A data directory holding every store of the pipeline:
//
//   <data_dir>/patos/                 document store
//   <data_dir>/lector/packs/          evidence packs and decisions
//   <data_dir>/lector/page_index/     reader trees
//   <data_dir>/prisma/ontology.jsonl  ontology record log
//   <data_dir>/prisma/graphs/         materialized context graphs
//
// The CLI and the HTTP service both work through this type, which is what
// keeps their outputs byte-identical.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "plp/common/clock.hpp"
#include "plp/lector/pack_registry.hpp"
#include "plp/lector/page_index.hpp"
#include "plp/patos/document_store.hpp"
#include "plp/prisma/ontology.hpp"
#include "plp/prisma/refraction.hpp"

namespace plp::service {

struct MetricsReport {
  std::string snapshot_at;
  bool empty = false;

  std::size_t assertions_total = 0;
  std::size_t assertions_verified = 0;
  double provenance_completeness = 1.0;

  std::size_t packs_reconstructible = 0;
  double interpretive_traceability = 1.0;

  std::size_t packs_total = 0;
  std::size_t packs_accepted = 0;
  std::size_t packs_rejected = 0;
  std::size_t packs_under_review = 0;
  std::size_t packs_draft = 0;
  double curatorial_coverage = 1.0;

  std::size_t terminal_decisions = 0;
  std::size_t accountable_decisions = 0;
  double accountability = 1.0;

  // "CTX_A|CTX_B" -> allowlists differ.
  std::map<std::string, bool> contextual_differentiation;

  std::size_t links = 0;
  std::size_t documents = 0;
  std::size_t page_index_trees = 0;
  std::size_t graphs_materialized = 0;
  std::vector<std::string> views_materialized;
  std::vector<std::string> assertion_types;
  std::map<std::string, std::size_t> entities_per_level;

  nlohmann::json to_json() const;
};

class Workspace {
 public:
  explicit Workspace(std::filesystem::path data_dir, Clock clock = system_clock());
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;

  const std::filesystem::path& data_dir() const { return data_dir_; }

  patos::DocumentStore& documents() { return documents_; }
  const patos::DocumentStore& documents() const { return documents_; }
  lector::PackRegistry& packs() { return packs_; }
  const lector::PackRegistry& packs() const { return packs_; }
  lector::PageIndexStore& page_index() { return page_index_; }
  const lector::PageIndexStore& page_index() const { return page_index_; }
  prisma::Ontology& ontology() { return ontology_; }
  const prisma::Ontology& ontology() const { return ontology_; }
  prisma::GraphStore& graphs() { return graphs_; }
  const prisma::GraphStore& graphs() const { return graphs_; }

  // True when no document, pack, entity or graph exists yet.
  bool empty() const;

  lector::PageIndexTree index(const std::string& doc_id, const std::string& reader_id = "stub");

  prisma::RefractionCorpus corpus() const;
  // Refracts and stores the graph so it can be traced later.
  prisma::ContextGraph refract(const std::string& entity_id, prisma::ViewKind view);
  prisma::MaterializationReport refract_all(const std::vector<prisma::ViewKind>& views,
                                            unsigned threads = 0);
  prisma::TraceChain trace(const std::string& graph_id, const std::string& node_id) const;

  MetricsReport metrics() const;

 private:
  std::filesystem::path data_dir_;
  patos::DocumentStore documents_;
  lector::PackRegistry packs_;
  lector::PageIndexStore page_index_;
  prisma::Ontology ontology_;
  prisma::GraphStore graphs_;
};

// Reader registry for `index`. Only the heading reader ships.
const lector::Reader& reader_by_id(const std::string& reader_id);

}  // namespace plp::service
