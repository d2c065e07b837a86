#include "plp/service/workspace.hpp"

#include <algorithm>
#include <set>

#include "plp/common/error.hpp"

namespace plp::service {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

double fraction(std::size_t num, std::size_t den) {
  return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

bool blank(const std::optional<std::string>& s) {
  return !s || s->find_first_not_of(" \t\r\n") == std::string::npos;
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

}  // namespace

json MetricsReport::to_json() const {
  json diff = json::object();
  for (const auto& [pair, differs] : contextual_differentiation) diff[pair] = differs;
  json levels = json::object();
  for (const auto& [level, n] : entities_per_level) levels[level] = n;
  return {
      {"snapshot_at", snapshot_at},
      {"empty", empty},
      {"provenance_completeness", provenance_completeness},
      {"assertions_total", assertions_total},
      {"assertions_verified", assertions_verified},
      {"interpretive_traceability", interpretive_traceability},
      {"packs_reconstructible", packs_reconstructible},
      {"curatorial_coverage", curatorial_coverage},
      {"accountability", accountability},
      {"terminal_decisions", terminal_decisions},
      {"accountable_decisions", accountable_decisions},
      {"contextual_differentiation", diff},
      {"packs", packs_total},
      {"packs_accepted", packs_accepted},
      {"packs_rejected", packs_rejected},
      {"packs_under_review", packs_under_review},
      {"packs_draft", packs_draft},
      {"links", links},
      {"documents", documents},
      {"page_index_trees", page_index_trees},
      {"graphs_materialized", graphs_materialized},
      {"views_materialized", views_materialized},
      {"assertion_types", assertion_types},
      {"entities_per_level", levels},
  };
}

const lector::Reader& reader_by_id(const std::string& reader_id) {
  static const lector::HeadingReader heading;
  if (reader_id == heading.reader_id()) return heading;
  throw Error(ErrorCode::InvalidArgument, "unknown reader " + reader_id,
              json{{"reader_id", reader_id}, {"available", {heading.reader_id()}}});
}

Workspace::Workspace(fs::path data_dir, Clock clock)
    : data_dir_(std::move(data_dir)),
      documents_(data_dir_ / "patos", clock),
      packs_(data_dir_ / "lector" / "packs", clock),
      page_index_(data_dir_ / "lector" / "page_index"),
      ontology_(data_dir_ / "prisma" / "ontology.jsonl", clock),
      graphs_(data_dir_ / "prisma" / "graphs") {}

bool Workspace::empty() const {
  return documents_.all_documents().empty() && packs_.all_packs().empty() &&
         ontology_.entity_count() == 0 && graphs_.size() == 0;
}

lector::PageIndexTree Workspace::index(const std::string& doc_id, const std::string& reader_id) {
  return page_index_.build_page_index(documents_, doc_id, reader_by_id(reader_id));
}

prisma::RefractionCorpus Workspace::corpus() const {
  return prisma::RefractionCorpus(ontology_.snapshot(), packs_, &documents_);
}

prisma::ContextGraph Workspace::refract(const std::string& entity_id, prisma::ViewKind view) {
  auto g = prisma::refract(corpus(), entity_id, view);
  graphs_.put(g);
  return g;
}

prisma::MaterializationReport Workspace::refract_all(const std::vector<prisma::ViewKind>& views,
                                                     unsigned threads) {
  return prisma::refract_all(corpus(), views, graphs_, threads);
}

prisma::TraceChain Workspace::trace(const std::string& graph_id,
                                    const std::string& node_id) const {
  return prisma::trace(graphs_, graph_id, node_id, documents_);
}

MetricsReport Workspace::metrics() const {
  MetricsReport m;
  auto corp = corpus();
  m.snapshot_at = corp.generated_at();

  // Provenance completeness over every assertion occurrence in stored graphs.
  std::set<std::string> views;
  for (const auto& entry : graphs_.manifest()) {
    ++m.graphs_materialized;
    views.insert(entry.view);
    auto bytes = graphs_.read_bytes(entry.graph_id);
    if (!bytes || bytes->find("\"type\":\"assertion\"") == std::string::npos) continue;
    auto g = prisma::graph_from_json(json::parse(*bytes));
    for (const auto* n : g.nodes_of_type("assertion")) {
      ++m.assertions_total;
      if (prisma::trace(g, n->id, documents_).verified()) ++m.assertions_verified;
    }
  }
  m.views_materialized.assign(views.begin(), views.end());
  m.provenance_completeness = fraction(m.assertions_verified, m.assertions_total);

  // Packs, curatorial coverage and interpretive traceability.
  std::set<std::string> types;
  auto packs = packs_.all_packs();
  for (const auto& p : packs) {
    ++m.packs_total;
    types.insert(lector::to_string(p.question.assertion_type));
    switch (p.status.state) {
      case lector::PackState::Draft: ++m.packs_draft; break;
      case lector::PackState::UnderReview: ++m.packs_under_review; break;
      case lector::PackState::Accepted: ++m.packs_accepted; break;
      case lector::PackState::Rejected: ++m.packs_rejected; break;
    }
    if (p.status.state != lector::PackState::Accepted) continue;

    auto decisions = packs_.decisions_for(p.pack_id);
    bool decided = std::any_of(decisions.begin(), decisions.end(), [](const auto& d) {
      return d.verdict == lector::Verdict::Accept && !blank(d.curator) && !blank(d.justification);
    });
    bool readable = !p.provenance.empty();
    for (const auto& entry : p.provenance) {
      auto trees = page_index_.trees_for(entry.doc_id);
      bool found = std::any_of(trees.begin(), trees.end(), [&](const lector::PageIndexTree& t) {
        if (t.doc_checksum != entry.checksum) return false;
        return std::all_of(entry.node_ids.begin(), entry.node_ids.end(),
                           [&](const std::string& id) { return t.find(id) != nullptr; });
      });
      readable = readable && found;
    }
    if (decided && readable && !blank(p.status.curator) && !blank(p.status.justification)) {
      ++m.packs_reconstructible;
    }
  }
  m.assertion_types.assign(types.begin(), types.end());
  m.curatorial_coverage = fraction(m.packs_accepted, m.packs_total);
  m.interpretive_traceability = fraction(m.packs_reconstructible, m.packs_accepted);

  for (const auto& d : packs_.decisions()) {
    ++m.terminal_decisions;
    if (!blank(d.curator) && !blank(d.justification)) ++m.accountable_decisions;
  }
  m.accountability = fraction(m.accountable_decisions, m.terminal_decisions);

  for (std::size_t i = 0; i < prisma::kViews.size(); ++i) {
    for (std::size_t j = i + 1; j < prisma::kViews.size(); ++j) {
      auto a = prisma::kViews[i], b = prisma::kViews[j];
      m.contextual_differentiation[prisma::to_string(a) + "|" + prisma::to_string(b)] =
          prisma::attribute_allowlist(a) != prisma::attribute_allowlist(b);
    }
  }

  m.links = corp.ontology().links().size();
  m.documents = documents_.all_documents().size();
  m.page_index_trees = page_index_.size();
  for (auto level : prisma::kLevels) {
    m.entities_per_level[prisma::to_string(level)] = corp.ontology().entities_at(level).size();
  }
  m.empty = m.packs_total == 0 && m.documents == 0 && m.graphs_materialized == 0 &&
            corp.ontology().entity_count() == 0;
  return m;
}

}  // namespace plp::service
