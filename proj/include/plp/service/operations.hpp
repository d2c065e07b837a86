#pragma once

// Request-level operations shared by the HTTP routes and the CLI. Each
// returns the canonical structured text of its result, so both front ends
// emit the same bytes for the same workspace state.

#include <optional>
#include <string>

#include <json.hpp>

#include "plp/service/workspace.hpp"

namespace plp::service::ops {

// {source, registration_id, doc_kind, medication_name, version_label, format,
//  capture_date, active_ingredient?, content | content_base64}
patos::IngestRequest ingest_request_from_json(const nlohmann::json& body);

std::string ingest(Workspace& ws, const nlohmann::json& body);
std::string versions(const Workspace& ws, const std::string& doc_id);
std::string verify(Workspace& ws, const std::string& doc_id);
std::string index(Workspace& ws, const std::string& doc_id, const std::string& reader_id);

std::string create_pack(Workspace& ws, const nlohmann::json& input);
std::string show_pack(const Workspace& ws, const std::string& pack_id);
std::string list_packs(const Workspace& ws, const std::optional<std::string>& state);
std::string submit(Workspace& ws, const std::string& pack_id);
std::string curate(Workspace& ws, const std::string& pack_id, const std::string& verdict,
                   const std::string& curator, const std::string& justification);
std::string derive(Workspace& ws, const std::string& pack_id, const nlohmann::json& input);
std::string validate(const Workspace& ws, const std::string& pack_id);

std::string link(Workspace& ws, const std::string& pack_id, const std::string& entity_id);
std::string refract(Workspace& ws, const std::string& entity_id, const std::string& view);
std::string trace(const Workspace& ws, const std::string& graph_id, const std::string& node_id);
std::string metrics(const Workspace& ws);

prisma::ViewKind parse_view(const std::string& view);
nlohmann::json parse_body(const std::string& text);

}  // namespace plp::service::ops
