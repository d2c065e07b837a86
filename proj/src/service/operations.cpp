#include "plp/service/operations.hpp"

#include "plp/common/error.hpp"

namespace plp::service::ops {

using nlohmann::json;

namespace {

std::string field(const json& body, const char* key, bool required = true) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) {
    if (!required) return {};
    throw Error(ErrorCode::InvalidArgument, std::string("missing field ") + key,
                json{{"field", key}});
  }
  if (!it->is_string()) {
    throw Error(ErrorCode::InvalidArgument, std::string("field ") + key + " must be a string",
                json{{"field", key}});
  }
  return it->get<std::string>();
}

json array_of(const auto& items) {
  json out = json::array();
  for (const auto& i : items) out.push_back(lector::to_json(i));
  return out;
}

}  // namespace

json parse_body(const std::string& text) {
  json body = json::parse(text, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
  }
  return body;
}

prisma::ViewKind parse_view(const std::string& view) {
  auto v = prisma::view_from_string(view);
  if (!v) {
    json known = json::array();
    for (auto k : prisma::kViews) known.push_back(prisma::to_string(k));
    throw Error(ErrorCode::InvalidArgument, "unknown view " + view,
                json{{"view", view}, {"views", known}});
  }
  return *v;
}

patos::IngestRequest ingest_request_from_json(const json& body) {
  patos::IngestRequest req;
  try {
    req.lineage = {field(body, "source"), field(body, "registration_id"),
                   patos::doc_kind_from_string(field(body, "doc_kind")),
                   field(body, "medication_name")};
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::InvalidArgument, e.what());
  }
  req.version_label = field(body, "version_label");
  req.format = field(body, "format");
  req.capture_date = field(body, "capture_date");
  req.active_ingredient = field(body, "active_ingredient", false);
  if (body.contains("content_base64")) {
    req.bytes = base64_decode(field(body, "content_base64"));
  } else {
    req.bytes = to_bytes(field(body, "content"));
  }
  return req;
}

std::string ingest(Workspace& ws, const json& body) {
  return patos::to_json(ws.documents().ingest_document(ingest_request_from_json(body))).dump();
}

std::string versions(const Workspace& ws, const std::string& doc_id) {
  json out = json::array();
  for (const auto& d : ws.documents().list_versions(ws.documents().get(doc_id).lineage)) {
    out.push_back(patos::to_json(d));
  }
  return out.dump();
}

std::string verify(Workspace& ws, const std::string& doc_id) {
  return patos::to_json(ws.documents().verify_integrity(doc_id)).dump();
}

std::string index(Workspace& ws, const std::string& doc_id, const std::string& reader_id) {
  return lector::to_json(ws.index(doc_id, reader_id)).dump();
}

std::string create_pack(Workspace& ws, const json& input) {
  std::optional<std::string> requested;
  if (input.contains("pack_id")) requested = field(input, "pack_id");
  json body = input;
  body.erase("pack_id");
  return lector::to_json(ws.packs().create_pack(body, requested)).dump();
}

std::string show_pack(const Workspace& ws, const std::string& pack_id) {
  return lector::to_json(ws.packs().get(pack_id)).dump();
}

std::string list_packs(const Workspace& ws, const std::optional<std::string>& state) {
  if (!state) return array_of(ws.packs().all_packs()).dump();
  auto s = lector::pack_state_from_string(*state);
  if (!s) throw Error(ErrorCode::InvalidArgument, "unknown pack state " + *state);
  return array_of(ws.packs().packs_in_state(*s)).dump();
}

std::string submit(Workspace& ws, const std::string& pack_id) {
  return lector::to_json(ws.packs().submit_for_review(pack_id)).dump();
}

std::string curate(Workspace& ws, const std::string& pack_id, const std::string& verdict,
                   const std::string& curator, const std::string& justification) {
  auto [pack, decision] =
      ws.packs().curate(pack_id, lector::verdict_from_string(verdict), curator, justification);
  return json{{"pack", lector::to_json(pack)}, {"decision", lector::to_json(decision)}}.dump();
}

std::string derive(Workspace& ws, const std::string& pack_id, const json& input) {
  return lector::to_json(ws.packs().derive_pack(pack_id, input)).dump();
}

std::string validate(const Workspace& ws, const std::string& pack_id) {
  return ws.packs().validate(pack_id, &ws.documents()).to_json().dump();
}

std::string link(Workspace& ws, const std::string& pack_id, const std::string& entity_id) {
  return prisma::to_json(ws.ontology().link_evidence(pack_id, entity_id, ws.packs())).dump();
}

std::string refract(Workspace& ws, const std::string& entity_id, const std::string& view) {
  return prisma::canonical_text(ws.refract(entity_id, parse_view(view)));
}

std::string trace(const Workspace& ws, const std::string& graph_id, const std::string& node_id) {
  return ws.trace(graph_id, node_id).to_json().dump();
}

std::string metrics(const Workspace& ws) { return ws.metrics().to_json().dump(); }

}  // namespace plp::service::ops
