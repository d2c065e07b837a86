#pragma once

// patos/document_store.hpp: content-addressed, append-only document memory.
//
// Two planes live under the store root:
//   blobs/<first2>/<checksum>   immutable content, addressed by SHA-256
//   events.jsonl                provenance events, append-only
//
// The event log is the only metadata record. Opening a store replays it, so
// the (is_current, maturity, artifacts) state of every document is always a
// function of the log alone.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "plp/common/clock.hpp"
#include "plp/common/files.hpp"
#include "plp/common/hashing.hpp"

namespace plp::patos {

enum class DocKind {
  PatientInsert,
  ProfessionalInsert,
  Monograph,
  Smpc,
  Protocol,
  NormativeAct,
};

std::string to_string(DocKind kind);
DocKind doc_kind_from_string(const std::string& s);

enum class MaturityStage { Raw = 0, Cleaned = 1, Structured = 2, Curated = 3 };

std::string to_string(MaturityStage stage);
MaturityStage maturity_from_string(const std::string& s);

struct LineageKey {
  std::string source;
  std::string registration_id;
  DocKind doc_kind = DocKind::ProfessionalInsert;
  std::string medication_name;

  // Throws InvalidArgument when any field is empty.
  void validate() const;
  std::string key() const;

  auto operator<=>(const LineageKey&) const = default;
};

struct DerivedArtifact {
  MaturityStage stage = MaturityStage::Cleaned;
  std::string checksum;
  std::uint64_t size = 0;
};

struct DocumentRef {
  std::string doc_id;
  LineageKey lineage;
  std::string version_label;
  std::string checksum;
  std::string format;
  std::string capture_date;
  bool is_current = false;
  MaturityStage maturity = MaturityStage::Raw;
  std::string active_ingredient;
  std::uint64_t ingest_seq = 0;
  std::vector<DerivedArtifact> artifacts;

  const DerivedArtifact* artifact(MaturityStage stage) const;
};

nlohmann::json to_json(const DocumentRef& ref);

enum class EventKind { Ingested, Promoted, MarkedCurrent, IntegrityChecked };

std::string to_string(EventKind kind);
EventKind event_kind_from_string(const std::string& s);

struct ProvenanceEvent {
  std::string event_id;
  std::string doc_id;
  EventKind kind = EventKind::Ingested;
  std::string timestamp;
  // Canonical JSON text. For `ingested` it carries the full document
  // record, for `promoted` the stage step and artifact checksum.
  std::string detail;
};

nlohmann::json to_json(const ProvenanceEvent& ev);
ProvenanceEvent event_from_json(const nlohmann::json& j);

struct IngestRequest {
  Bytes bytes;
  LineageKey lineage;
  std::string version_label;
  std::string format;
  std::string capture_date;
  std::string active_ingredient;
};

struct IntegrityReport {
  std::string doc_id;
  bool ok = false;
  std::string expected_checksum;
  std::string actual_checksum;  // empty when the blob is missing

  std::string status() const { return ok ? "ok" : "corrupted"; }
};

nlohmann::json to_json(const IntegrityReport& r);

// Deterministic id: hash of lineage fields, version label and content checksum.
std::string make_doc_id(const LineageKey& lineage, const std::string& version_label,
                        const std::string& checksum);

// Rebuilds document state from an event stream. Used on open and by audits.
std::map<std::string, DocumentRef> replay_events(const std::vector<ProvenanceEvent>& events);

class DocumentStore {
 public:
  explicit DocumentStore(fs::path root, Clock clock = system_clock());

  DocumentStore(const DocumentStore&) = delete;
  DocumentStore& operator=(const DocumentStore&) = delete;

  DocumentRef ingest_document(const IngestRequest& request);
  IntegrityReport verify_integrity(const std::string& doc_id);
  std::vector<DocumentRef> list_versions(const LineageKey& lineage) const;
  DocumentRef mark_current(const std::string& doc_id);
  DocumentRef promote_maturity(const std::string& doc_id, MaturityStage target,
                               std::optional<Bytes> derived_artifact = std::nullopt);
  std::vector<ProvenanceEvent> get_audit_trail(const std::string& doc_id) const;

  // Same comparison as verify_integrity without appending an event.
  IntegrityReport check_integrity(const std::string& doc_id) const;

  std::optional<DocumentRef> find(const std::string& doc_id) const;
  DocumentRef get(const std::string& doc_id) const;
  std::vector<DocumentRef> all_documents() const;
  std::vector<ProvenanceEvent> all_events() const;

  Bytes read_raw(const std::string& doc_id) const;
  std::optional<Bytes> read_artifact(const std::string& doc_id, MaturityStage stage) const;

  // Ingests every record of a line-delimited manifest. Relative `path`
  // fields resolve against the manifest's directory.
  std::vector<DocumentRef> import_manifest(const fs::path& manifest);

  const fs::path& root() const { return root_; }
  fs::path blob_path(const std::string& checksum) const;

 private:
  std::mutex& lineage_mutex(const std::string& lineage_key);
  void store_blob(const std::string& checksum, std::span<const std::byte> bytes);
  ProvenanceEvent append_event(const std::string& doc_id, EventKind kind,
                               std::string detail);

  fs::path root_;
  Clock clock_;
  RecordLog log_;

  mutable std::shared_mutex state_mutex_;
  std::map<std::string, DocumentRef> docs_;
  std::map<std::string, std::vector<std::string>> lineages_;  // key -> doc ids
  std::vector<ProvenanceEvent> events_;
  std::uint64_t next_event_seq_ = 1;
  std::uint64_t next_ingest_seq_ = 1;

  std::mutex lineage_locks_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> lineage_locks_;
};

}  // namespace plp::patos
