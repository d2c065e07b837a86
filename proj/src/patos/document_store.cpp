#include "plp/patos/document_store.hpp"

#include <algorithm>
#include <cstdio>

#include "plp/common/error.hpp"

namespace plp::patos {

using nlohmann::json;

namespace {

struct KindName {
  DocKind kind;
  const char* name;
};

constexpr KindName kKinds[] = {
    {DocKind::PatientInsert, "patient_insert"},
    {DocKind::ProfessionalInsert, "professional_insert"},
    {DocKind::Monograph, "monograph"},
    {DocKind::Smpc, "smpc"},
    {DocKind::Protocol, "protocol"},
    {DocKind::NormativeAct, "normative_act"},
};

constexpr const char* kStages[] = {"RAW", "CLEANED", "STRUCTURED", "CURATED"};

constexpr const char* kEventKinds[] = {"ingested", "promoted", "marked_current",
                                       "integrity_checked"};

json lineage_json(const LineageKey& l) {
  return json{{"source", l.source},
              {"registration_id", l.registration_id},
              {"doc_kind", to_string(l.doc_kind)},
              {"medication_name", l.medication_name}};
}

LineageKey lineage_from_json(const json& j) {
  return LineageKey{j.at("source").get<std::string>(),
                    j.at("registration_id").get<std::string>(),
                    doc_kind_from_string(j.at("doc_kind").get<std::string>()),
                    j.at("medication_name").get<std::string>()};
}

std::string format_event_id(std::uint64_t seq) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "EVT-%010llu", static_cast<unsigned long long>(seq));
  return buf;
}

bool version_order(const DocumentRef& a, const DocumentRef& b) {
  if (a.capture_date != b.capture_date) return a.capture_date < b.capture_date;
  return a.ingest_seq < b.ingest_seq;
}

}  // namespace

std::string to_string(DocKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

DocKind doc_kind_from_string(const std::string& s) {
  for (const auto& k : kKinds) {
    if (s == k.name) return k.kind;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown doc_kind '" + s + "'");
}

std::string to_string(MaturityStage stage) { return kStages[static_cast<int>(stage)]; }

MaturityStage maturity_from_string(const std::string& s) {
  for (int i = 0; i < 4; ++i) {
    if (s == kStages[i]) return static_cast<MaturityStage>(i);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown maturity stage '" + s + "'");
}

std::string to_string(EventKind kind) { return kEventKinds[static_cast<int>(kind)]; }

EventKind event_kind_from_string(const std::string& s) {
  for (int i = 0; i < 4; ++i) {
    if (s == kEventKinds[i]) return static_cast<EventKind>(i);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown event kind '" + s + "'");
}

void LineageKey::validate() const {
  if (source.empty() || registration_id.empty() || medication_name.empty()) {
    throw Error(ErrorCode::InvalidArgument, "lineage fields must be non-empty");
  }
}

std::string LineageKey::key() const {
  return source + '\x1f' + registration_id + '\x1f' + to_string(doc_kind) + '\x1f' +
         medication_name;
}

const DerivedArtifact* DocumentRef::artifact(MaturityStage stage) const {
  for (const auto& a : artifacts) {
    if (a.stage == stage) return &a;
  }
  return nullptr;
}

json to_json(const DocumentRef& ref) {
  json artifacts = json::array();
  for (const auto& a : ref.artifacts) {
    artifacts.push_back(
        {{"stage", to_string(a.stage)}, {"checksum", a.checksum}, {"size", a.size}});
  }
  return json{{"doc_id", ref.doc_id},
              {"lineage", lineage_json(ref.lineage)},
              {"version_label", ref.version_label},
              {"checksum", ref.checksum},
              {"format", ref.format},
              {"capture_date", ref.capture_date},
              {"is_current", ref.is_current},
              {"maturity", to_string(ref.maturity)},
              {"active_ingredient", ref.active_ingredient},
              {"artifacts", artifacts}};
}

json to_json(const ProvenanceEvent& ev) {
  return json{{"event_id", ev.event_id},
              {"doc_id", ev.doc_id},
              {"kind", to_string(ev.kind)},
              {"timestamp", ev.timestamp},
              {"detail", ev.detail}};
}

ProvenanceEvent event_from_json(const json& j) {
  return ProvenanceEvent{j.at("event_id").get<std::string>(),
                         j.at("doc_id").get<std::string>(),
                         event_kind_from_string(j.at("kind").get<std::string>()),
                         j.at("timestamp").get<std::string>(),
                         j.at("detail").get<std::string>()};
}

json to_json(const IntegrityReport& r) {
  return json{{"doc_id", r.doc_id},
              {"status", r.status()},
              {"expected_checksum", r.expected_checksum},
              {"actual_checksum", r.actual_checksum}};
}

std::string make_doc_id(const LineageKey& lineage, const std::string& version_label,
                        const std::string& checksum) {
  return "DOC-" +
         sha256_hex(lineage.key() + '\x1f' + version_label + '\x1f' + checksum).substr(0, 16);
}

std::map<std::string, DocumentRef> replay_events(const std::vector<ProvenanceEvent>& events) {
  std::map<std::string, DocumentRef> docs;
  for (const auto& ev : events) {
    switch (ev.kind) {
      case EventKind::Ingested: {
        auto d = json::parse(ev.detail);
        DocumentRef ref;
        ref.doc_id = ev.doc_id;
        ref.lineage = lineage_from_json(d.at("lineage"));
        ref.version_label = d.at("version_label").get<std::string>();
        ref.checksum = d.at("checksum").get<std::string>();
        ref.format = d.at("format").get<std::string>();
        ref.capture_date = d.at("capture_date").get<std::string>();
        ref.active_ingredient = d.at("active_ingredient").get<std::string>();
        ref.ingest_seq = d.at("ingest_seq").get<std::uint64_t>();
        ref.is_current = d.at("is_current").get<bool>();
        docs[ref.doc_id] = std::move(ref);
        break;
      }
      case EventKind::Promoted: {
        auto d = json::parse(ev.detail);
        auto& ref = docs.at(ev.doc_id);
        ref.maturity = maturity_from_string(d.at("to").get<std::string>());
        if (d.contains("artifact_checksum")) {
          ref.artifacts.push_back(DerivedArtifact{ref.maturity,
                                                  d.at("artifact_checksum").get<std::string>(),
                                                  d.at("artifact_size").get<std::uint64_t>()});
        }
        break;
      }
      case EventKind::MarkedCurrent: {
        const auto lineage = docs.at(ev.doc_id).lineage;
        for (auto& [id, ref] : docs) {
          if (ref.lineage == lineage) ref.is_current = (id == ev.doc_id);
        }
        break;
      }
      case EventKind::IntegrityChecked:
        break;
    }
  }
  return docs;
}

DocumentStore::DocumentStore(fs::path root, Clock clock)
    : root_(std::move(root)), clock_(std::move(clock)), log_(root_ / "events.jsonl") {
  fs::create_directories(root_ / "blobs");
  for (const auto& j : log_.read_all()) events_.push_back(event_from_json(j));
  docs_ = replay_events(events_);
  next_event_seq_ = events_.size() + 1;
  for (const auto& [id, ref] : docs_) {
    lineages_[ref.lineage.key()].push_back(id);
    next_ingest_seq_ = std::max(next_ingest_seq_, ref.ingest_seq + 1);
  }
}

fs::path DocumentStore::blob_path(const std::string& checksum) const {
  return root_ / "blobs" / checksum.substr(0, 2) / checksum;
}

std::mutex& DocumentStore::lineage_mutex(const std::string& lineage_key) {
  std::lock_guard lock(lineage_locks_mutex_);
  auto& slot = lineage_locks_[lineage_key];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

void DocumentStore::store_blob(const std::string& checksum, std::span<const std::byte> bytes) {
  auto path = blob_path(checksum);
  if (fs::exists(path)) return;  // content-addressed: same name, same bytes
  write_file_atomic(path, bytes);
}

ProvenanceEvent DocumentStore::append_event(const std::string& doc_id, EventKind kind,
                                            std::string detail) {
  // Caller holds state_mutex_ exclusively.
  ProvenanceEvent ev{format_event_id(next_event_seq_), doc_id, kind, clock_(),
                     std::move(detail)};
  log_.append(to_json(ev));
  ++next_event_seq_;
  events_.push_back(ev);
  return ev;
}

DocumentRef DocumentStore::ingest_document(const IngestRequest& request) {
  if (request.bytes.empty()) {
    throw Error(ErrorCode::EmptyDocument, "document has no bytes");
  }
  request.lineage.validate();
  if (request.version_label.empty() || request.format.empty()) {
    throw Error(ErrorCode::InvalidArgument, "version_label and format must be non-empty");
  }
  check_calendar_date(request.capture_date);

  const std::string checksum = sha256_hex(request.bytes);
  const std::string lineage_key = request.lineage.key();
  std::lock_guard lineage_lock(lineage_mutex(lineage_key));

  {
    std::shared_lock read(state_mutex_);
    auto it = lineages_.find(lineage_key);
    if (it != lineages_.end()) {
      for (const auto& id : it->second) {
        const auto& existing = docs_.at(id);
        if (existing.version_label != request.version_label) continue;
        if (existing.checksum == checksum) return existing;
        throw Error(ErrorCode::DuplicateVersionConflict,
                    "version '" + request.version_label +
                        "' already ingested with different bytes",
                    json{{"doc_id", id}, {"existing_checksum", existing.checksum},
                         {"new_checksum", checksum}});
      }
    }
  }

  store_blob(checksum, request.bytes);

  std::unique_lock write(state_mutex_);
  DocumentRef ref;
  ref.doc_id = make_doc_id(request.lineage, request.version_label, checksum);
  ref.lineage = request.lineage;
  ref.version_label = request.version_label;
  ref.checksum = checksum;
  ref.format = request.format;
  ref.capture_date = request.capture_date;
  ref.active_ingredient = request.active_ingredient;
  ref.ingest_seq = next_ingest_seq_++;
  auto& members = lineages_[lineage_key];
  ref.is_current = members.empty();

  json detail{{"lineage", lineage_json(ref.lineage)},
              {"version_label", ref.version_label},
              {"checksum", ref.checksum},
              {"format", ref.format},
              {"capture_date", ref.capture_date},
              {"active_ingredient", ref.active_ingredient},
              {"ingest_seq", ref.ingest_seq},
              {"is_current", ref.is_current}};
  append_event(ref.doc_id, EventKind::Ingested, detail.dump());
  members.push_back(ref.doc_id);
  docs_[ref.doc_id] = ref;
  return ref;
}

IntegrityReport DocumentStore::check_integrity(const std::string& doc_id) const {
  std::string expected;
  {
    std::shared_lock read(state_mutex_);
    auto it = docs_.find(doc_id);
    if (it == docs_.end()) {
      throw Error(ErrorCode::UnknownDocument, "unknown document " + doc_id);
    }
    expected = it->second.checksum;
  }
  IntegrityReport report{doc_id, false, expected, ""};
  auto path = blob_path(expected);
  if (!fs::exists(path)) return report;
  report.actual_checksum = sha256_hex(read_file(path));
  report.ok = report.actual_checksum == expected;
  return report;
}

IntegrityReport DocumentStore::verify_integrity(const std::string& doc_id) {
  auto report = check_integrity(doc_id);
  std::unique_lock write(state_mutex_);
  append_event(doc_id, EventKind::IntegrityChecked,
               json{{"status", report.status()}}.dump());
  return report;
}

std::vector<DocumentRef> DocumentStore::list_versions(const LineageKey& lineage) const {
  std::shared_lock read(state_mutex_);
  std::vector<DocumentRef> out;
  auto it = lineages_.find(lineage.key());
  if (it == lineages_.end()) return out;
  for (const auto& id : it->second) out.push_back(docs_.at(id));
  std::stable_sort(out.begin(), out.end(), version_order);
  return out;
}

DocumentRef DocumentStore::mark_current(const std::string& doc_id) {
  auto target = get(doc_id);
  const auto lineage_key = target.lineage.key();
  std::lock_guard lineage_lock(lineage_mutex(lineage_key));
  std::unique_lock write(state_mutex_);
  auto& ref = docs_.at(doc_id);
  if (ref.is_current) return ref;
  append_event(doc_id, EventKind::MarkedCurrent, "{}");
  for (const auto& id : lineages_.at(lineage_key)) docs_.at(id).is_current = (id == doc_id);
  return ref;
}

DocumentRef DocumentStore::promote_maturity(const std::string& doc_id, MaturityStage target,
                                            std::optional<Bytes> derived_artifact) {
  auto current = get(doc_id);
  std::lock_guard lineage_lock(lineage_mutex(current.lineage.key()));
  current = get(doc_id);

  const int from = static_cast<int>(current.maturity);
  const int to = static_cast<int>(target);
  if (to <= from) {
    throw Error(ErrorCode::BackwardPromotion,
                "cannot promote " + to_string(current.maturity) + " to " + to_string(target));
  }
  if (to != from + 1) {
    throw Error(ErrorCode::SkippedStage,
                "promotion from " + to_string(current.maturity) + " to " + to_string(target) +
                    " skips a stage");
  }

  json detail{{"from", to_string(current.maturity)}, {"to", to_string(target)}};
  std::optional<DerivedArtifact> artifact;
  if (derived_artifact) {
    artifact = DerivedArtifact{target, sha256_hex(*derived_artifact), derived_artifact->size()};
    store_blob(artifact->checksum, *derived_artifact);
    detail["artifact_checksum"] = artifact->checksum;
    detail["artifact_size"] = artifact->size;
  }

  std::unique_lock write(state_mutex_);
  append_event(doc_id, EventKind::Promoted, detail.dump());
  auto& ref = docs_.at(doc_id);
  ref.maturity = target;
  if (artifact) ref.artifacts.push_back(*artifact);
  return ref;
}

std::vector<ProvenanceEvent> DocumentStore::get_audit_trail(const std::string& doc_id) const {
  std::shared_lock read(state_mutex_);
  if (!docs_.contains(doc_id)) {
    throw Error(ErrorCode::UnknownDocument, "unknown document " + doc_id);
  }
  std::vector<ProvenanceEvent> out;
  for (const auto& ev : events_) {
    if (ev.doc_id == doc_id) out.push_back(ev);
  }
  return out;
}

std::optional<DocumentRef> DocumentStore::find(const std::string& doc_id) const {
  std::shared_lock read(state_mutex_);
  auto it = docs_.find(doc_id);
  if (it == docs_.end()) return std::nullopt;
  return it->second;
}

DocumentRef DocumentStore::get(const std::string& doc_id) const {
  auto ref = find(doc_id);
  if (!ref) throw Error(ErrorCode::UnknownDocument, "unknown document " + doc_id);
  return *ref;
}

std::vector<DocumentRef> DocumentStore::all_documents() const {
  std::shared_lock read(state_mutex_);
  std::vector<DocumentRef> out;
  out.reserve(docs_.size());
  for (const auto& [id, ref] : docs_) out.push_back(ref);
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.ingest_seq < b.ingest_seq; });
  return out;
}

std::vector<ProvenanceEvent> DocumentStore::all_events() const {
  std::shared_lock read(state_mutex_);
  return events_;
}

Bytes DocumentStore::read_raw(const std::string& doc_id) const {
  return read_file(blob_path(get(doc_id).checksum));
}

std::optional<Bytes> DocumentStore::read_artifact(const std::string& doc_id,
                                                  MaturityStage stage) const {
  auto ref = get(doc_id);
  if (stage == MaturityStage::Raw) return read_file(blob_path(ref.checksum));
  const auto* a = ref.artifact(stage);
  if (!a) return std::nullopt;
  return read_file(blob_path(a->checksum));
}

std::vector<DocumentRef> DocumentStore::import_manifest(const fs::path& manifest) {
  std::vector<DocumentRef> out;
  const auto base = manifest.parent_path();
  for (const auto& rec : read_json_lines(manifest)) {
    IngestRequest req;
    try {
      req.lineage = LineageKey{rec.at("source").get<std::string>(),
                               rec.at("registration_id").get<std::string>(),
                               doc_kind_from_string(rec.at("doc_kind").get<std::string>()),
                               rec.at("medication_name").get<std::string>()};
      req.version_label = rec.at("version_label").get<std::string>();
      req.format = rec.at("format").get<std::string>();
      req.capture_date = rec.at("capture_date").get<std::string>();
      req.active_ingredient = rec.value("active_ingredient", std::string{});
      fs::path p = rec.at("path").get<std::string>();
      req.bytes = read_file(p.is_absolute() ? p : base / p);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidArgument, std::string("manifest record: ") + e.what());
    }
    out.push_back(ingest_document(req));
  }
  return out;
}

}  // namespace plp::patos
