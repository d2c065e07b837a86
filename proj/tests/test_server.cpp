#include <doctest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "lector_fixtures.hpp"
#include "plp/cli/cli.hpp"
#include "plp/service/dipyrone_fixture.hpp"
#include "server_harness.hpp"
#include "test_support.hpp"

using namespace plp;
using namespace plp::testing;
using nlohmann::json;

namespace {

json parse(const httplib::Result& r) {
  REQUIRE(r);
  return json::parse(r->body);
}

json ingest_body(const std::string& label, const std::string& text) {
  return {{"source", "ANVISA"},
          {"registration_id", "186200018"},
          {"doc_kind", "professional_insert"},
          {"medication_name", "novalgina"},
          {"version_label", label},
          {"format", "pdf"},
          {"capture_date", "2026-02-" + label.substr(label.size() - 2)},
          {"content", text}};
}

json pack_input(const json& doc, std::set<std::string> nodes = {"1.1"}) {
  patos::DocumentRef ref;
  ref.doc_id = doc.at("doc_id");
  ref.version_label = doc.at("version_label");
  ref.checksum = doc.at("checksum");
  auto in = indication_input(ref);
  in.provenance = {cite(ref, std::move(nodes))};
  return lector::to_json(in);
}

std::string cli_out(const std::vector<std::string>& args, int* code = nullptr) {
  std::ostringstream out, err;
  int rc = cli::run(args, out, err);
  if (code) *code = rc;
  return out.str();
}

std::map<std::string, std::optional<std::string>> g_env;
std::optional<std::string> fake_env(const std::string& name) {
  auto it = g_env.find(name);
  return it == g_env.end() ? std::nullopt : it->second;
}

}  // namespace

TEST_CASE("document endpoints: ingest, idempotency, versions, verify") {
  TempDir dir;
  RunningServer srv(local_config(dir.path() / "data"));
  auto c = srv.client();

  auto r1 = c.Post("/documents", ingest_body("20260201", kInsertText).dump(), "application/json");
  REQUIRE(r1);
  CHECK(r1->status == 200);
  auto doc = json::parse(r1->body);
  CHECK(doc["is_current"] == true);

  // Same bytes again: the same record.
  auto again = parse(c.Post("/documents", ingest_body("20260201", kInsertText).dump(), "application/json"));
  CHECK(again["doc_id"] == doc["doc_id"]);

  // Same version label with different bytes conflicts.
  auto conflict = c.Post("/documents", ingest_body("20260201", "other text").dump(), "application/json");
  REQUIRE(conflict);
  CHECK(conflict->status == 409);
  CHECK(json::parse(conflict->body)["code"] == "duplicate_version_conflict");

  // Base64 content lands on the same checksum as the plain text.
  auto b64 = ingest_body("20260202", "");
  b64.erase("content");
  b64["content_base64"] = "aGVsbG8gd29ybGQK";  // "hello world\n"
  auto second = parse(c.Post("/documents", b64.dump(), "application/json"));
  CHECK(second["checksum"] == "a948904f2f0f479b8f8197694b30184b0d2ed1c1cd2a1ec0fb85d299a192a447");
  CHECK(second["is_current"] == false);  // only the first version is current by default

  auto versions = parse(c.Get("/documents/" + doc["doc_id"].get<std::string>() + "/versions"));
  REQUIRE(versions.size() == 2);
  CHECK(versions[0]["version_label"] == "20260201");
  CHECK(versions[0]["is_current"] == true);
  CHECK(versions[1]["is_current"] == false);

  auto ok = parse(c.Post("/documents/" + doc["doc_id"].get<std::string>() + "/verify"));
  CHECK(ok["status"] == "ok");

  auto missing = c.Get("/documents/DOC-nope/versions");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  CHECK(json::parse(missing->body)["code"] == "unknown_document");

  auto empty = c.Post("/documents", ingest_body("20260203", "").dump(), "application/json");
  REQUIRE(empty);
  CHECK(empty->status == 422);
  CHECK(json::parse(empty->body)["code"] == "empty_document");

  auto garbage = c.Post("/documents", "not json", "application/json");
  REQUIRE(garbage);
  CHECK(garbage->status == 422);
  CHECK(json::parse(garbage->body)["code"] == "invalid_argument");
}

TEST_CASE("pack lifecycle over HTTP with curation gating") {
  TempDir dir;
  RunningServer srv(local_config(dir.path() / "data", "dipyrone"));
  auto c = srv.client();

  auto doc = parse(c.Post("/documents", ingest_body("20260210", kInsertText).dump(), "application/json"));
  auto created = c.Post("/packs", pack_input(doc).dump(), "application/json");
  REQUIRE(created);
  REQUIRE(created->status == 200);
  auto pack = json::parse(created->body);
  std::string id = pack["pack_id"];
  CHECK(pack["status"]["state"] == "draft");
  CHECK(id == "EP-040");

  auto bad = pack_input(doc);
  bad["provenance"] = json::array();
  auto rejected = c.Post("/packs", bad.dump(), "application/json");
  REQUIRE(rejected);
  CHECK(rejected->status == 422);
  auto env = json::parse(rejected->body);
  CHECK(env["code"] == "structural_violation");
  CHECK(env["detail"]["conditions"] == json::array({2}));

  // Curation before review is an illegal transition.
  httplib::Headers curator{{"X-Curator", "curator-09"}};
  auto early = c.Post("/packs/" + id + "/curate", curator,
                      json{{"verdict", "accept"}, {"justification", "ok"}}.dump(), "application/json");
  REQUIRE(early);
  CHECK(early->status == 409);
  CHECK(json::parse(early->body)["code"] == "illegal_transition");

  CHECK(parse(c.Post("/packs/" + id + "/submit"))["status"]["state"] == "under_review");

  auto queue = parse(c.Get("/packs?state=under_review"));
  REQUIRE(queue.size() == 1);
  CHECK(queue[0]["pack_id"] == id);
  CHECK(parse(c.Get("/packs?state=accepted")).size() == 37);
  CHECK(parse(c.Get("/packs")).size() == 39);
  auto bogus_state = c.Get("/packs?state=pending");
  REQUIRE(bogus_state);
  CHECK(bogus_state->status == 422);

  auto no_just = c.Post("/packs/" + id + "/curate", curator, json{{"verdict", "accept"}}.dump(),
                        "application/json");
  REQUIRE(no_just);
  CHECK(no_just->status == 422);
  CHECK(json::parse(no_just->body)["code"] == "missing_justification");

  auto no_curator = c.Post("/packs/" + id + "/curate",
                           json{{"verdict", "accept"}, {"justification", "ok"}}.dump(), "application/json");
  REQUIRE(no_curator);
  CHECK(json::parse(no_curator->body)["code"] == "missing_curator");

  // A link before acceptance is refused.
  auto early_link = c.Post("/links", json{{"pack_id", id}, {"entity_id", service::kDipyroneVmp}}.dump(),
                           "application/json");
  REQUIRE(early_link);
  CHECK(json::parse(early_link->body)["code"] == "pack_not_accepted");

  auto decided = parse(c.Post("/packs/" + id + "/curate", curator,
                              json{{"verdict", "accept"}, {"justification", "matches section 1.1"}}.dump(),
                              "application/json"));
  CHECK(decided["pack"]["status"]["state"] == "accepted");
  CHECK(decided["pack"]["status"]["curator"] == "curator-09");
  CHECK(decided["decision"]["verdict"] == "accept");

  auto shown = parse(c.Get("/packs/" + id));
  CHECK(shown == decided["pack"]);
  auto report = parse(c.Get("/packs/" + id + "/validate"));
  CHECK(report["well_formed"] == true);

  auto link = c.Post("/links", json{{"pack_id", id}, {"entity_id", service::kDipyroneVmp}}.dump(),
                     "application/json");
  REQUIRE(link);
  CHECK(link->status == 200);
  auto dup = c.Post("/links", json{{"pack_id", id}, {"entity_id", service::kDipyroneVmp}}.dump(),
                    "application/json");
  REQUIRE(dup);
  CHECK(dup->status == 409);

  auto derived = parse(c.Post("/packs/" + id + "/derive", pack_input(doc, {"1.1", "1.3"}).dump(),
                              "application/json"));
  CHECK(derived["derived_from"] == id);
  CHECK(derived["status"]["state"] == "draft");
  CHECK(parse(c.Get("/packs/" + id)) == shown);

  auto unknown = c.Get("/packs/EP-999");
  REQUIRE(unknown);
  CHECK(unknown->status == 404);
  CHECK(json::parse(unknown->body)["code"] == "unknown_pack");

  // The rematerialized prescription view carries the new assertion with a
  // working trace.
  auto graph = parse(c.Get(std::string("/entities/") + service::kDipyroneVmp + "/views/CTX_VMP_COMPLETE"));
  std::string node = "assertion:" + id;
  bool found = false;
  for (const auto& n : graph["nodes"]) found = found || n["id"] == node;
  CHECK(found);
  auto trace = parse(c.Get("/graphs/" + graph["graph_id"].get<std::string>() + "/trace/" + node));
  CHECK(trace["verified"] == true);

  auto m = parse(c.Get("/metrics"));
  CHECK(m["packs"] == 40);
  CHECK(m["packs_accepted"] == 38);
  CHECK(m["links"] == 120);
}

TEST_CASE("service bytes equal CLI bytes for refraction, packs and metrics") {
  TempDir dir;
  RunningServer srv(local_config(dir.path() / "svc", "dipyrone"));
  auto c = srv.client();
  auto cli_dir = (dir.path() / "cli").string();
  int rc = -1;
  cli_out({"plp", "--data-dir", cli_dir, "-q", "fixture", "load-dipyrone"}, &rc);
  REQUIRE(rc == 0);

  auto structured = [&](std::vector<std::string> args) {
    args.insert(args.begin(), {"plp", "--data-dir", cli_dir, "--output", "structured"});
    int code = -1;
    auto text = cli_out(args, &code);
    CHECK(code == 0);
    REQUIRE(!text.empty());
    CHECK(text.back() == '\n');
    return text.substr(0, text.size() - 1);
  };

  for (auto [entity, view] : {std::pair{service::kDipyroneSubstance, "CTX_SUBSTANCE_PROFILE"},
                              std::pair{service::kDipyroneVmp, "CTX_VMP_COMPLETE"},
                              std::pair{service::kDipyroneVmpp, "CTX_DISPENSATION"},
                              std::pair{service::kDipyroneAmpp, "CTX_MPP_REGULATORY"}}) {
    auto r = c.Get(std::string("/entities/") + entity + "/views/" + view);
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(r->body == structured({"refract", entity, view}));
  }
  CHECK(c.Get("/packs/EP-001")->body == structured({"pack", "show", "EP-001"}));
  CHECK(c.Get("/packs/EP-014")->body == structured({"pack", "show", "EP-014"}));
  CHECK(c.Get("/metrics")->body == structured({"metrics"}));
  auto graph = std::string("CTX_VMP_COMPLETE--") + service::kDipyroneVmp;
  CHECK(c.Get("/graphs/" + graph + "/trace/assertion:EP-001")->body ==
        structured({"trace", graph, "assertion:EP-001"}));
}

TEST_CASE("Idempotency-Key replays the first response") {
  TempDir dir;
  RunningServer srv(local_config(dir.path() / "data"));
  auto c = srv.client();
  httplib::Headers key{{"Idempotency-Key", "k-1"}};

  auto first = c.Post("/documents", key, ingest_body("20260201", kInsertText).dump(), "application/json");
  REQUIRE(first);
  CHECK(first->status == 200);
  CHECK(!first->has_header("Idempotent-Replay"));

  // A conflicting body under the same key replays instead of conflicting.
  auto replay = c.Post("/documents", key, ingest_body("20260201", "different").dump(), "application/json");
  REQUIRE(replay);
  CHECK(replay->status == 200);
  CHECK(replay->body == first->body);
  CHECK(replay->get_header_value("Idempotent-Replay") == "true");

  auto fresh = c.Post("/documents", httplib::Headers{{"Idempotency-Key", "k-2"}},
                      ingest_body("20260201", "different").dump(), "application/json");
  REQUIRE(fresh);
  CHECK(fresh->status == 409);
}

TEST_CASE("unknown routes answer with the error envelope") {
  TempDir dir;
  RunningServer srv(local_config(dir.path() / "data"));
  auto c = srv.client();
  auto r = c.Get("/nowhere");
  REQUIRE(r);
  CHECK(r->status == 404);
  auto env = json::parse(r->body);
  CHECK(env["code"] == "not_found");
  CHECK(env.contains("message"));
  CHECK(env.contains("detail"));

  auto view = c.Get("/entities/VMP-000051605/views/CTX_NOPE");
  REQUIRE(view);
  CHECK(view->status == 422);
  CHECK(json::parse(view->body)["code"] == "invalid_argument");
  auto entity = c.Get("/entities/VMP-000000001/views/CTX_VMP_COMPLETE");
  REQUIRE(entity);
  CHECK(entity->status == 404);
}

TEST_CASE("configuration: file, environment and validation") {
  TempDir dir;
  g_env.clear();

  auto c = service::config_from_json(
      json{{"data_dir", (dir.path() / "a").string()}, {"listen_addr", "0.0.0.0:9001"}}, fake_env);
  CHECK(c.host == "0.0.0.0");
  CHECK(c.port == 9001);
  CHECK(std::filesystem::is_directory(dir.path() / "a"));

  g_env[service::kEnvDataDir] = (dir.path() / "b").string();
  g_env[service::kEnvListenAddr] = "127.0.0.1:9002";
  c = service::config_from_json(
      json{{"data_dir", (dir.path() / "a").string()}, {"listen_addr", "0.0.0.0:9001"}}, fake_env);
  CHECK(c.data_dir == dir.path() / "b");
  CHECK(c.port == 9002);
  g_env.clear();

  auto code_of = [](auto&& fn) { return error_code_of(fn); };
  CHECK(code_of([&] { service::config_from_json(json{{"listen_addr", "1.2.3.4:1"}}, fake_env); }) ==
        ErrorCode::ConfigInvalid);
  CHECK(code_of([&] {
          service::config_from_json(json{{"data_dir", dir.path().string()}, {"port", "1"}}, fake_env);
        }) == ErrorCode::ConfigInvalid);
  for (auto addr : {"localhost", "host:", "host:abc", "host:70000"}) {
    CHECK(code_of([&] {
            service::config_from_json(json{{"data_dir", dir.path().string()}, {"listen_addr", addr}},
                                      fake_env);
          }) == ErrorCode::ConfigInvalid);
  }
  CHECK(code_of([&] { service::load_config(dir.path() / "missing.json", fake_env); }) ==
        ErrorCode::ConfigInvalid);
  std::ofstream(dir.path() / "bad.json") << "{ not json";
  CHECK(code_of([&] { service::load_config(dir.path() / "bad.json", fake_env); }) ==
        ErrorCode::ConfigInvalid);
  std::ofstream(dir.path() / "good.json")
      << json{{"data_dir", (dir.path() / "g").string()}, {"listen_addr", "127.0.0.1:0"}}.dump();
  CHECK(service::load_config(dir.path() / "good.json", fake_env).port == 0);

  auto missing_fixture = local_config(dir.path() / "f", (dir.path() / "nope.jsonl").string());
  CHECK(code_of([&] { service::Server s(missing_fixture); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("binding a port twice is AddressInUse") {
  TempDir dir;
  RunningServer first(local_config(dir.path() / "a"));
  auto cfg = local_config(dir.path() / "b");
  cfg.port = first.port();
  service::Server second(cfg);
  auto e = error_of([&] { second.bind(); });
  CHECK(e.code() == ErrorCode::AddressInUse);
  CHECK(std::string(e.code_name()) == "address_in_use");
}

TEST_CASE("ontology fixture files seed an empty ontology") {
  TempDir dir;
  auto src = (dir.path() / "src").string();
  int rc = -1;
  cli_out({"plp", "--data-dir", src, "-q", "fixture", "load-dipyrone"}, &rc);
  REQUIRE(rc == 0);
  auto exported = (dir.path() / "onto.jsonl").string();
  cli_out({"plp", "--data-dir", src, "-q", "ontology", "export", exported}, &rc);
  REQUIRE(rc == 0);

  // Links reference packs the fresh workspace does not have.
  auto seed = (dir.path() / "seed.jsonl").string();
  {
    std::ifstream in(exported);
    std::ofstream out(seed);
    for (std::string line; std::getline(in, line);) {
      if (json::parse(line).value("record", "") != "link") out << line << "\n";
    }
  }
  RunningServer srv(local_config(dir.path() / "fresh", seed));
  CHECK(srv.server().workspace().ontology().entity_count() > 0);
  auto r = srv.client().Get("/metrics");
  REQUIRE(r);
  CHECK(json::parse(r->body)["packs"] == 0);
}
