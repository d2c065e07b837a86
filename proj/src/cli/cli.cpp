#include "plp/cli/cli.hpp"

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "plp/common/error.hpp"
#include "plp/lector/well_formed.hpp"
#include "plp/prisma/synthetic.hpp"
#include "plp/service/dipyrone_fixture.hpp"
#include "plp/service/operations.hpp"
#include "plp/service/server.hpp"

namespace plp::cli {

using nlohmann::json;
namespace fs = std::filesystem;
namespace ops = service::ops;

namespace {

struct Context {
  std::string data_dir;
  std::string output = "human";
  bool quiet = false;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
  int status = kOk;

  bool structured() const { return output == "structured"; }

  // Structured mode prints the canonical bytes; human mode prints `human`.
  void emit(const std::string& canonical, const std::string& human) const {
    if (structured()) {
      *out << canonical << '\n';
    } else if (!quiet) {
      *out << human;
    }
  }
  void emit(const std::string& canonical) const {
    emit(canonical, json::parse(canonical).dump(2) + "\n");
  }
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path, json{{"path", path}});
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::InvalidArgument, path + " is not valid JSON");
  return j;
}

std::string metrics_text(const json& m) {
  std::ostringstream s;
  s << "packs " << m["packs"] << "\n"
    << "accepted " << m["packs_accepted"] << "\n"
    << "rejected " << m["packs_rejected"] << "\n"
    << "links " << m["links"] << "\n"
    << "documents " << m["documents"] << "\n"
    << "page_index_trees " << m["page_index_trees"] << "\n"
    << "graphs_materialized " << m["graphs_materialized"] << "\n"
    << "views_materialized " << m["views_materialized"].size() << "\n"
    << "assertion_types " << m["assertion_types"].size() << "\n"
    << "provenance_completeness " << m["provenance_completeness"] << "\n"
    << "interpretive_traceability " << m["interpretive_traceability"] << "\n"
    << "curatorial_coverage " << m["curatorial_coverage"] << "\n"
    << "accountability " << m["accountability"] << "\n";
  bool all = true;
  for (const auto& [pair, differs] : m["contextual_differentiation"].items()) all = all && differs.get<bool>();
  s << "contextual_differentiation " << (all ? "all views differ" : "some views coincide") << "\n";
  if (m["empty"].get<bool>()) s << "(empty corpus: fractions hold vacuously)\n";
  return s.str();
}

void run_serve(Context& ctx, const std::string& config_file, const std::string& listen,
               const std::string& fixture) {
  json j = json::object();
  if (!config_file.empty()) {
    std::ifstream in(config_file);
    if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot read config " + config_file);
    j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::ConfigInvalid, "config is not a JSON object");
  }
  // Flags win over the environment, which wins over the file.
  auto env = service::process_env();
  std::set<std::string> shadowed;
  if (!ctx.data_dir.empty()) {
    j["data_dir"] = ctx.data_dir;
    shadowed.insert(service::kEnvDataDir);
  }
  if (!listen.empty()) {
    j["listen_addr"] = listen;
    shadowed.insert(service::kEnvListenAddr);
  }
  if (!fixture.empty()) {
    j["fixture_path"] = fixture;
    shadowed.insert(service::kEnvFixturePath);
  }
  auto config = service::config_from_json(j, [&](const std::string& name) -> std::optional<std::string> {
    if (shadowed.contains(name)) return std::nullopt;
    return env(name);
  });

  static service::Server* running = nullptr;
  service::Server server(config);
  int port = server.bind();
  running = &server;
  std::signal(SIGINT, [](int) { if (running) running->stop(); });
  std::signal(SIGTERM, [](int) { if (running) running->stop(); });
  if (!ctx.quiet) {
    *ctx.out << "listening on " << config.host << ":" << port << std::endl;
  }
  server.run();
  running = nullptr;
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  Context ctx;
  ctx.out = &out;
  ctx.err = &err;

  CLI::App app{"Pharmaceutical evidence pipeline: documents, evidence packs, ontology, context graphs", "plp"};
  app.require_subcommand(1);
  app.add_option("--data-dir", ctx.data_dir, "Workspace directory (default $PLP_DATA_DIR or ./plp-data)");
  app.add_option("--output", ctx.output, "human or structured")
      ->check(CLI::IsMember({"human", "structured"}));
  app.add_flag("-q,--quiet", ctx.quiet, "Suppress human output");

  std::function<void()> action;
  auto workspace = [&]() {
    if (ctx.data_dir.empty()) {
      const char* env = std::getenv(service::kEnvDataDir);
      ctx.data_dir = env ? env : "plp-data";
    }
    return std::make_unique<service::Workspace>(ctx.data_dir);
  };

  // ingest
  std::string manifest;
  auto* ingest = app.add_subcommand("ingest", "Import documents listed in a manifest");
  ingest->add_option("manifest", manifest)->required();
  ingest->callback([&] {
    action = [&] {
      auto ws = workspace();
      json arr = json::array();
      std::string human;
      for (const auto& d : ws->documents().import_manifest(manifest)) {
        arr.push_back(patos::to_json(d));
        human += d.doc_id + "  " + d.version_label + "\n";
      }
      ctx.emit(arr.dump(), human + std::to_string(arr.size()) + " documents ingested\n");
    };
  });

  // verify
  std::string verify_id;
  bool verify_all = false;
  auto* verify = app.add_subcommand("verify", "Recompute document checksums");
  verify->add_option("doc_id", verify_id);
  verify->add_flag("--all", verify_all);
  verify->callback([&] {
    action = [&] {
      if (verify_id.empty() == !verify_all) {
        throw Error(ErrorCode::InvalidArgument, "give a document id or --all");
      }
      auto ws = workspace();
      std::vector<std::string> ids;
      if (verify_all) {
        for (const auto& d : ws->documents().all_documents()) ids.push_back(d.doc_id);
      } else {
        ids.push_back(verify_id);
      }
      json arr = json::array();
      std::string human;
      std::size_t bad = 0;
      for (const auto& id : ids) {
        auto r = ws->documents().verify_integrity(id);
        if (!r.ok) ++bad;
        arr.push_back(patos::to_json(r));
        human += r.status() + "  " + id + "\n";
      }
      ctx.emit(verify_all ? arr.dump() : arr[0].dump(),
               human + std::to_string(ids.size() - bad) + " ok, " + std::to_string(bad) + " corrupted\n");
      if (bad) ctx.status = kNegative;
    };
  });

  // index
  std::string index_id, reader = "stub";
  auto* index = app.add_subcommand("index", "Build the reader tree of a cleaned document");
  index->add_option("doc_id", index_id)->required();
  index->add_option("--reader", reader);
  index->callback([&] {
    action = [&] {
      auto ws = workspace();
      ctx.emit(ops::index(*ws, index_id, reader));
    };
  });

  // pack
  auto* pack = app.add_subcommand("pack", "Evidence pack lifecycle");
  pack->require_subcommand(1);
  std::string pack_file, pack_id, requested_id, verdict, curator, justification, state;

  auto* pnew = pack->add_subcommand("new", "Create a draft pack from a JSON file");
  pnew->add_option("file", pack_file)->required();
  pnew->add_option("--id", requested_id, "Requested pack id");
  pnew->callback([&] {
    action = [&] {
      auto ws = workspace();
      auto input = read_json_file(pack_file);
      if (!requested_id.empty()) input["pack_id"] = requested_id;
      auto text = ops::create_pack(*ws, input);
      ctx.emit(text, "created " + json::parse(text)["pack_id"].get<std::string>() + "\n");
    };
  });

  auto* pvalidate = pack->add_subcommand("validate", "Check the six well-formedness conditions");
  pvalidate->add_option("pack", pack_id, "Pack id or path to a pack JSON file")->required();
  pvalidate->callback([&] {
    action = [&] {
      auto ws = workspace();
      json report;
      if (fs::is_regular_file(pack_id)) {
        report = lector::validate_well_formed(read_json_file(pack_id), &ws->documents()).to_json();
      } else {
        report = json::parse(ops::validate(*ws, pack_id));
      }
      std::string human = report["well_formed"].get<bool>() ? "well-formed\n" : "not well-formed\n";
      for (const auto& f : report["findings"]) {
        human += "  condition " + std::to_string(f["condition"].get<int>()) + ": " +
                 f["message"].get<std::string>() + "\n";
      }
      ctx.emit(report.dump(), human);
      if (!report["well_formed"].get<bool>()) ctx.status = kNegative;
    };
  });

  auto* psubmit = pack->add_subcommand("submit", "Send a draft to review");
  psubmit->add_option("pack_id", pack_id)->required();
  psubmit->callback([&] {
    action = [&] {
      auto ws = workspace();
      ctx.emit(ops::submit(*ws, pack_id), pack_id + " under_review\n");
    };
  });

  auto* pcurate = pack->add_subcommand("curate", "Accept or reject a pack under review");
  pcurate->add_option("pack_id", pack_id)->required();
  pcurate->add_option("--verdict", verdict)->required()->check(CLI::IsMember({"accept", "reject"}));
  pcurate->add_option("--curator", curator);
  pcurate->add_option("--justification", justification);
  pcurate->callback([&] {
    action = [&] {
      auto ws = workspace();
      auto text = ops::curate(*ws, pack_id, verdict, curator, justification);
      auto j = json::parse(text);
      ctx.emit(text, pack_id + " " + j["pack"]["status"]["state"].get<std::string>() + " (" +
                         j["decision"]["decision_id"].get<std::string>() + ")\n");
    };
  });

  auto* pderive = pack->add_subcommand("derive", "Create a new draft derived from an existing pack");
  pderive->add_option("pack_id", pack_id)->required();
  pderive->add_option("file", pack_file)->required();
  pderive->callback([&] {
    action = [&] {
      auto ws = workspace();
      auto text = ops::derive(*ws, pack_id, read_json_file(pack_file));
      ctx.emit(text, "derived " + json::parse(text)["pack_id"].get<std::string>() + " from " + pack_id + "\n");
    };
  });

  auto* pshow = pack->add_subcommand("show", "Print a pack");
  pshow->add_option("pack_id", pack_id)->required();
  pshow->callback([&] {
    action = [&] {
      auto ws = workspace();
      ctx.emit(ops::show_pack(*ws, pack_id));
    };
  });

  auto* plist = pack->add_subcommand("list", "List packs, optionally by state");
  plist->add_option("--state", state);
  plist->callback([&] {
    action = [&] {
      auto ws = workspace();
      auto text = ops::list_packs(*ws, state.empty() ? std::nullopt : std::optional(state));
      std::string human;
      for (const auto& p : json::parse(text)) {
        human += p["pack_id"].get<std::string>() + "  " + p["status"]["state"].get<std::string>() +
                 "  " + p["question"]["assertion_type"].get<std::string>() + "  " +
                 p["question"]["text"].get<std::string>() + "\n";
      }
      ctx.emit(text, human);
    };
  });

  // link
  std::string link_pack, link_entity;
  auto* link = app.add_subcommand("link", "Anchor an accepted pack to an ontology entity");
  link->add_option("pack_id", link_pack)->required();
  link->add_option("entity_id", link_entity)->required();
  link->callback([&] {
    action = [&] {
      auto ws = workspace();
      auto text = ops::link(*ws, link_pack, link_entity);
      ctx.emit(text, json::parse(text)["link_id"].get<std::string>() + "\n");
    };
  });

  // ontology
  auto* onto = app.add_subcommand("ontology", "Load or export ontology records");
  onto->require_subcommand(1);
  std::string onto_file;
  auto* oload = onto->add_subcommand("load", "Load a record file");
  oload->add_option("file", onto_file)->required();
  oload->callback([&] {
    action = [&] {
      auto ws = workspace();
      auto n = ws->ontology().load_file(onto_file, &ws->packs());
      ctx.emit(json{{"records", n}}.dump(), std::to_string(n) + " records loaded\n");
    };
  });
  auto* oexport = onto->add_subcommand("export", "Write every record to a file");
  oexport->add_option("file", onto_file)->required();
  oexport->callback([&] {
    action = [&] {
      auto ws = workspace();
      ws->ontology().export_file(onto_file);
      ctx.emit(json{{"path", onto_file}}.dump(), "exported to " + onto_file + "\n");
    };
  });

  // refract
  std::string entity_id, view;
  auto* refract = app.add_subcommand("refract", "Build and store one context graph");
  refract->add_option("entity_id", entity_id)->required();
  refract->add_option("view", view)->required();
  refract->callback([&] {
    action = [&] {
      auto ws = workspace();
      auto text = ops::refract(*ws, entity_id, view);
      auto g = json::parse(text);
      ctx.emit(text, g["graph_id"].get<std::string>() + "  " + std::to_string(g["nodes"].size()) +
                         " nodes, " + std::to_string(g["edges"].size()) + " edges, digest " +
                         g["content_digest"].get<std::string>() + "\n");
    };
  });

  // refract-all
  bool bench_mode = false;
  std::size_t bench_graphs = 55555;
  unsigned threads = 0;
  std::string bench_dir;
  auto* rall = app.add_subcommand("refract-all", "Materialize every eligible graph");
  rall->add_flag("--bench", bench_mode, "Run on a synthetic ontology, twice, and compare digests");
  rall->add_option("--graphs", bench_graphs, "Synthetic graph count for --bench");
  rall->add_option("--threads", threads, "Worker threads (0: one per hardware thread)");
  rall->add_option("--bench-dir", bench_dir, "Output directory for --bench (default: under /dev/shm when writable, else the temp dir)");
  rall->callback([&] {
    action = [&] {
      if (!bench_mode) {
        auto ws = workspace();
        auto report = ws->refract_all({prisma::kViews.begin(), prisma::kViews.end()}, threads);
        std::ostringstream human;
        human << "graph_count " << report.graph_count << "\nelapsed_seconds " << report.elapsed_seconds
              << "\nfailures " << report.failures.size() << "\n";
        ctx.emit(report.to_json().dump(), human.str());
        if (!report.failures.empty()) ctx.status = kNegative;
        return;
      }
      bool temp = bench_dir.empty();
      fs::path dir = temp ? prisma::default_benchmark_dir() : fs::path(bench_dir);
      auto r = prisma::run_benchmark(bench_graphs, threads, dir);
      if (temp) fs::remove_all(dir);
      std::ostringstream human;
      human << "graph_count " << r.graph_count << "\n"
            << "elapsed_seconds " << r.elapsed_seconds << "\n"
            << "second_run_elapsed_seconds " << r.second_elapsed_seconds << "\n"
            << "generation_seconds " << r.generation_seconds << " (not included in elapsed)\n"
            << "digests_stable " << (r.digests_stable ? "yes" : "no") << "\n"
            << "bench_dir " << r.dir.string() << "\n";
      ctx.emit(r.to_json().dump(), human.str());
      if (!r.digests_stable || r.failures != 0 || r.graph_count != bench_graphs) ctx.status = kNegative;
    };
  });

  // trace
  std::string graph_id, node_id;
  auto* trace = app.add_subcommand("trace", "Follow an assertion back to its source documents");
  trace->add_option("graph_id", graph_id)->required();
  trace->add_option("node_id", node_id)->required();
  trace->callback([&] {
    action = [&] {
      auto ws = workspace();
      auto text = ops::trace(*ws, graph_id, node_id);
      auto t = json::parse(text);
      std::string human = t["pack_id"].get<std::string>() + " (" + t["assertion_type"].get<std::string>() + ")\n";
      for (const auto& e : t["entries"]) {
        human += "  " + e["doc_id"].get<std::string>() + " " + e["version_label"].get<std::string>() +
                 " nodes " + e["node_ids"].dump() + " " + e["status"].get<std::string>() + "\n";
      }
      ctx.emit(text, human);
      if (!t["verified"].get<bool>()) ctx.status = kNegative;
    };
  });

  // metrics
  auto* metrics = app.add_subcommand("metrics", "Corpus evaluation metrics");
  metrics->callback([&] {
    action = [&] {
      auto ws = workspace();
      auto text = ops::metrics(*ws);
      ctx.emit(text, metrics_text(json::parse(text)));
    };
  });

  // fixture
  auto* fixture = app.add_subcommand("fixture", "Built-in fixtures");
  fixture->require_subcommand(1);
  auto* dipyrone = fixture->add_subcommand("load-dipyrone", "Load the dipyrone worked example");
  dipyrone->callback([&] {
    action = [&] {
      workspace();  // resolves the data dir
      auto m = service::load_dipyrone_fixture(ctx.data_dir);
      ctx.emit(m.dump(), metrics_text(m));
    };
  });

  // serve
  std::string config_file, listen, fixture_path;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--config", config_file, "JSON config {data_dir, listen_addr, fixture_path}");
  serve->add_option("--listen", listen, "host:port");
  serve->add_option("--fixture", fixture_path, "\"dipyrone\" or an ontology record file");
  serve->callback([&] { action = [&] { run_serve(ctx, config_file, listen, fixture_path); }; });

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  if (!args.empty()) args.pop_back();  // program name
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (action) action();
  } catch (const Error& e) {
    err << "error: " << e.code_name() << ": " << e.what() << "\n";
    if (ctx.structured()) err << e.envelope().dump() << "\n";
    return kFailed;
  } catch (const std::exception& e) {
    err << "error: io_failure: " << e.what() << "\n";
    return kFailed;
  }
  return ctx.status;
}

}  // namespace plp::cli
