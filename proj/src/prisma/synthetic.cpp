#include "plp/prisma/synthetic.hpp"

#include <chrono>
#include <cstdio>
#include <string>

#include <unistd.h>

namespace plp::prisma {

using nlohmann::json;

namespace {

std::string synthetic_id(const char* prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-9%08zu", prefix, n);
  return buf;
}

json entity_record(const std::string& id, CanonicalLevel level, std::string name,
                   const std::string& parent, json attributes = json::object()) {
  json parents = json::array();
  if (!parent.empty()) parents.push_back(parent);
  return {{"record", "entity"},        {"entity_id", id},   {"level", to_string(level)},
          {"display_name", std::move(name)}, {"parent_ids", parents}, {"attributes", attributes}};
}

}  // namespace

std::vector<json> synthetic_records(std::size_t graph_target, const SyntheticShape& shape) {
  std::vector<json> out;
  out.push_back({{"record", "organization"},
                 {"org_id", "ORG-900000001"},
                 {"name", "Synthetic Manufacturer"},
                 {"role", "manufacturer"}});

  std::size_t remaining = graph_target;
  std::size_t sub = 0, vmp = 0, vmpp = 0, amp = 0;
  while (remaining > 0) {
    auto sub_id = synthetic_id("SUB", ++sub);
    auto vtm_id = synthetic_id("VTM", sub);
    out.push_back(entity_record(sub_id, CanonicalLevel::Substance, "substance " + std::to_string(sub), ""));
    out.push_back({{"record", "identifier"}, {"scheme", "SYN"}, {"value", sub_id}, {"entity_id", sub_id}});
    out.push_back(entity_record(vtm_id, CanonicalLevel::Vtm, "moiety " + std::to_string(sub), sub_id));
    --remaining;

    for (std::size_t v = 0; v < shape.vmps_per_vtm && remaining > 0; ++v) {
      auto vmp_id = synthetic_id("VMP", ++vmp);
      out.push_back(entity_record(
          vmp_id, CanonicalLevel::Vmp, "formulation " + std::to_string(vmp), vtm_id,
          {{"atc", "Z99ZZ" + std::to_string(10 + v)},
           {"ddd", std::to_string(v + 1)},
           {"concentration", std::to_string(100 * (v + 1)) + " mg"},
           {"pharmaceutical_form", "tablet"}}));
      --remaining;

      for (std::size_t p = 0; p < shape.vmpps_per_vmp && remaining > 0; ++p) {
        auto vmpp_id = synthetic_id("VMPP", ++vmpp);
        out.push_back(entity_record(vmpp_id, CanonicalLevel::Vmpp,
                                    "pack " + std::to_string(vmpp), vmp_id,
                                    {{"pack_size", std::to_string(p + 1)},
                                     {"packaging", "blister"},
                                     {"prescribable_unit", "tablet"}}));
        --remaining;

        for (std::size_t a = 0; a < shape.ampps_per_vmpp && remaining > 0; ++a) {
          auto amp_id = synthetic_id("AMP", ++amp);
          auto ampp_id = synthetic_id("AMPP", amp);
          out.push_back(entity_record(amp_id, CanonicalLevel::Amp, "brand " + std::to_string(amp),
                                      vmpp_id,
                                      {{"brand", "BRAND " + std::to_string(amp)},
                                       {"manufacturer_org", "ORG-900000001"}}));
          out.push_back(entity_record(ampp_id, CanonicalLevel::Ampp,
                                      "brand " + std::to_string(amp) + " box", amp_id,
                                      {{"ean", "99" + std::to_string(100000000000ULL + amp)},
                                       {"registration", "SYN " + std::to_string(amp)},
                                       {"label", "OTC"}}));
          --remaining;
        }
      }
    }
  }
  return out;
}

std::size_t load_synthetic(Ontology& onto, std::size_t graph_target, const SyntheticShape& shape) {
  return onto.load_records(synthetic_records(graph_target, shape), nullptr);
}

json BenchmarkResult::to_json() const {
  return {{"graph_count", graph_count},
          {"failures", failures},
          {"generation_seconds", generation_seconds},
          {"elapsed_seconds", elapsed_seconds},
          {"second_run_elapsed_seconds", second_elapsed_seconds},
          {"total_seconds", total_seconds},
          {"digests_stable", digests_stable},
          {"bench_dir", dir.string()}};
}

BenchmarkResult run_benchmark(std::size_t graph_target, unsigned threads,
                              const std::filesystem::path& dir) {
  using clock = std::chrono::steady_clock;
  auto seconds = [](clock::time_point from) {
    return std::chrono::duration<double>(clock::now() - from).count();
  };
  const auto start = clock::now();
  BenchmarkResult r;
  r.dir = dir;

  Ontology onto;
  load_synthetic(onto, graph_target);
  RefractionCorpus corpus(onto.snapshot());
  r.generation_seconds = seconds(start);

  std::vector<ViewKind> views(kViews.begin(), kViews.end());
  std::filesystem::remove_all(dir / "run1");
  std::filesystem::remove_all(dir / "run2");
  GraphStore first(dir / "run1");
  auto a = refract_all(corpus, views, first, threads);
  GraphStore second(dir / "run2");
  auto b = refract_all(corpus, views, second, threads);

  r.graph_count = a.graph_count;
  r.elapsed_seconds = a.elapsed_seconds;
  r.second_elapsed_seconds = b.elapsed_seconds;
  r.failures = a.failures.size() + b.failures.size();
  auto ma = first.manifest(), mb = second.manifest();
  r.digests_stable = a.graph_count == b.graph_count && ma.size() == mb.size();
  for (std::size_t i = 0; r.digests_stable && i < ma.size(); ++i) {
    r.digests_stable = ma[i].graph_id == mb[i].graph_id && ma[i].digest == mb[i].digest;
  }
  r.total_seconds = seconds(start);
  return r;
}

std::filesystem::path default_benchmark_dir() {
  std::error_code ec;
  std::filesystem::path base = "/dev/shm";
  if (!std::filesystem::is_directory(base, ec) || ::access(base.c_str(), W_OK) != 0) {
    base = std::filesystem::temp_directory_path();
  }
  return base / ("plp-bench-" + std::to_string(::getpid()));
}

}  // namespace plp::prisma
