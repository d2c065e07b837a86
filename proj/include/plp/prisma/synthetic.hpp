#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "plp/prisma/ontology.hpp"
#include "plp/prisma/refraction.hpp"

namespace plp::prisma {

// Shape of one synthetic substance family. Every SUBSTANCE, VMP, VMPP and
// AMPP roots exactly one view, so the family yields
// 1 + vmps * (1 + vmpps * (1 + ampps)) graphs.
struct SyntheticShape {
  std::size_t vmps_per_vtm = 2;
  std::size_t vmpps_per_vmp = 26;
  std::size_t ampps_per_vmpp = 25;
};

// Ontology records that refract into exactly `graph_target` graphs across the
// four views. Families are filled greedily, so the last one may be partial.
// Ids live in the 9xxxxxxxx range and never collide with curated data.
std::vector<nlohmann::json> synthetic_records(std::size_t graph_target,
                                              const SyntheticShape& shape = {});

// Loads synthetic_records into `onto` and returns the number of records.
std::size_t load_synthetic(Ontology& onto, std::size_t graph_target,
                           const SyntheticShape& shape = {});

struct BenchmarkResult {
  std::size_t graph_count = 0;
  std::size_t failures = 0;
  double generation_seconds = 0;  // synthetic ontology build, not in elapsed
  double elapsed_seconds = 0;     // first materialization run
  double second_elapsed_seconds = 0;
  double total_seconds = 0;
  bool digests_stable = false;
  std::filesystem::path dir;
  nlohmann::json to_json() const;
};

// Generates `graph_target` graphs worth of synthetic ontology, materializes
// every view twice into <dir>/run1 and <dir>/run2 and compares manifests.
// Only materialization is timed.
BenchmarkResult run_benchmark(std::size_t graph_target, unsigned threads,
                              const std::filesystem::path& dir);

// A fresh scratch directory for run_benchmark: under /dev/shm when it is a
// writable directory, otherwise under the system temp directory.
std::filesystem::path default_benchmark_dir();

}  // namespace plp::prisma
