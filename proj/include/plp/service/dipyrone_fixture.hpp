#pragma once

#include <filesystem>

#include <json.hpp>

namespace plp::service {

// Populates an empty data directory with the dipyrone worked example:
// 192 documents from four sources, 31 reader trees, 38 evidence packs
// (37 accepted, 1 rejected) over seven assertion types, the SUBSTANCE to
// AMPP ontology around VMP-000051605, 119 canonical links and the four
// context graphs of the dipyrone chain.
//
// Every timestamp comes from a stepping clock starting at
// 2026-01-28T00:00:00Z, so two loads produce identical bytes.
// InvalidArgument when the directory already holds data.
nlohmann::json load_dipyrone_fixture(const std::filesystem::path& data_dir);

// The chain the fixture materializes, root of each view in view order.
inline constexpr const char* kDipyroneSubstance = "SUB-000033943";
inline constexpr const char* kDipyroneVtm = "VTM-000010750";
inline constexpr const char* kDipyroneVmp = "VMP-000051605";
inline constexpr const char* kDipyroneVmpp = "VMPP-000103766";
inline constexpr const char* kDipyroneAmp = "AMP-000200001";
inline constexpr const char* kDipyroneAmpp = "AMPP-000300001";

}  // namespace plp::service
