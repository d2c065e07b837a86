#pragma once

// Random Evidence Pack documents for property tests, plus single-condition
// mutations. Every generated pack is well-formed against the store it was
// built from; each mutation family breaks exactly one condition.

#include <array>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "plp/lector/evidence_pack.hpp"
#include "plp/patos/document_store.hpp"

namespace plp::testing {

class PackGenerator {
 public:
  PackGenerator(std::vector<patos::DocumentRef> docs, std::uint64_t seed)
      : docs_(std::move(docs)), rng_(seed) {}

  nlohmann::json pack(int n) {
    using nlohmann::json;
    auto type = lector::kAssertionTypes[pick(lector::kAssertionTypes.size())];
    json provenance = json::array();
    for (std::size_t i = 0, k = 1 + pick(3); i < k; ++i) {
      const auto& d = docs_[pick(docs_.size())];
      json nodes = json::array();
      for (std::size_t j = 0, m = 1 + pick(3); j < m; ++j) {
        nodes.push_back(std::to_string(1 + pick(4)) + "." + std::to_string(1 + pick(6)));
      }
      provenance.push_back(
          {{"doc_id", d.doc_id}, {"version_label", d.version_label}, {"checksum", d.checksum},
           {"node_ids", nodes}});
    }
    json status;
    switch (pick(4)) {
      case 0: status = {{"state", "draft"}, {"curator", nullptr}, {"justification", nullptr},
                        {"decided_at", nullptr}}; break;
      case 1: status = {{"state", "under_review"}, {"curator", nullptr},
                        {"justification", nullptr}, {"decided_at", nullptr}}; break;
      case 2: status = {{"state", "accepted"}, {"curator", "curator-" + std::to_string(pick(9))},
                        {"justification", "checked against cited nodes"},
                        {"decided_at", "2026-01-28T00:00:00Z"}}; break;
      default: status = {{"state", "rejected"}, {"curator", "curator-" + std::to_string(pick(9))},
                         {"justification", "cites superseded wording"},
                         {"decided_at", "2026-01-28T00:00:00Z"}}; break;
    }
    return {{"pack_id", "EP-" + std::to_string(1000 + n)},
            {"question", {{"text", "question " + std::to_string(n)},
                          {"assertion_type", lector::to_string(type)}}},
            {"response", {{"assertion", "assertion " + std::to_string(n)},
                          {"validity_conditions", words()},
                          {"invalidity_conditions", words()}}},
            {"provenance", provenance},
            {"limits", {{"divergences", words()}, {"gaps", words()},
                        {"dependencies", words()}, {"silences", words()}}},
            {"status", status},
            {"focus", "dipyrone"},
            {"derived_from", nullptr}};
  }

  // Break condition k (1..6) and nothing else.
  nlohmann::json mutate(nlohmann::json p, int k) {
    switch (k) {
      case 1: {
        static const std::array<const char*, 4> bogus{"OFF_LABEL", "indication", "", "DOSAGE"};
        p["question"]["assertion_type"] = bogus[pick(bogus.size())];
        break;
      }
      case 2: p["provenance"] = nlohmann::json::array(); break;
      case 3: {
        auto& e = p["provenance"][pick(p["provenance"].size())];
        if (pick(2) == 0) {
          auto h = e["checksum"].get<std::string>();
          auto i = pick(h.size());
          h[i] = h[i] == '0' ? '1' : '0';
          e["checksum"] = h;
        } else {
          e["version_label"] = e["version_label"].get<std::string>() + "-x";
        }
        break;
      }
      case 4: p["provenance"][pick(p["provenance"].size())]["node_ids"] =
                  nlohmann::json::array(); break;
      case 5: {
        static const std::array<const char*, 4> lists{"divergences", "gaps", "dependencies",
                                                      "silences"};
        if (pick(5) == 0) {
          p.erase("limits");
        } else {
          p["limits"].erase(lists[pick(lists.size())]);
        }
        break;
      }
      case 6: {
        auto& s = p["status"];
        s["state"] = pick(2) == 0 ? "accepted" : "rejected";
        if (s["curator"].is_null()) s["curator"] = "curator-1";
        if (s["justification"].is_null()) s["justification"] = "ok";
        switch (pick(3)) {
          case 0: s["curator"] = nullptr; break;
          case 1: s["justification"] = ""; break;
          default: s["justification"] = "   "; break;
        }
        break;
      }
    }
    return p;
  }

  std::size_t pick(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }

 private:
  nlohmann::json words() {
    auto out = nlohmann::json::array();
    for (std::size_t i = 0, n = pick(3); i < n; ++i) out.push_back("w" + std::to_string(pick(50)));
    return out;
  }

  std::vector<patos::DocumentRef> docs_;
  std::mt19937_64 rng_;
};

}  // namespace plp::testing
