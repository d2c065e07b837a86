#include "plp/lector/well_formed.hpp"

#include "plp/lector/evidence_pack.hpp"
#include "plp/patos/document_store.hpp"

namespace plp::lector {

using nlohmann::json;

namespace {

bool non_empty_string(const json& j, const char* key) {
  return j.is_object() && j.contains(key) && j.at(key).is_string() &&
         j.at(key).get_ref<const std::string&>().find_first_not_of(" \t\r\n") !=
             std::string::npos;
}

bool string_array(const json& j) {
  if (!j.is_array()) return false;
  for (const auto& e : j) {
    if (!e.is_string()) return false;
  }
  return true;
}

class Checker {
 public:
  Checker(const json& pack, const patos::DocumentStore* store, bool check_integrity)
      : pack_(pack), store_(store), check_integrity_(check_integrity) {}

  ValidationReport run() {
    if (!pack_.is_object()) {
      report_.malformed.push_back("pack is not an object");
      return std::move(report_);
    }
    check_question();
    check_response();
    check_provenance();
    check_limits();
    check_status();
    return std::move(report_);
  }

 private:
  void violate(int condition, std::string message) {
    report_.violations.insert(condition);
    report_.findings.push_back({condition, std::move(message)});
  }

  void check_question() {
    const json* q = pack_.contains("question") ? &pack_.at("question") : nullptr;
    if (!q || !q->is_object()) {
      report_.malformed.push_back("question missing");
      violate(1, "question type missing");
      return;
    }
    if (!non_empty_string(*q, "text")) report_.malformed.push_back("question text empty");
    if (!q->contains("assertion_type") || !q->at("assertion_type").is_string()) {
      violate(1, "assertion type missing");
    } else if (!assertion_type_from_string(q->at("assertion_type").get<std::string>())) {
      violate(1, "assertion type '" + q->at("assertion_type").get<std::string>() +
                     "' is outside the taxonomy");
    }
  }

  void check_response() {
    const json* r = pack_.contains("response") ? &pack_.at("response") : nullptr;
    if (!r || !r->is_object()) {
      report_.malformed.push_back("response missing");
      return;
    }
    if (!non_empty_string(*r, "assertion")) report_.malformed.push_back("assertion empty");
    for (const char* key : {"validity_conditions", "invalidity_conditions"}) {
      if (!r->contains(key) || !string_array(r->at(key))) {
        report_.malformed.push_back(std::string(key) + " must be a list of strings");
      }
    }
  }

  void check_provenance() {
    if (!pack_.contains("provenance") || !pack_.at("provenance").is_array()) {
      violate(2, "provenance chain missing");
      return;
    }
    const auto& chain = pack_.at("provenance");
    if (chain.empty()) {
      violate(2, "provenance chain is empty");
      return;
    }
    bool integrity_unverifiable = false;
    for (std::size_t i = 0; i < chain.size(); ++i) {
      const auto& e = chain[i];
      const auto where = "provenance[" + std::to_string(i) + "]";
      if (!non_empty_string(e, "doc_id") || !non_empty_string(e, "version_label") ||
          !non_empty_string(e, "checksum")) {
        report_.malformed.push_back(where + " lacks doc_id, version_label or checksum");
        continue;
      }
      if (!e.contains("node_ids") || !string_array(e.at("node_ids")) ||
          e.at("node_ids").empty()) {
        violate(4, where + " names no PageIndex node");
      }
      if (!check_integrity_) continue;
      if (!store_) {
        integrity_unverifiable = true;
        continue;
      }
      const auto doc_id = e.at("doc_id").get<std::string>();
      auto ref = store_->find(doc_id);
      if (!ref) {
        violate(3, where + " cites unknown document " + doc_id);
      } else if (ref->version_label != e.at("version_label").get<std::string>()) {
        violate(3, where + " version does not match " + doc_id);
      } else if (ref->checksum != e.at("checksum").get<std::string>()) {
        violate(3, where + " hash does not match " + doc_id);
      }
    }
    if (integrity_unverifiable) report_.unverifiable.insert(3);
  }

  void check_limits() {
    if (!pack_.contains("limits") || !pack_.at("limits").is_object()) {
      violate(5, "epistemic limits not specified");
      return;
    }
    const auto& l = pack_.at("limits");
    for (const char* key : {"divergences", "gaps", "dependencies", "silences"}) {
      if (!l.contains(key) || !string_array(l.at(key))) {
        violate(5, std::string("epistemic limits lack an explicit '") + key + "' list");
      }
    }
  }

  void check_status() {
    const json* s = pack_.contains("status") ? &pack_.at("status") : nullptr;
    if (!s) return;  // construction input: status is assigned by the registry
    if (!s->is_object() || !s->contains("state") || !s->at("state").is_string()) {
      report_.malformed.push_back("status.state missing");
      return;
    }
    auto state = pack_state_from_string(s->at("state").get<std::string>());
    if (!state) {
      report_.malformed.push_back("unknown curatorial state");
      return;
    }
    if (!is_terminal(*state)) return;
    if (!non_empty_string(*s, "curator")) violate(6, "terminal pack without curator");
    if (!non_empty_string(*s, "justification")) {
      violate(6, "terminal pack without justification");
    }
  }

  const json& pack_;
  const patos::DocumentStore* store_;
  bool check_integrity_;
  ValidationReport report_;
};

}  // namespace

json ValidationReport::to_json() const {
  json f = json::array();
  for (const auto& x : findings) f.push_back({{"condition", x.condition}, {"message", x.message}});
  return json{{"violations", violations},
              {"unverifiable", unverifiable},
              {"malformed", malformed},
              {"findings", f},
              {"well_formed", well_formed()}};
}

ValidationReport validate_well_formed(const json& pack, const patos::DocumentStore* store) {
  return Checker(pack, store, true).run();
}

ValidationReport validate_structure(const json& pack) {
  return Checker(pack, nullptr, false).run();
}

}  // namespace plp::lector
