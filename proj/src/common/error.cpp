#include "plp/common/error.hpp"

namespace plp {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyDocument: return "empty_document";
    case ErrorCode::DuplicateVersionConflict: return "duplicate_version_conflict";
    case ErrorCode::UnknownDocument: return "unknown_document";
    case ErrorCode::SkippedStage: return "skipped_stage";
    case ErrorCode::BackwardPromotion: return "backward_promotion";
    case ErrorCode::DocumentNotCleaned: return "document_not_cleaned";
    case ErrorCode::ReaderFailure: return "reader_failure";
    case ErrorCode::StructuralViolation: return "structural_violation";
    case ErrorCode::IllegalTransition: return "illegal_transition";
    case ErrorCode::MissingCurator: return "missing_curator";
    case ErrorCode::MissingJustification: return "missing_justification";
    case ErrorCode::UnknownPack: return "unknown_pack";
    case ErrorCode::MissingSilenceEntry: return "missing_silence_entry";
    case ErrorCode::LevelMismatch: return "level_mismatch";
    case ErrorCode::UnknownParent: return "unknown_parent";
    case ErrorCode::IllegalParentLevel: return "illegal_parent_level";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::AmbiguousIdentifier: return "ambiguous_identifier";
    case ErrorCode::UnknownEntity: return "unknown_entity";
    case ErrorCode::PackNotAccepted: return "pack_not_accepted";
    case ErrorCode::DuplicateLink: return "duplicate_link";
    case ErrorCode::LevelViewMismatch: return "level_view_mismatch";
    case ErrorCode::UnknownGraph: return "unknown_graph";
    case ErrorCode::NotAnAssertionNode: return "not_an_assertion_node";
    case ErrorCode::ConfigInvalid: return "config_invalid";
    case ErrorCode::AddressInUse: return "address_in_use";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::IoFailure: return "io_failure";
  }
  return "unknown_error";
}

int error_http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownDocument:
    case ErrorCode::UnknownPack:
    case ErrorCode::NotFound:
    case ErrorCode::UnknownEntity:
    case ErrorCode::UnknownGraph:
      return 404;
    case ErrorCode::DuplicateVersionConflict:
    case ErrorCode::IllegalTransition:
    case ErrorCode::DuplicateLink:
    case ErrorCode::PackNotAccepted:
    case ErrorCode::AmbiguousIdentifier:
      return 409;
    case ErrorCode::IoFailure:
    case ErrorCode::ReaderFailure:
    case ErrorCode::AddressInUse:
    case ErrorCode::ConfigInvalid:
      return 500;
    default:
      return 422;
  }
}

nlohmann::json Error::envelope() const {
  return nlohmann::json{{"code", std::string(code_name())},
                        {"message", what()},
                        {"detail", detail_}};
}

}  // namespace plp
