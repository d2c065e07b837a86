#pragma once

// Error vocabulary shared by every layer. Each module error maps to exactly
// one stable machine-readable code; the service and CLI print that code.

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace plp {

enum class ErrorCode {
  // patos
  EmptyDocument,
  DuplicateVersionConflict,
  UnknownDocument,
  SkippedStage,
  BackwardPromotion,
  // lector
  DocumentNotCleaned,
  ReaderFailure,
  StructuralViolation,
  IllegalTransition,
  MissingCurator,
  MissingJustification,
  UnknownPack,
  MissingSilenceEntry,
  // prisma ontology
  LevelMismatch,
  UnknownParent,
  IllegalParentLevel,
  NotFound,
  AmbiguousIdentifier,
  UnknownEntity,
  PackNotAccepted,
  DuplicateLink,
  // prisma refraction
  LevelViewMismatch,
  UnknownGraph,
  NotAnAssertionNode,
  // service / plumbing
  ConfigInvalid,
  AddressInUse,
  InvalidArgument,
  IoFailure,
};

std::string_view error_code_name(ErrorCode code);

// HTTP status used by the service for this code.
int error_http_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message,
        nlohmann::json detail = nullptr)
      : std::runtime_error(std::move(message)),
        code_(code),
        detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const { return error_code_name(code_); }
  const nlohmann::json& detail() const noexcept { return detail_; }

  // {code, message, detail}
  nlohmann::json envelope() const;

 private:
  ErrorCode code_;
  nlohmann::json detail_;
};

}  // namespace plp
