#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace erimap {

enum class ErrorCode : std::uint8_t {
  // network construction
  CycleDetected,
  DanglingEdge,
  MalformedTable,
  InvalidSpec,
  // inference
  UnknownNode,
  InvalidState,
  InvalidLikelihood,
  ZeroProbabilityEvidence,
  StateSpaceTooLarge,
  // evidence
  UnknownState,
  DegenerateNode,
  ZeroPriorState,
  UnknownTier,
  AmbiguousPayloadFromLowTier,
  InvalidReliability,
  // spatial
  DuplicateAreaId,
  MissingAttribute,
  UnmappedAttributeValue,
  InvalidGeometry,
  // hazard
  NonPositiveDose,
  InvalidExposure,
  // pipeline
  UnknownArea,
  EngineHalted,
  HardEvidenceConflict,
  InvalidObservation,
  // bundle / io
  ParseError,
  CrossValidationError,
  IoError,
  InvalidRequest,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::DanglingEdge: return "DanglingEdge";
    case ErrorCode::MalformedTable: return "MalformedTable";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::InvalidLikelihood: return "InvalidLikelihood";
    case ErrorCode::ZeroProbabilityEvidence: return "ZeroProbabilityEvidence";
    case ErrorCode::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorCode::UnknownState: return "UnknownState";
    case ErrorCode::DegenerateNode: return "DegenerateNode";
    case ErrorCode::ZeroPriorState: return "ZeroPriorState";
    case ErrorCode::UnknownTier: return "UnknownTier";
    case ErrorCode::AmbiguousPayloadFromLowTier: return "AmbiguousPayloadFromLowTier";
    case ErrorCode::InvalidReliability: return "InvalidReliability";
    case ErrorCode::DuplicateAreaId: return "DuplicateAreaId";
    case ErrorCode::MissingAttribute: return "MissingAttribute";
    case ErrorCode::UnmappedAttributeValue: return "UnmappedAttributeValue";
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::NonPositiveDose: return "NonPositiveDose";
    case ErrorCode::InvalidExposure: return "InvalidExposure";
    case ErrorCode::UnknownArea: return "UnknownArea";
    case ErrorCode::EngineHalted: return "EngineHalted";
    case ErrorCode::HardEvidenceConflict: return "HardEvidenceConflict";
    case ErrorCode::InvalidObservation: return "InvalidObservation";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::CrossValidationError: return "CrossValidationError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidRequest: return "InvalidRequest";
  }
  return "Unknown";
}

/// Every failure raised by the library. The code is stable and
/// machine-readable; the message names the offending entity.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace erimap
