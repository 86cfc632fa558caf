#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace translab {

enum class ErrorCode {
  // geometry
  NonSimpleCurve,
  InnerNotContained,
  SupportTouchesInterface,
  NonPositiveSpeeds,
  PointOutsideDomain,
  DegenerateTangent,
  InvalidDescriptor,
  // kernel
  EmptyKernel,
  NegativeAmplitude,
  NonpositiveRelaxationTime,
  NonuniformTimeGrid,
  NotAContraction,
  // rays
  LeftDomain,
  StiffnessFailure,
  NonCharacteristicInput,
  ZeroTau,
  // gcc
  IterationBudgetExhausted,
  EmptyComplement,
  // solver
  InterfaceMismatch,
  CflViolation,
  NanDetected,
  // observability
  NonpositiveEnergy,
  EigensolverFailure,
  // cli
  ConfigParseError,
  MissingArtifact,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace translab
