#include "translab/error.hpp"

namespace translab {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonSimpleCurve: return "NonSimpleCurve";
    case ErrorCode::InnerNotContained: return "InnerNotContained";
    case ErrorCode::SupportTouchesInterface: return "SupportTouchesInterface";
    case ErrorCode::NonPositiveSpeeds: return "NonPositiveSpeeds";
    case ErrorCode::PointOutsideDomain: return "PointOutsideDomain";
    case ErrorCode::DegenerateTangent: return "DegenerateTangent";
    case ErrorCode::InvalidDescriptor: return "InvalidDescriptor";
    case ErrorCode::EmptyKernel: return "EmptyKernel";
    case ErrorCode::NegativeAmplitude: return "NegativeAmplitude";
    case ErrorCode::NonpositiveRelaxationTime: return "NonpositiveRelaxationTime";
    case ErrorCode::NonuniformTimeGrid: return "NonuniformTimeGrid";
    case ErrorCode::NotAContraction: return "NotAContraction";
    case ErrorCode::LeftDomain: return "LeftDomain";
    case ErrorCode::StiffnessFailure: return "StiffnessFailure";
    case ErrorCode::NonCharacteristicInput: return "NonCharacteristicInput";
    case ErrorCode::ZeroTau: return "ZeroTau";
    case ErrorCode::IterationBudgetExhausted: return "IterationBudgetExhausted";
    case ErrorCode::EmptyComplement: return "EmptyComplement";
    case ErrorCode::InterfaceMismatch: return "InterfaceMismatch";
    case ErrorCode::CflViolation: return "CflViolation";
    case ErrorCode::NanDetected: return "NanDetected";
    case ErrorCode::NonpositiveEnergy: return "NonpositiveEnergy";
    case ErrorCode::EigensolverFailure: return "EigensolverFailure";
    case ErrorCode::ConfigParseError: return "ConfigParseError";
    case ErrorCode::MissingArtifact: return "MissingArtifact";
  }
  return "Unknown";
}

}  // namespace translab
