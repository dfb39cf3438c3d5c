#include "nke/error.hpp"

namespace nke {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnknownActivation: return "UnknownActivation";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::DegreeTooLarge: return "DegreeTooLarge";
    case ErrorCode::DegreeOverflow: return "DegreeOverflow";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::ZeroNormInput: return "ZeroNormInput";
    case ErrorCode::NonFiniteActivation: return "NonFiniteActivation";
    case ErrorCode::NonFiniteKernel: return "NonFiniteKernel";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NotHomogeneous: return "NotHomogeneous";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::NoScalarForm: return "NoScalarForm";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

}  // namespace nke
