#include "tdr/error.hpp"

namespace tdr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NonPositiveResponse: return "NonPositiveResponse";
    case ErrorCode::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::NotUnit: return "NotUnit";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::AllZeroSpectrum: return "AllZeroSpectrum";
    case ErrorCode::IncompatibleCriterion: return "IncompatibleCriterion";
    case ErrorCode::AllParamsFailed: return "AllParamsFailed";
    case ErrorCode::InvalidModelId: return "InvalidModelId";
    case ErrorCode::InvalidMethod: return "InvalidMethod";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonNumeric: return "NonNumeric";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace tdr
