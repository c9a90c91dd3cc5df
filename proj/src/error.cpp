#include "rppg/error.hpp"

namespace rppg {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingManifest: return "MissingManifest";
    case ErrorCode::MissingInput: return "MissingInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonPositiveFps: return "NonPositiveFps";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::MalformedPolygon: return "MalformedPolygon";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::NonMonotoneTime: return "NonMonotoneTime";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::GridTooFine: return "GridTooFine";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::AllCellsDead: return "AllCellsDead";
    case ErrorCode::DegenerateWeights: return "DegenerateWeights";
    case ErrorCode::ZeroChannelMean: return "ZeroChannelMean";
    case ErrorCode::TraceTooShort: return "TraceTooShort";
    case ErrorCode::SampleRateTooLow: return "SampleRateTooLow";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::NoPeaks: return "NoPeaks";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::NoWindows: return "NoWindows";
    case ErrorCode::WavelengthOutOfRange: return "WavelengthOutOfRange";
    case ErrorCode::DegenerateReflectance: return "DegenerateReflectance";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::InvalidScene: return "InvalidScene";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ManifestRowInvalid: return "ManifestRowInvalid";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::WriteFailed: return "WriteFailed";
  }
  return "Unknown";
}

ErrorFamily family_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return ErrorFamily::Usage;
    case ErrorCode::MissingManifest:
    case ErrorCode::MissingInput:
      return ErrorFamily::MissingInput;
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NonPositiveFps:
    case ErrorCode::MalformedFile:
    case ErrorCode::CountMismatch:
    case ErrorCode::MalformedPolygon:
    case ErrorCode::OutOfBounds:
    case ErrorCode::NonMonotoneTime:
    case ErrorCode::EmptyFile:
    case ErrorCode::InvalidScene:
    case ErrorCode::ManifestRowInvalid:
    case ErrorCode::LengthMismatch:
      return ErrorFamily::InvalidInput;
    case ErrorCode::WriteFailed:
      return ErrorFamily::Output;
    default:
      return ErrorFamily::Processing;
  }
}

}  // namespace rppg
