#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rppg {

/// Every failure the library can report. Codes are grouped into families
/// (see ErrorFamily) which map to process exit codes in the CLI.
enum class ErrorCode {
  // ingest
  MissingManifest,
  MissingInput,
  DimensionMismatch,
  NonPositiveFps,
  MalformedFile,
  CountMismatch,
  MalformedPolygon,
  OutOfBounds,
  NonMonotoneTime,
  EmptyFile,
  // geometry / combination
  GridTooFine,
  EmptyRegion,
  AllCellsDead,
  DegenerateWeights,
  // signal processing
  ZeroChannelMean,
  TraceTooShort,
  SampleRateTooLow,
  TooShort,
  NoPeaks,
  DegenerateSpectrum,
  NoWindows,
  // biophysics
  WavelengthOutOfRange,
  DegenerateReflectance,
  ZeroDenominator,
  // synthesis / evaluation / cli
  InvalidScene,
  LengthMismatch,
  ManifestRowInvalid,
  InvalidArgument,
  WriteFailed,
};

enum class ErrorFamily {
  Usage,
  MissingInput,
  InvalidInput,
  Processing,
  Output,
};

std::string_view to_string(ErrorCode code) noexcept;
ErrorFamily family_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorFamily family() const noexcept { return family_of(code_); }

 private:
  ErrorCode code_;
};

}  // namespace rppg
