#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rppg/types.hpp"

namespace rppg::io {

namespace fs = std::filesystem;

inline constexpr std::string_view kRawMagic = "RPPGRAW1";
inline constexpr std::size_t kRawHeaderBytes = 24;

/// Loads either a frame directory (manifest.json + frame_NNNNNN.ppm) or a
/// raw stream file, depending on what `locator` points at.
FrameSequence load_frame_sequence(const fs::path& locator);

void write_frame_directory(const FrameSequence& seq, const fs::path& dir);
void write_raw_stream(const FrameSequence& seq, const fs::path& file);

Image read_ppm(const fs::path& file);
void write_ppm(const Image& img, const fs::path& file);
std::string frame_file_name(std::size_t index);

/// Parses a JSON-lines sidecar and validates it against the frame geometry.
LandmarkSidecar load_landmarks(const fs::path& file, int width, int height, std::size_t frame_count);
void validate_landmarks(const LandmarkSidecar& lms, int width, int height, std::size_t frame_count);
void write_landmarks(const LandmarkSidecar& lms, const fs::path& file);

/// Two-column CSV with header "time_s,value"; timestamps strictly increasing.
TimeSeries load_signal_csv(const fs::path& file);
void write_signal_csv(const TimeSeries& series, const fs::path& file);

/// Heart-rate numerics are required; the PPG waveform is optional.
GroundTruth load_ground_truth(const fs::path& hr_file, const std::optional<fs::path>& ppg_file = std::nullopt);

/// Linear interpolation of `series` at the given abscissae; outside the
/// sampled span the nearest end value is held.
std::vector<double> interpolate_linear(const TimeSeries& series, std::span<const double> at);

/// Linear interpolation onto t0 + k/fs, k = 0..n-1. Outside the sampled span
/// the nearest end value is held.
std::vector<double> resample_linear(const TimeSeries& series, double fs, double t0, std::size_t n);

/// Writes via a sibling temp file and rename so readers never see partial output.
void write_file_atomic(const fs::path& file, std::string_view content);
std::string read_file(const fs::path& file);

}  // namespace rppg::io
