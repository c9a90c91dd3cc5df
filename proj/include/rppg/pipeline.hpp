#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rppg/combine.hpp"
#include "rppg/diffuse.hpp"
#include "rppg/heartrate.hpp"
#include "rppg/roi.hpp"
#include "rppg/types.hpp"

namespace rppg {

enum class Method { Aggregate, Snr, Proposed };

std::string_view to_string(Method m);
Method parse_method(std::string_view s);
std::string_view to_string(DiffuseEstimator e);
DiffuseEstimator parse_estimator(std::string_view s);

struct RunConfig {
  Method method = Method::Proposed;
  double window_s = 10.0;
  double hop_s = 5.0;
  HeartRateOptions hr{};
  int grid_rows = kDefaultGridRows;
  int grid_cols = kDefaultGridCols;
  DiffuseOptions diffuse{};
  bool smooth_bbox = false;
  double bbox_alpha = kDefaultBboxSmoothing;
  std::optional<std::filesystem::path> debug_dir;

  void validate() const;
};

/// Everything the combination step produced for one analysis window.
struct WindowSignals {
  PulseWaveform waveform;            // CHROM output of the chosen method
  std::vector<double> snr_weights;   // empty for facial aggregation
  std::vector<double> diffuse_weights;  // proposed only
  std::vector<double> final_weights;    // weights actually applied to cells
  std::vector<std::uint8_t> dead;
  int grid_rows = 0;
  int grid_cols = 0;
};

/// Runs one method on one window. `frames` and `masks` cover exactly the
/// window; the grid is laid over `bbox`. `diffuse` may carry per-frame cell
/// luminance computed earlier for the same grid (proposed method only);
/// when empty it is computed here.
WindowSignals process_window(std::span<const Image> frames, std::span<const Bitmap> masks, const Rect& bbox,
                             double fps, const RunConfig& cfg, std::span<const CellLuminance> diffuse = {});

struct WindowReport {
  std::size_t index = 0;
  double start_s = 0.0;
  std::size_t first_frame = 0;
  std::size_t frame_count = 0;
  double bpm = 0.0;
  WindowSignals signals;
};

struct HrReport {
  RunConfig config;
  double fps = 0.0;
  std::size_t total_frames = 0;
  std::vector<WindowReport> windows;
  double video_bpm = 0.0;
};

inline constexpr int kReportSchemaVersion = 1;

/// Mask -> combination -> CHROM -> per-window heart rate -> video heart rate.
HrReport run_pipeline(const FrameSequence& seq, const LandmarkSidecar& lms, const RunConfig& cfg);

std::string report_json(const HrReport& report);

struct ReportSummary {
  std::string method;
  double video_bpm = 0.0;
};

/// Reads back the method and video heart rate from a report file.
ReportSummary read_report(const std::filesystem::path& file);

}  // namespace rppg
