#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rppg {

struct Point {
  int x = 0;
  int y = 0;
  bool operator==(const Point&) const = default;
};

/// Axis-aligned integer rectangle, half-open: [x, x+w) × [y, y+h).
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  long long area() const { return static_cast<long long>(w) * h; }
  bool contains(int px, int py) const { return px >= x && px < x + w && py >= y && py < y + h; }
  bool operator==(const Rect&) const = default;
};

using Polygon = std::vector<Point>;

/// Interleaved 8-bit RGB image, row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::uint8_t* at(int x, int y) { return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  const std::uint8_t* at(int x, int y) const {
    return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  bool operator==(const Image&) const = default;
};

struct FrameSequence {
  std::vector<Image> frames;
  double fps = 0.0;

  int width() const { return frames.empty() ? 0 : frames.front().width; }
  int height() const { return frames.empty() ? 0 : frames.front().height; }
  std::size_t frame_count() const { return frames.size(); }
  double duration_s() const { return fps > 0.0 ? static_cast<double>(frames.size()) / fps : 0.0; }
};

struct LandmarkRecord {
  int frame = 0;
  Rect face_bbox;
  std::array<Polygon, 2> eyes;
  Polygon mouth;
};

struct LandmarkSidecar {
  std::vector<LandmarkRecord> per_frame;
};

struct TimedSample {
  double time_s = 0.0;
  double value = 0.0;
};

using TimeSeries = std::vector<TimedSample>;

struct GroundTruth {
  TimeSeries ppg_samples;
  TimeSeries hr_numerics;

  /// Mean of the heart-rate numerics, the per-video reference value.
  double mean_bpm() const;
};

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
};

/// Per-frame mean RGB of one spatial region.
struct RgbTrace {
  std::vector<Rgb> samples;
  double fps = 0.0;

  std::size_t size() const { return samples.size(); }
};

/// Blood-volume-proxy waveform for one analysis window.
struct PulseWaveform {
  std::vector<double> samples;
  double fps = 0.0;

  std::size_t size() const { return samples.size(); }
};

}  // namespace rppg
