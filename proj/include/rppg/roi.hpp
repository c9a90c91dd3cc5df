#pragma once

#include <cstdint>
#include <vector>

#include "rppg/types.hpp"

namespace rppg {

/// One boolean per pixel, row-major.
struct Bitmap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  Bitmap() = default;
  Bitmap(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

  bool get(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  long long count() const;
};

/// Skin pixels per frame: face bbox minus eye and mouth polygons.
struct SkinMask {
  std::vector<Bitmap> frames;
};

/// Row-major tiling of a face bbox. Edge cells absorb the remainder when the
/// bbox does not divide evenly.
struct GridSpec {
  Rect bbox;
  int rows = 0;
  int cols = 0;
  std::vector<Rect> cells;

  std::size_t cell_count() const { return cells.size(); }
};

inline constexpr int kDefaultGridRows = 8;
inline constexpr int kDefaultGridCols = 8;
inline constexpr double kDefaultBboxSmoothing = 0.9;

/// Even-odd point-in-polygon test; polygons with < 3 vertices contain nothing.
bool polygon_contains(const Polygon& poly, double px, double py);

/// Rasterizes one frame's skin region at pixel centers.
Bitmap rasterize_skin(const LandmarkRecord& rec, int width, int height);

SkinMask build_mask(const FrameSequence& seq, const LandmarkSidecar& lms);

GridSpec build_grid(const Rect& bbox, int rows, int cols);

/// Exponential smoothing of the face bbox across frames:
/// b_k = alpha * b_{k-1} + (1 - alpha) * raw_k, rounded to integers.
LandmarkSidecar smooth_bboxes(const LandmarkSidecar& lms, double alpha);

}  // namespace rppg
