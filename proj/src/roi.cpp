#include "rppg/roi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rppg/error.hpp"
#include "rppg/kernels.hpp"

namespace rppg {

long long Bitmap::count() const {
  return std::accumulate(bits.begin(), bits.end(), 0LL, [](long long acc, std::uint8_t b) { return acc + (b != 0); });
}

bool polygon_contains(const Polygon& poly, double px, double py) {
  if (poly.size() < 3) return false;
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const double xi = poly[i].x, yi = poly[i].y;
    const double xj = poly[j].x, yj = poly[j].y;
    if ((yi > py) != (yj > py)) {
      const double x_cross = xj + (py - yj) * (xi - xj) / (yi - yj);
      if (px < x_cross) inside = !inside;
    }
  }
  return inside;
}

Bitmap rasterize_skin(const LandmarkRecord& rec, int width, int height) {
  Bitmap m(width, height);
  const Rect& b = rec.face_bbox;
  const int x0 = std::max(b.x, 0), x1 = std::min(b.x + b.w, width);
  const int y0 = std::max(b.y, 0), y1 = std::min(b.y + b.h, height);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const double cx = x + 0.5, cy = y + 0.5;
      const bool excluded = polygon_contains(rec.eyes[0], cx, cy) || polygon_contains(rec.eyes[1], cx, cy) ||
                            polygon_contains(rec.mouth, cx, cy);
      m.set(x, y, !excluded);
    }
  }
  return m;
}

SkinMask build_mask(const FrameSequence& seq, const LandmarkSidecar& lms) {
  if (lms.per_frame.size() != seq.frame_count()) {
    throw Error(ErrorCode::CountMismatch, "landmarks do not match frame count");
  }
  return SkinMask{kernels::parallel::rasterize_masks(lms.per_frame, seq.width(), seq.height())};
}

GridSpec build_grid(const Rect& bbox, int rows, int cols) {
  if (rows < 1 || cols < 1) throw Error(ErrorCode::InvalidArgument, "grid dimensions must be >= 1");
  if (bbox.w < cols || bbox.h < rows) {
    throw Error(ErrorCode::GridTooFine, "bbox " + std::to_string(bbox.w) + "x" + std::to_string(bbox.h) +
                                            " smaller than grid " + std::to_string(cols) + "x" + std::to_string(rows));
  }
  GridSpec g;
  g.bbox = bbox;
  g.rows = rows;
  g.cols = cols;
  const int cw = bbox.w / cols, ch = bbox.h / rows;
  g.cells.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    const int y = bbox.y + r * ch;
    const int h = (r == rows - 1) ? bbox.y + bbox.h - y : ch;
    for (int c = 0; c < cols; ++c) {
      const int x = bbox.x + c * cw;
      const int w = (c == cols - 1) ? bbox.x + bbox.w - x : cw;
      g.cells.push_back({x, y, w, h});
    }
  }
  return g;
}

LandmarkSidecar smooth_bboxes(const LandmarkSidecar& lms, double alpha) {
  LandmarkSidecar out = lms;
  if (lms.per_frame.empty()) return out;
  double x = lms.per_frame[0].face_bbox.x, y = lms.per_frame[0].face_bbox.y;
  double w = lms.per_frame[0].face_bbox.w, h = lms.per_frame[0].face_bbox.h;
  for (std::size_t k = 1; k < lms.per_frame.size(); ++k) {
    const Rect& raw = lms.per_frame[k].face_bbox;
    x = alpha * x + (1.0 - alpha) * raw.x;
    y = alpha * y + (1.0 - alpha) * raw.y;
    w = alpha * w + (1.0 - alpha) * raw.w;
    h = alpha * h + (1.0 - alpha) * raw.h;
    out.per_frame[k].face_bbox = {static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y)),
                                  static_cast<int>(std::lround(w)), static_cast<int>(std::lround(h))};
  }
  return out;
}

}  // namespace rppg
