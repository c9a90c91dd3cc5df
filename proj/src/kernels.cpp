#include "rppg/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace rppg::kernels {

namespace {

void region_sums_frame(const Image& frame, const Bitmap& mask, std::span<const Rect> regions, std::size_t k,
                       RegionSums& out) {
  for (std::size_t c = 0; c < regions.size(); ++c) {
    const Rect& rc = regions[c];
    long long sr = 0, sg = 0, sb = 0, n = 0;
    const int x1 = std::min(rc.x + rc.w, frame.width);
    const int y1 = std::min(rc.y + rc.h, frame.height);
    for (int y = std::max(rc.y, 0); y < y1; ++y) {
      for (int x = std::max(rc.x, 0); x < x1; ++x) {
        if (!mask.get(x, y)) continue;
        const auto* p = frame.at(x, y);
        sr += p[0];
        sg += p[1];
        sb += p[2];
        ++n;
      }
    }
    const std::size_t i = out.index(k, c);
    out.r[i] = static_cast<double>(sr);
    out.g[i] = static_cast<double>(sg);
    out.b[i] = static_cast<double>(sb);
    out.count[i] = n;
  }
}

RegionSums make_sums(std::size_t frames, std::size_t regions) {
  RegionSums s;
  s.frame_count = frames;
  s.region_count = regions;
  const std::size_t n = frames * regions;
  s.r.assign(n, 0.0);
  s.g.assign(n, 0.0);
  s.b.assign(n, 0.0);
  s.count.assign(n, 0);
  return s;
}

std::vector<double> spatial_kernel(const BilateralParams& p) {
  const int d = 2 * p.radius + 1;
  std::vector<double> k(static_cast<std::size_t>(d) * d);
  for (int dy = -p.radius; dy <= p.radius; ++dy) {
    for (int dx = -p.radius; dx <= p.radius; ++dx) {
      k[static_cast<std::size_t>(dy + p.radius) * d + (dx + p.radius)] =
          std::exp(-(dx * dx + dy * dy) / (2.0 * p.sigma_space * p.sigma_space));
    }
  }
  return k;
}

// exp(-u) tabulated on [0, kRangeCut] and interpolated linearly; beyond the
// cut the weight is below 5e-18 of the centre tap and is dropped.
constexpr double kRangeCut = 40.0;
constexpr int kRangeSteps = 8192;

const std::vector<double>& range_table() {
  static const std::vector<double> table = [] {
    std::vector<double> t(kRangeSteps + 2);
    for (int i = 0; i < kRangeSteps + 2; ++i) t[i] = std::exp(-kRangeCut * i / kRangeSteps);
    return t;
  }();
  return table;
}

double range_weight(double u, const std::vector<double>& table) {
  if (u >= kRangeCut) return 0.0;
  const double s = u * (kRangeSteps / kRangeCut);
  const int i = static_cast<int>(s);
  const double f = s - i;
  return table[i] + f * (table[i + 1] - table[i]);
}

void weights_row(std::span<const double> guide, int width, int height, const BilateralParams& p,
                 const std::vector<double>& ks, int y, BilateralWeights& out) {
  const int d = 2 * p.radius + 1;
  const double inv_2sr2 = 1.0 / (2.0 * p.sigma_range * p.sigma_range);
  const auto& table = range_table();
  for (int x = 0; x < width; ++x) {
    const std::size_t i = static_cast<std::size_t>(y) * width + x;
    double* w = out.w.data() + i * out.taps;
    const double g0 = guide[i];
    double den = 0.0;
    for (int dy = -p.radius; dy <= p.radius; ++dy) {
      const int yy = y + dy;
      for (int dx = -p.radius; dx <= p.radius; ++dx) {
        const int xx = x + dx;
        const std::size_t t = static_cast<std::size_t>(dy + p.radius) * d + (dx + p.radius);
        if (yy < 0 || yy >= height || xx < 0 || xx >= width) {
          w[t] = 0.0;
          continue;
        }
        const double dg = guide[static_cast<std::size_t>(yy) * width + xx] - g0;
        w[t] = ks[t] * range_weight(dg * dg * inv_2sr2, table);
        den += w[t];
      }
    }
    for (std::size_t t = 0; t < out.taps; ++t) w[t] /= den;  // den >= ks[center] = 1
  }
}

void apply_row(const BilateralWeights& bw, std::span<const double> src, int y, std::span<double> out) {
  const int r = bw.radius, d = 2 * r + 1;
  for (int x = 0; x < bw.width; ++x) {
    const std::size_t i = static_cast<std::size_t>(y) * bw.width + x;
    const double* w = bw.w.data() + i * bw.taps;
    double acc = 0.0;
    for (int dy = -r; dy <= r; ++dy) {
      const int yy = y + dy;
      if (yy < 0 || yy >= bw.height) continue;
      const int x0 = std::max(x - r, 0), x1 = std::min(x + r, bw.width - 1);
      const double* row = src.data() + static_cast<std::size_t>(yy) * bw.width;
      const double* wr = w + static_cast<std::size_t>(dy + r) * d + r;
      for (int xx = x0; xx <= x1; ++xx) acc += wr[xx - x] * row[xx];
    }
    out[i] = acc;
  }
}

BilateralWeights make_weights(int width, int height, const BilateralParams& p) {
  BilateralWeights bw;
  bw.width = width;
  bw.height = height;
  bw.radius = p.radius;
  bw.taps = static_cast<std::size_t>(2 * p.radius + 1) * (2 * p.radius + 1);
  bw.w.assign(static_cast<std::size_t>(width) * height * bw.taps, 0.0);
  return bw;
}

}  // namespace

namespace serial {

std::vector<Bitmap> rasterize_masks(std::span<const LandmarkRecord> records, int width, int height) {
  std::vector<Bitmap> out(records.size());
  for (std::size_t k = 0; k < records.size(); ++k) out[k] = rasterize_skin(records[k], width, height);
  return out;
}

RegionSums region_sums(std::span<const Image> frames, std::span<const Bitmap> masks, std::span<const Rect> regions) {
  RegionSums out = make_sums(frames.size(), regions.size());
  for (std::size_t k = 0; k < frames.size(); ++k) region_sums_frame(frames[k], masks[k], regions, k, out);
  return out;
}

BilateralWeights bilateral_weights(std::span<const double> guide, int width, int height, const BilateralParams& params) {
  const auto ks = spatial_kernel(params);
  auto bw = make_weights(width, height, params);
  for (int y = 0; y < height; ++y) weights_row(guide, width, height, params, ks, y, bw);
  return bw;
}

void apply_bilateral(const BilateralWeights& bw, std::span<const double> src, std::span<double> out) {
  for (int y = 0; y < bw.height; ++y) apply_row(bw, src, y, out);
}

void joint_bilateral(std::span<const double> src, std::span<const double> guide, int width, int height,
                     const BilateralParams& params, std::span<double> out) {
  apply_bilateral(bilateral_weights(guide, width, height, params), src, out);
}

}  // namespace serial

namespace parallel {

std::vector<Bitmap> rasterize_masks(std::span<const LandmarkRecord> records, int width, int height) {
  std::vector<Bitmap> out(records.size());
  const auto n = static_cast<long long>(records.size());
#pragma omp parallel for schedule(static)
  for (long long k = 0; k < n; ++k) out[k] = rasterize_skin(records[k], width, height);
  return out;
}

RegionSums region_sums(std::span<const Image> frames, std::span<const Bitmap> masks, std::span<const Rect> regions) {
  RegionSums out = make_sums(frames.size(), regions.size());
  const auto n = static_cast<long long>(frames.size());
#pragma omp parallel for schedule(static)
  for (long long k = 0; k < n; ++k) region_sums_frame(frames[k], masks[k], regions, static_cast<std::size_t>(k), out);
  return out;
}

BilateralWeights bilateral_weights(std::span<const double> guide, int width, int height, const BilateralParams& params) {
  const auto ks = spatial_kernel(params);
  auto bw = make_weights(width, height, params);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) weights_row(guide, width, height, params, ks, y, bw);
  return bw;
}

void apply_bilateral(const BilateralWeights& bw, std::span<const double> src, std::span<double> out) {
#pragma omp parallel for schedule(static)
  for (int y = 0; y < bw.height; ++y) apply_row(bw, src, y, out);
}

void joint_bilateral(std::span<const double> src, std::span<const double> guide, int width, int height,
                     const BilateralParams& params, std::span<double> out) {
  apply_bilateral(bilateral_weights(guide, width, height, params), src, out);
}

}  // namespace parallel

}  // namespace rppg::kernels
