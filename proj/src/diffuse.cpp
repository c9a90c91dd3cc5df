#include "rppg/diffuse.hpp"

#include <algorithm>
#include <cmath>

#include "rppg/error.hpp"
#include "rppg/numeric.hpp"

namespace rppg {

namespace {

constexpr double kThird = 1.0 / 3.0;

template <bool Parallel>
DiffuseFrame estimate_bilateral(const Image& frame, const DiffuseOptions& opts) {
  const int w = frame.width, h = frame.height;
  const std::size_t n = frame.pixel_count();
  std::vector<double> sigma_max(n), guide(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto* p = frame.rgb.data() + 3 * i;
    const double sum = static_cast<double>(p[0]) + p[1] + p[2];
    if (sum <= 0.0) {
      sigma_max[i] = kThird;
      guide[i] = kThird;
      continue;
    }
    const double mx = std::max({p[0], p[1], p[2]}) / sum;
    const double mn = std::min({p[0], p[1], p[2]}) / sum;
    sigma_max[i] = mx;
    // Max chromaticity of the specular-free image: invariant to an added white term.
    const double denom = 1.0 - 3.0 * mn;
    guide[i] = denom > 1e-9 ? (mx - mn) / denom : kThird;
  }

  std::vector<double> filtered(n);
  kernels::BilateralWeights bw;
  if constexpr (Parallel) {
    bw = kernels::parallel::bilateral_weights(guide, w, h, opts.bilateral);
  } else {
    bw = kernels::serial::bilateral_weights(guide, w, h, opts.bilateral);
  }
  for (int it = 0; it < opts.max_iterations; ++it) {
    if constexpr (Parallel) {
      kernels::parallel::apply_bilateral(bw, sigma_max, filtered);
    } else {
      kernels::serial::apply_bilateral(bw, sigma_max, filtered);
    }
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double raised = std::max(sigma_max[i], filtered[i]);
      change = std::max(change, raised - sigma_max[i]);
      sigma_max[i] = raised;
    }
    if (change < opts.convergence) break;
  }

  DiffuseFrame out{w, h, std::vector<double>(n * 3, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto* p = frame.rgb.data() + 3 * i;
    const double sum = static_cast<double>(p[0]) + p[1] + p[2];
    const double mx = std::max({p[0], p[1], p[2]});
    const double mn = std::min({p[0], p[1], p[2]});
    const double denom = 1.0 - 3.0 * sigma_max[i];
    double spec = 0.0;
    if (std::abs(denom) > 1e-9) spec = (mx - sigma_max[i] * sum) / denom;
    spec = std::clamp(spec, 0.0, static_cast<double>(mn));
    for (int c = 0; c < 3; ++c) out.rgb[3 * i + c] = p[c] - spec;
  }
  return out;
}

template <bool Parallel>
DiffuseFrame estimate_any(const Image& frame, const DiffuseOptions& opts) {
  if (opts.estimator == DiffuseEstimator::MinChannel) return estimate_diffuse_min_channel(frame);
  return estimate_bilateral<Parallel>(frame, opts);
}

}  // namespace

DiffuseFrame estimate_diffuse(const Image& frame, const DiffuseOptions& opts) {
  return estimate_any<true>(frame, opts);
}

DiffuseFrame estimate_diffuse_min_channel(const Image& frame) {
  const std::size_t n = frame.pixel_count();
  DiffuseFrame out{frame.width, frame.height, std::vector<double>(n * 3)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto* p = frame.rgb.data() + 3 * i;
    const double mn = std::min({p[0], p[1], p[2]});
    for (int c = 0; c < 3; ++c) out.rgb[3 * i + c] = p[c] - mn;
  }
  return out;
}

CellLuminance cell_luminance(const DiffuseFrame& frame, const Bitmap& mask, const GridSpec& grid) {
  CellLuminance out{std::vector<double>(grid.cell_count(), 0.0), std::vector<long long>(grid.cell_count(), 0)};
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const Rect& rc = grid.cells[c];
    CompensatedSum acc;
    long long cnt = 0;
    const int x1 = std::min(rc.x + rc.w, frame.width), y1 = std::min(rc.y + rc.h, frame.height);
    for (int y = std::max(rc.y, 0); y < y1; ++y) {
      for (int x = std::max(rc.x, 0); x < x1; ++x) {
        if (!mask.get(x, y)) continue;
        acc.add(frame.luminance(x, y));
        ++cnt;
      }
    }
    out.sum[c] = acc.value();
    out.count[c] = cnt;
  }
  return out;
}

DiffuseWeights diffuse_weights(std::span<const CellLuminance> per_frame) {
  if (per_frame.empty()) throw Error(ErrorCode::EmptyRegion, "no frames for diffuse weights");
  const std::size_t cells = per_frame.front().sum.size();
  DiffuseWeights out{std::vector<double>(cells, 0.0)};
  long long any = 0;
  for (std::size_t c = 0; c < cells; ++c) {
    CompensatedSum acc;
    long long cnt = 0;
    for (const auto& f : per_frame) {
      acc.add(f.sum[c]);
      cnt += f.count[c];
    }
    any += cnt;
    out.w[c] = cnt > 0 ? acc.value() / static_cast<double>(cnt) : 0.0;
  }
  if (any == 0) throw Error(ErrorCode::EmptyRegion, "no masked pixels in any cell");
  const double total = compensated_sum(out.w);
  if (!(total > 0.0)) throw Error(ErrorCode::DegenerateWeights, "diffuse luminance is zero everywhere");
  for (double& v : out.w) v /= total;
  return out;
}

DiffuseWeights diffuse_weights(std::span<const DiffuseFrame> frames, const GridSpec& grid, std::span<const Bitmap> masks) {
  if (frames.empty()) throw Error(ErrorCode::EmptyRegion, "no frames for diffuse weights");
  if (masks.size() != frames.size()) throw Error(ErrorCode::CountMismatch, "mask/frame count mismatch");
  std::vector<CellLuminance> per_frame;
  per_frame.reserve(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) per_frame.push_back(cell_luminance(frames[k], masks[k], grid));
  return diffuse_weights(per_frame);
}

Image to_image(const DiffuseFrame& frame) {
  Image img(frame.width, frame.height);
  for (std::size_t i = 0; i < frame.rgb.size(); ++i) {
    img.rgb[i] = static_cast<std::uint8_t>(std::clamp(std::lround(frame.rgb[i]), 0L, 255L));
  }
  return img;
}

namespace kernels {

namespace serial {
std::vector<CellLuminance> diffuse_cell_luminance(std::span<const Image> frames, std::span<const Bitmap> masks,
                                                  const GridSpec& grid, const DiffuseOptions& opts) {
  std::vector<CellLuminance> out(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    out[k] = cell_luminance(estimate_any<false>(frames[k], opts), masks[k], grid);
  }
  return out;
}
}  // namespace serial

namespace parallel {
std::vector<CellLuminance> diffuse_cell_luminance(std::span<const Image> frames, std::span<const Bitmap> masks,
                                                  const GridSpec& grid, const DiffuseOptions& opts) {
  std::vector<CellLuminance> out(frames.size());
  const auto n = static_cast<long long>(frames.size());
  // Frames are independent; the per-frame filter runs serially inside.
#pragma omp parallel for schedule(dynamic, 4)
  for (long long k = 0; k < n; ++k) {
    out[k] = cell_luminance(estimate_any<false>(frames[k], opts), masks[k], grid);
  }
  return out;
}
}  // namespace parallel

}  // namespace kernels

}  // namespace rppg
