#pragma once

#include <span>
#include <vector>

#include "rppg/kernels.hpp"
#include "rppg/roi.hpp"
#include "rppg/types.hpp"

namespace rppg {

/// Specular-free estimate of a frame, real-valued, never brighter than the source.
struct DiffuseFrame {
  int width = 0;
  int height = 0;
  std::vector<double> rgb;

  const double* at(int x, int y) const { return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  double luminance(int x, int y) const {
    const double* p = at(x, y);
    return (p[0] + p[1] + p[2]) / 3.0;
  }
};

enum class DiffuseEstimator { Bilateral, MinChannel };

struct DiffuseOptions {
  DiffuseEstimator estimator = DiffuseEstimator::Bilateral;
  kernels::BilateralParams bilateral{};
  double convergence = 0.03;  // max per-pixel chromaticity change
  int max_iterations = 10;
};

/// Dichromatic separation under a white illuminant. The per-pixel maximum
/// chromaticity is raised towards the diffuse value by repeated joint
/// bilateral filtering (guided by a specular-invariant chromaticity) and
/// the specular term is reconstructed from it and subtracted.
DiffuseFrame estimate_diffuse(const Image& frame, const DiffuseOptions& opts = {});

/// Cheap fallback: subtract the per-pixel minimum channel.
DiffuseFrame estimate_diffuse_min_channel(const Image& frame);

/// Per-cell masked luminance sums for one frame.
struct CellLuminance {
  std::vector<double> sum;
  std::vector<long long> count;
};

CellLuminance cell_luminance(const DiffuseFrame& frame, const Bitmap& mask, const GridSpec& grid);

struct DiffuseWeights {
  std::vector<double> w;  // rows*cols, sums to 1
};

/// Time-and-space mean of diffuse luminance per cell, normalized to sum 1.
DiffuseWeights diffuse_weights(std::span<const DiffuseFrame> frames, const GridSpec& grid, std::span<const Bitmap> masks);
DiffuseWeights diffuse_weights(std::span<const CellLuminance> per_frame);

Image to_image(const DiffuseFrame& frame);

namespace kernels {
namespace serial {
std::vector<CellLuminance> diffuse_cell_luminance(std::span<const Image> frames, std::span<const Bitmap> masks,
                                                  const GridSpec& grid, const DiffuseOptions& opts);
}
namespace parallel {
std::vector<CellLuminance> diffuse_cell_luminance(std::span<const Image> frames, std::span<const Bitmap> masks,
                                                  const GridSpec& grid, const DiffuseOptions& opts);
}
}  // namespace kernels

}  // namespace rppg
