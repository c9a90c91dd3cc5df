#pragma once

// Data-parallel inner loops of the pipeline. Each kernel exists twice with the
// same signature: `serial::` is the plain reference loop and `parallel::` the
// OpenMP version the library uses. Work is split only across independent
// items (frames, rows), so both produce bit-identical results.

#include <cstdint>
#include <span>
#include <vector>

#include "rppg/roi.hpp"
#include "rppg/types.hpp"

namespace rppg::kernels {

/// Masked RGB sums and pixel counts for every (frame, region) pair,
/// stored frame-major: index = frame * region_count + region.
struct RegionSums {
  std::size_t frame_count = 0;
  std::size_t region_count = 0;
  std::vector<double> r, g, b;
  std::vector<long long> count;

  std::size_t index(std::size_t frame, std::size_t region) const { return frame * region_count + region; }
};

/// Parameters for the joint bilateral filter used by specular removal.
struct BilateralParams {
  int radius = 5;              // window (2r+1)^2
  double sigma_space = 5.0;    // px
  double sigma_range = 0.05;   // guide units
};

/// Normalized joint-bilateral weights for a fixed guide image, one block of
/// (2r+1)^2 taps per pixel (zero outside the frame). The guide does not change
/// between specular-removal iterations, so the weights are computed once.
struct BilateralWeights {
  int width = 0;
  int height = 0;
  int radius = 0;
  std::size_t taps = 0;
  std::vector<double> w;
};

namespace serial {

std::vector<Bitmap> rasterize_masks(std::span<const LandmarkRecord> records, int width, int height);

RegionSums region_sums(std::span<const Image> frames, std::span<const Bitmap> masks, std::span<const Rect> regions);

BilateralWeights bilateral_weights(std::span<const double> guide, int width, int height, const BilateralParams& params);
void apply_bilateral(const BilateralWeights& bw, std::span<const double> src, std::span<double> out);
/// out(p) = sum_q Ws(p,q) Wr(guide p, guide q) src(q) / sum of weights.
void joint_bilateral(std::span<const double> src, std::span<const double> guide, int width, int height,
                     const BilateralParams& params, std::span<double> out);

}  // namespace serial

namespace parallel {

BilateralWeights bilateral_weights(std::span<const double> guide, int width, int height, const BilateralParams& params);
void apply_bilateral(const BilateralWeights& bw, std::span<const double> src, std::span<double> out);

std::vector<Bitmap> rasterize_masks(std::span<const LandmarkRecord> records, int width, int height);

RegionSums region_sums(std::span<const Image> frames, std::span<const Bitmap> masks, std::span<const Rect> regions);

void joint_bilateral(std::span<const double> src, std::span<const double> guide, int width, int height,
                     const BilateralParams& params, std::span<double> out);

}  // namespace parallel

}  // namespace rppg::kernels
