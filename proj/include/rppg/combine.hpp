#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rppg/diffuse.hpp"
#include "rppg/heartrate.hpp"
#include "rppg/kernels.hpp"
#include "rppg/roi.hpp"
#include "rppg/types.hpp"

namespace rppg {

/// One RGB trace per grid cell, row-major. A cell with no masked pixels in
/// the first frame is dead: its trace is kept for equal lengths but it
/// never receives weight.
struct GridTraces {
  int rows = 0;
  int cols = 0;
  double fps = 0.0;
  std::vector<RgbTrace> cells;
  std::vector<std::uint8_t> dead;

  std::size_t cell_count() const { return cells.size(); }
  std::size_t live_count() const;
};

struct SnrWeights {
  std::vector<double> w;    // normalized
  std::vector<double> snr;  // raw clamped two-harmonic SNR per cell
};

/// Unweighted mean of all masked pixels per frame.
RgbTrace facial_aggregate(std::span<const Image> frames, std::span<const Bitmap> masks, double fps);

GridTraces grid_traces(std::span<const Image> frames, std::span<const Bitmap> masks, const GridSpec& grid, double fps);

/// Benchmark cell weights: each live cell's CHROM waveform is scored by the
/// two-harmonic SNR at its own dominant in-band frequency.
SnrWeights snr_weights(const GridTraces& traces, const HeartRateOptions& opts = {});

/// Benchmark combination: SNR-weighted sum of per-cell CHROM waveforms.
PulseWaveform combine_benchmark_snr(const GridTraces& traces, const SnrWeights& weights,
                                    const HeartRateOptions& opts = {});

/// Final proposed weights: product of SNR and diffuse weights over live
/// cells, renormalized to sum 1.
std::vector<double> proposed_weights(const GridTraces& traces, const SnrWeights& snr_w, const DiffuseWeights& diff_w);

/// Proposed combination: the product-weighted mean of cell RGB traces. The
/// result is an RGB trace that goes through CHROM once, downstream.
RgbTrace combine_proposed(const GridTraces& traces, const SnrWeights& snr_w, const DiffuseWeights& diff_w);

/// Weighted sum of cell traces with the given (already normalized) weights.
RgbTrace weighted_rgb(const GridTraces& traces, std::span<const double> weights);

}  // namespace rppg
