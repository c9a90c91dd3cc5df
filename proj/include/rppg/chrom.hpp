#pragma once

#include "rppg/heartrate.hpp"
#include "rppg/types.hpp"

namespace rppg {

/// Below this spread of the filtered Y chrominance, alpha is taken as 0.
inline constexpr double kChromMinSigma = 1e-12;

/// Chrominance-based pulse extraction over one window.
///
/// Channels are normalized by their window means, projected to
///   X = 3R - 2G,  Y = 1.5R + G - 1.5B,
/// both bandpassed zero-phase with the heart-rate passband, and combined as
/// S = Xf - (sd(Xf) / sd(Yf)) * Yf. The output has zero mean.
PulseWaveform chrom(const RgbTrace& trace, const HeartRateOptions& opts = {});

}  // namespace rppg
