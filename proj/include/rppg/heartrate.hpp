#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rppg/types.hpp"

namespace rppg {

/// Second-order section, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

struct Passband {
  double low_hz = 0.7;
  double high_hz = 3.5;
};

/// Digital Butterworth bandpass designed by bilinear transform with
/// prewarped band edges. `order` is the prototype order, so the cascade has
/// `order` biquads and 2*order poles.
std::vector<Biquad> design_butterworth_bandpass(int order, Passband band, double fs);

/// Single forward pass through the cascade (transposed direct form II).
std::vector<double> sos_filter(std::span<const Biquad> sos, std::span<const double> x);

/// Forward-backward filtering with odd-extension padding and steady-state
/// initial conditions. Zero phase; magnitude response is squared.
std::vector<double> sos_filtfilt(std::span<const Biquad> sos, std::span<const double> x);

struct Psd {
  std::vector<double> freqs;  // Hz, ascending, uniform
  std::vector<double> power;  // one-sided density
  double resolution = 0.0;    // Hz

  /// Integrated power over [center - half_width, center + half_width].
  double band_power(double center, double half_width) const;
  double total_power() const;
};

struct WindowPlan {
  double window_s = 10.0;
  double hop_s = 5.0;
  std::vector<double> starts;
};

struct HrEstimate {
  std::vector<double> per_window_bpm;
  double video_bpm = 0.0;
};

struct HeartRateOptions {
  Passband passband{};
  int filter_order = 3;
  double snr_halfwidth_hz = 0.1;
  std::vector<double> notch_hz;
  double notch_halfwidth_hz = 0.05;
  int max_peaks = 5;
  double min_prominence = 0.05;  // fraction of max in-band power
};

inline constexpr double kSnrCap = 100.0;

/// Zero-phase Butterworth bandpass of a waveform.
PulseWaveform bandpass(const PulseWaveform& wave, const HeartRateOptions& opts = {});

/// Hann-tapered periodogram zero-padded to the next power of two >= 8N.
Psd psd(const PulseWaveform& wave);

/// Smallest power of two >= 8n.
std::size_t padded_length(std::size_t n);

/// Replaces power within +-halfwidth of each notch by linear interpolation
/// between the bins bracketing the notch band.
Psd suppress_artifacts(const Psd& spectrum, std::span<const double> notch_hz, double halfwidth_hz = 0.05);

/// In-band peaks (strict local maxima with sufficient prominence), strongest
/// first, at most `max_peaks`. Returned as bin indices.
std::vector<std::size_t> find_peaks(const Psd& spectrum, const HeartRateOptions& opts = {});

/// Heart rate in bpm: among the strongest peaks, the one whose fundamental
/// band (+-w) plus second-harmonic band (+-2w) holds the most power.
double select_hr(const Psd& spectrum, const HeartRateOptions& opts = {});

/// Frequency of the largest in-band bin.
double dominant_frequency(const Psd& spectrum, Passband band = {});

/// Two-harmonic SNR from a precomputed spectrum, clamped to [0, kSnrCap].
double two_harmonic_snr(const Psd& spectrum, double p_hz, double w_hz);
double two_harmonic_snr(const PulseWaveform& wave, double p_hz, double w_hz);

WindowPlan plan_windows(double duration_s, double window_s = 10.0, double hop_s = 5.0);

/// Per-window heart rate (bandpass, PSD, notch, peak selection) and their mean.
HrEstimate estimate_video_hr(std::span<const PulseWaveform> windows, const HeartRateOptions& opts = {});

/// Notch frequencies taken from the strongest in-band peaks of a background
/// region's spectrum.
std::vector<double> derive_notches(const Psd& background, std::size_t max_notches, const HeartRateOptions& opts = {});

}  // namespace rppg
