#include "rppg/heartrate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "fft.hpp"
#include "rppg/error.hpp"
#include "rppg/numeric.hpp"

namespace rppg {

namespace {

using cplx = std::complex<double>;

// Steady-state state of one biquad for a unit step input.
std::pair<double, double> biquad_step_state(const Biquad& s) {
  const double B0 = s.b1 - s.a1 * s.b0;
  const double B1 = s.b2 - s.a2 * s.b0;
  const double z0 = (B0 + B1) / (1.0 + s.a1 + s.a2);
  return {z0, B1 - s.a2 * z0};
}

void run_cascade(std::span<const Biquad> sos, std::vector<double>& x, std::vector<std::pair<double, double>> state) {
  for (std::size_t k = 0; k < sos.size(); ++k) {
    const Biquad& s = sos[k];
    auto [z0, z1] = state[k];
    for (double& v : x) {
      const double in = v;
      const double y = s.b0 * in + z0;
      z0 = s.b1 * in - s.a1 * y + z1;
      z1 = s.b2 * in - s.a2 * y;
      v = y;
    }
  }
}

std::vector<std::pair<double, double>> step_states(std::span<const Biquad> sos, double scale_in) {
  std::vector<std::pair<double, double>> zi(sos.size());
  double scale = scale_in;
  for (std::size_t k = 0; k < sos.size(); ++k) {
    auto [a, b] = biquad_step_state(sos[k]);
    zi[k] = {a * scale, b * scale};
    const Biquad& s = sos[k];
    scale *= (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
  }
  return zi;
}

bool in_band(double f, double center, double half_width) { return std::abs(f - center) <= half_width; }

}  // namespace

std::vector<Biquad> design_butterworth_bandpass(int order, Passband band, double fs) {
  if (order < 1) throw Error(ErrorCode::InvalidArgument, "filter order must be >= 1");
  if (!(band.low_hz > 0.0) || !(band.high_hz > band.low_hz)) throw Error(ErrorCode::InvalidArgument, "bad passband");
  if (!(fs > 2.0 * band.high_hz)) {
    throw Error(ErrorCode::SampleRateTooLow, "fps " + std::to_string(fs) + " does not exceed twice the upper band edge");
  }
  const double fs2 = 2.0 * fs;
  const double w1 = fs2 * std::tan(std::numbers::pi * band.low_hz / fs);
  const double w2 = fs2 * std::tan(std::numbers::pi * band.high_hz / fs);
  const double bw = w2 - w1;
  const double w0sq = w1 * w2;

  // Analog lowpass prototype poles -> bandpass poles -> z-plane.
  std::vector<cplx> analog;
  for (int k = 0; k < order; ++k) {
    const cplx p = std::polar(1.0, std::numbers::pi * (2.0 * k + order + 1) / (2.0 * order));
    const cplx half = p * bw / 2.0;
    const cplx disc = std::sqrt(half * half - w0sq);
    analog.push_back(half + disc);
    analog.push_back(half - disc);
  }
  // N analog zeros at s=0 and N at infinity map to N zeros at z=+1 and N at
  // z=-1; the band transform contributes bw^N to the gain.
  cplx gain = std::pow(bw * fs2, order);
  std::vector<cplx> poles;
  for (const cplx& s : analog) {
    poles.push_back((fs2 + s) / (fs2 - s));
    gain /= (fs2 - s);
  }

  // Pair conjugates; leftover real poles pair with each other.
  std::vector<cplx> upper, reals;
  for (const cplx& p : poles) {
    if (std::abs(p.imag()) < 1e-12 * std::max(1.0, std::abs(p))) {
      reals.push_back(p.real());
    } else if (p.imag() > 0) {
      upper.push_back(p);
    }
  }
  std::sort(reals.begin(), reals.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
  std::vector<Biquad> sos;
  for (const cplx& p : upper) {
    Biquad s;
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;
    s.a1 = -2.0 * p.real();
    s.a2 = std::norm(p);
    sos.push_back(s);
  }
  for (std::size_t k = 0; k + 1 < reals.size(); k += 2) {
    Biquad s;
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;
    s.a1 = -(reals[k].real() + reals[k + 1].real());
    s.a2 = reals[k].real() * reals[k + 1].real();
    sos.push_back(s);
  }
  if (sos.size() != static_cast<std::size_t>(order)) {
    throw Error(ErrorCode::InvalidArgument, "pole pairing failed for bandpass design");
  }
  const double g = gain.real();
  sos.front().b0 *= g;
  sos.front().b2 *= g;
  return sos;
}

std::vector<double> sos_filter(std::span<const Biquad> sos, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  run_cascade(sos, y, std::vector<std::pair<double, double>>(sos.size(), {0.0, 0.0}));
  return y;
}

std::vector<double> sos_filtfilt(std::span<const Biquad> sos, std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  std::size_t pad = 3 * (2 * sos.size() + 1);
  if (pad >= n) pad = n - 1;

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t k = pad; k >= 1; --k) ext.push_back(2.0 * x[0] - x[k]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t k = 1; k <= pad; ++k) ext.push_back(2.0 * x[n - 1] - x[n - 1 - k]);

  run_cascade(sos, ext, step_states(sos, ext.front()));
  std::reverse(ext.begin(), ext.end());
  run_cascade(sos, ext, step_states(sos, ext.front()));
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

double Psd::band_power(double center, double half_width) const {
  CompensatedSum acc;
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    if (in_band(freqs[k], center, half_width)) acc.add(power[k]);
  }
  return acc.value() * resolution;
}

double Psd::total_power() const { return compensated_sum(power) * resolution; }

PulseWaveform bandpass(const PulseWaveform& wave, const HeartRateOptions& opts) {
  if (!(wave.fps > 2.0 * opts.passband.high_hz)) {
    throw Error(ErrorCode::SampleRateTooLow, "fps " + std::to_string(wave.fps) + " too low for passband");
  }
  const auto sos = design_butterworth_bandpass(opts.filter_order, opts.passband, wave.fps);
  return {sos_filtfilt(sos, wave.samples), wave.fps};
}

std::size_t padded_length(std::size_t n) {
  std::size_t nfft = 1;
  while (nfft < 8 * n) nfft <<= 1;
  return nfft;
}

Psd psd(const PulseWaveform& wave) {
  const std::size_t n = wave.size();
  if (n < 64) throw Error(ErrorCode::TooShort, "PSD needs >= 64 samples, got " + std::to_string(n));
  const std::size_t nfft = padded_length(n);
  std::vector<double> tapered(n);
  CompensatedSum wsum;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
    tapered[i] = wave.samples[i] * w;
    wsum.add(w * w);
  }
  const auto mag2 = detail::squared_magnitude_spectrum(tapered, nfft);
  Psd out;
  out.resolution = wave.fps / static_cast<double>(nfft);
  out.freqs.resize(mag2.size());
  out.power.resize(mag2.size());
  const double scale = 1.0 / (wave.fps * wsum.value());
  for (std::size_t k = 0; k < mag2.size(); ++k) {
    out.freqs[k] = static_cast<double>(k) * out.resolution;
    const bool edge = (k == 0) || (k == nfft / 2);
    out.power[k] = mag2[k] * scale * (edge ? 1.0 : 2.0);
  }
  return out;
}

Psd suppress_artifacts(const Psd& spectrum, std::span<const double> notch_hz, double halfwidth_hz) {
  Psd out = spectrum;
  if (out.freqs.empty()) return out;
  for (double f : notch_hz) {
    if (f < out.freqs.front() || f > out.freqs.back()) continue;
    std::size_t lo = out.freqs.size(), hi = 0;
    for (std::size_t k = 0; k < out.freqs.size(); ++k) {
      if (in_band(out.freqs[k], f, halfwidth_hz)) {
        lo = std::min(lo, k);
        hi = std::max(hi, k);
      }
    }
    if (lo > hi) continue;
    const bool has_left = lo > 0;
    const bool has_right = hi + 1 < out.freqs.size();
    const double left = has_left ? out.power[lo - 1] : out.power[hi + 1];
    const double right = has_right ? out.power[hi + 1] : left;
    const double span = static_cast<double>(hi - lo + 2);
    for (std::size_t k = lo; k <= hi; ++k) {
      const double u = static_cast<double>(k - lo + 1) / span;
      out.power[k] = left + u * (right - left);
    }
  }
  return out;
}

std::vector<std::size_t> find_peaks(const Psd& spectrum, const HeartRateOptions& opts) {
  const auto& p = spectrum.power;
  const auto& f = spectrum.freqs;
  double max_in_band = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (f[k] >= opts.passband.low_hz && f[k] <= opts.passband.high_hz) max_in_band = std::max(max_in_band, p[k]);
  }
  std::vector<std::size_t> peaks;
  if (!(max_in_band > 0.0)) return peaks;
  const double min_prom = opts.min_prominence * max_in_band;
  for (std::size_t k = 1; k + 1 < f.size(); ++k) {
    if (f[k] < opts.passband.low_hz || f[k] > opts.passband.high_hz) continue;
    if (!(p[k] > p[k - 1] && p[k] > p[k + 1])) continue;
    double left_min = p[k];
    for (std::size_t j = k; j-- > 0;) {
      if (p[j] > p[k]) break;
      left_min = std::min(left_min, p[j]);
    }
    double right_min = p[k];
    for (std::size_t j = k + 1; j < f.size(); ++j) {
      if (p[j] > p[k]) break;
      right_min = std::min(right_min, p[j]);
    }
    if (p[k] - std::max(left_min, right_min) >= min_prom) peaks.push_back(k);
  }
  std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
  if (peaks.size() > static_cast<std::size_t>(opts.max_peaks)) peaks.resize(static_cast<std::size_t>(opts.max_peaks));
  return peaks;
}

double select_hr(const Psd& spectrum, const HeartRateOptions& opts) {
  const auto peaks = find_peaks(spectrum, opts);
  if (peaks.empty()) throw Error(ErrorCode::NoPeaks, "no in-band spectral peak");
  const double w = opts.snr_halfwidth_hz;
  double best_score = -1.0;
  double best_freq = 0.0;
  for (std::size_t k : peaks) {
    const double fp = spectrum.freqs[k];
    const double score = spectrum.band_power(fp, w) + spectrum.band_power(2.0 * fp, 2.0 * w);
    if (score > best_score) {
      best_score = score;
      best_freq = fp;
    }
  }
  return 60.0 * best_freq;
}

double dominant_frequency(const Psd& spectrum, Passband band) {
  double best = -1.0;
  double freq = band.low_hz;
  for (std::size_t k = 0; k < spectrum.freqs.size(); ++k) {
    const double f = spectrum.freqs[k];
    if (f < band.low_hz || f > band.high_hz) continue;
    if (spectrum.power[k] > best) {
      best = spectrum.power[k];
      freq = f;
    }
  }
  return freq;
}

double two_harmonic_snr(const Psd& spectrum, double p_hz, double w_hz) {
  if (!(w_hz > 0.0)) throw Error(ErrorCode::InvalidArgument, "SNR half-width must be > 0");
  const double total = spectrum.total_power();
  if (!(total >= 1e-15)) throw Error(ErrorCode::DegenerateSpectrum, "total power below 1e-15");
  const double num = spectrum.band_power(p_hz, w_hz) + spectrum.band_power(2.0 * p_hz, 2.0 * w_hz);
  const double den = total - num;
  if (den < 1e-12 * total) return kSnrCap;
  return std::clamp(num / den, 0.0, kSnrCap);
}

double two_harmonic_snr(const PulseWaveform& wave, double p_hz, double w_hz) {
  if (p_hz < 0.7 || p_hz > 3.5) throw Error(ErrorCode::InvalidArgument, "SNR peak frequency outside [0.7, 3.5] Hz");
  return two_harmonic_snr(psd(wave), p_hz, w_hz);
}

WindowPlan plan_windows(double duration_s, double window_s, double hop_s) {
  if (!(window_s > 0.0) || !(hop_s > 0.0)) throw Error(ErrorCode::InvalidArgument, "window and hop must be > 0");
  WindowPlan plan;
  plan.window_s = window_s;
  plan.hop_s = hop_s;
  for (std::size_t k = 0;; ++k) {
    const double start = static_cast<double>(k) * hop_s;
    if (start + window_s > duration_s + 1e-9) break;
    plan.starts.push_back(start);
  }
  return plan;
}

HrEstimate estimate_video_hr(std::span<const PulseWaveform> windows, const HeartRateOptions& opts) {
  if (windows.empty()) throw Error(ErrorCode::NoWindows, "no analysis windows");
  HrEstimate est;
  est.per_window_bpm.resize(windows.size());
  for (std::size_t k = 0; k < windows.size(); ++k) {
    const Psd spectrum = suppress_artifacts(psd(bandpass(windows[k], opts)), opts.notch_hz, opts.notch_halfwidth_hz);
    est.per_window_bpm[k] = select_hr(spectrum, opts);
  }
  est.video_bpm = mean(est.per_window_bpm);
  return est;
}

std::vector<double> derive_notches(const Psd& background, std::size_t max_notches, const HeartRateOptions& opts) {
  auto peaks = find_peaks(background, opts);
  if (peaks.size() > max_notches) peaks.resize(max_notches);
  std::vector<double> out;
  for (std::size_t k : peaks) out.push_back(background.freqs[k]);
  return out;
}

}  // namespace rppg
