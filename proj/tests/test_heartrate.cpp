#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "rppg/heartrate.hpp"
#include "test_util.hpp"

using namespace rppg;

namespace {

constexpr double kPi = std::numbers::pi;

PulseWaveform tone(double f, double fps, std::size_t n, double amp = 1.0, double phase = 0.0) {
  PulseWaveform w{std::vector<double>(n), fps};
  for (std::size_t i = 0; i < n; ++i) w.samples[i] = amp * std::sin(2 * kPi * f * i / fps + phase);
  return w;
}

// Squared magnitude of the analog Butterworth bandpass at the prewarped
// frequency, which the bilinear transform maps exactly onto f.
double butterworth_gain2(double f, int order, Passband b, double fs) {
  const auto warp = [&](double x) { return 2 * fs * std::tan(kPi * x / fs); };
  const double wl = warp(b.low_hz), wh = warp(b.high_hz), w = warp(f);
  const double q = (w * w - wl * wh) / ((wh - wl) * w);
  return 1.0 / (1.0 + std::pow(q * q, order));
}

std::complex<double> sos_response(const std::vector<Biquad>& sos, double f, double fs) {
  const auto z1 = std::polar(1.0, -2 * kPi * f / fs);
  const auto z2 = z1 * z1;
  std::complex<double> h = 1.0;
  for (const auto& s : sos) h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  return h;
}

// One-sided Hann periodogram by direct DFT summation.
std::vector<double> dft_psd(const std::vector<double>& x, double fps, std::size_t nfft) {
  const std::size_t n = x.size();
  std::vector<double> w(n);
  double w2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 * (1 - std::cos(2 * kPi * i / (n - 1)));
    w2 += w[i] * w[i];
  }
  std::vector<double> p(nfft / 2 + 1);
  for (std::size_t k = 0; k < p.size(); ++k) {
    std::complex<double> acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * w[i] * std::polar(1.0, -2 * kPi * double(k * i % nfft) / nfft);
    p[k] = std::norm(acc) / (fps * w2) * ((k == 0 || k == nfft / 2) ? 1 : 2);
  }
  return p;
}

double snr_oracle(const std::vector<double>& p, double res, double f0, double w) {
  double num = 0, total = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double f = k * res;
    total += p[k];
    if (std::abs(f - f0) <= w || std::abs(f - 2 * f0) <= 2 * w) num += p[k];
  }
  if (total - num < 1e-12 * total) return kSnrCap;
  return std::clamp(num / (total - num), 0.0, kSnrCap);
}

Psd spikes(double res, double fmax, std::initializer_list<std::pair<double, double>> peaks) {
  Psd s;
  s.resolution = res;
  for (std::size_t k = 0; k * res <= fmax + 1e-12; ++k) {
    s.freqs.push_back(k * res);
    s.power.push_back(0.0);
  }
  for (auto [f, pw] : peaks) s.power[static_cast<std::size_t>(std::lround(f / res))] = pw;
  return s;
}

// Score each candidate by direct band integration and return the winner in bpm.
double select_oracle(const Psd& s, const std::vector<std::size_t>& candidates, double w) {
  double best = -1, bpm = 0;
  for (auto k : candidates) {
    double sc = 0;
    for (std::size_t j = 0; j < s.freqs.size(); ++j) {
      if (std::abs(s.freqs[j] - s.freqs[k]) <= w) sc += s.power[j] * s.resolution;
      if (std::abs(s.freqs[j] - 2 * s.freqs[k]) <= 2 * w) sc += s.power[j] * s.resolution;
    }
    if (sc > best) {
      best = sc;
      bpm = 60 * s.freqs[k];
    }
  }
  return bpm;
}

}  // namespace

TEST_CASE("bandpass design matches the analog Butterworth magnitude") {
  for (double fs : {20.0, 30.0, 60.0}) {
    for (int order : {1, 2, 3, 4}) {
      const Passband b{0.7, 3.5};
      const auto sos = design_butterworth_bandpass(order, b, fs);
      CHECK(sos.size() == static_cast<std::size_t>(order));
      for (double f = 0.05; f < fs / 2; f += 0.173) {
        CHECK(std::norm(sos_response(sos, f, fs)) == doctest::Approx(butterworth_gain2(f, order, b, fs)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("zero-phase bandpass on sinusoids") {
  const double fs = 30;
  const std::size_t n = 3000;
  const auto amplitude = [&](const PulseWaveform& w) {
    // Least-squares sinusoid amplitude over the central half, away from edges.
    double peak = 0;
    for (std::size_t i = n / 4; i < 3 * n / 4; ++i) peak = std::max(peak, std::abs(w.samples[i]));
    return peak;
  };
  SUBCASE("1.5 Hz passes within 5%") {
    const auto out = bandpass(tone(1.5, fs, n));
    CHECK(amplitude(out) == doctest::Approx(1.0).epsilon(0.05));
    CHECK(amplitude(out) == doctest::Approx(butterworth_gain2(1.5, 3, {}, fs)).epsilon(0.01));
  }
  SUBCASE("0.2 Hz loses at least 20 dB") {
    const auto out = bandpass(tone(0.2, fs, n));
    CHECK(20 * std::log10(amplitude(out)) <= -20.0);
  }
  SUBCASE("zero in, zero out") {
    const auto out = bandpass(PulseWaveform{std::vector<double>(300, 0.0), fs});
    CHECK(out.size() == 300);
    for (double v : out.samples) CHECK(v == 0.0);
  }
  SUBCASE("output is in phase with the input") {
    const auto in = tone(1.2, fs, n);
    const auto out = bandpass(in);
    double dot = 0, ii = 0, oo = 0;
    for (std::size_t i = n / 4; i < 3 * n / 4; ++i) {
      dot += in.samples[i] * out.samples[i];
      ii += in.samples[i] * in.samples[i];
      oo += out.samples[i] * out.samples[i];
    }
    CHECK(dot / std::sqrt(ii * oo) > 0.9999);
  }
  SUBCASE("low frame rate") { CHECK_ERROR_CODE(bandpass(tone(1, 6.0, 300)), ErrorCode::SampleRateTooLow); }
}

TEST_CASE("psd equals a direct DFT periodogram") {
  std::mt19937 rng(1);
  std::normal_distribution<double> g;
  for (std::size_t n : {64u, 100u, 157u}) {
    PulseWaveform w{std::vector<double>(n), 25.0};
    for (auto& v : w.samples) v = g(rng);
    const auto s = psd(w);
    const auto nfft = padded_length(n);
    CHECK(nfft >= 8 * n);
    CHECK(nfft < 16 * n);
    const auto want = dft_psd(w.samples, w.fps, nfft);
    REQUIRE(s.power.size() == want.size());
    CHECK(s.resolution == doctest::Approx(25.0 / nfft));
    double scale = *std::max_element(want.begin(), want.end());
    for (std::size_t k = 0; k < want.size(); ++k) CHECK(std::abs(s.power[k] - want[k]) <= 1e-10 * scale);
  }
}

TEST_CASE("psd examples") {
  SUBCASE("1 Hz tone peaks at 1 Hz") {
    const auto s = psd(tone(1.0, 30, 300));
    const auto k = std::max_element(s.power.begin(), s.power.end()) - s.power.begin();
    CHECK(std::abs(s.freqs[k] - 1.0) <= 0.05);
  }
  SUBCASE("zero input") {
    const auto s = psd(PulseWaveform{std::vector<double>(300, 0.0), 30});
    for (double p : s.power) CHECK(p == 0.0);
  }
  SUBCASE("too short") { CHECK_ERROR_CODE(psd(tone(1, 30, 63)), ErrorCode::TooShort); }
  SUBCASE("white noise rarely exceeds ten times the median") {
    // Per-bin exceedance of an exponential periodogram ordinate is 2^-10.
    std::mt19937 rng(17);
    std::normal_distribution<double> g;
    long long above = 0, bins = 0;
    for (int seed = 0; seed < 100; ++seed) {
      PulseWaveform w{std::vector<double>(300), 30};
      for (auto& v : w.samples) v = g(rng);
      auto s = psd(w);
      std::vector<double> interior(s.power.begin() + 1, s.power.end() - 1);
      std::vector<double> sorted = interior;
      std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
      const double median = sorted[sorted.size() / 2];
      for (double p : interior) above += p > 10 * median;
      bins += static_cast<long long>(interior.size());
    }
    CHECK(static_cast<double>(above) / bins < 0.01);
  }
}

TEST_CASE("two-harmonic SNR matches direct band integration") {
  std::mt19937 rng(99);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.7, 3.5);
  for (int trial = 0; trial < 25; ++trial) {
    const double f0 = u(rng);
    auto w = tone(f0, 30, 300, 1.0, trial);
    for (auto& v : w.samples) v += g(rng);
    const auto nfft = padded_length(w.size());
    const double want = snr_oracle(dft_psd(w.samples, 30, nfft), 30.0 / nfft, f0, 0.1);
    CHECK(two_harmonic_snr(w, f0, 0.1) == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("two-harmonic SNR examples and properties") {
  SUBCASE("clean tone gives a large ratio") {
    // Hann leakage beyond +-0.1 Hz of a 10 s window keeps this below the cap.
    CHECK(two_harmonic_snr(tone(1.2, 30, 300), 1.2, 0.1) > 5.0);
    // With a window long enough for the main lobe to fit the band, the cap is reached.
    CHECK(two_harmonic_snr(tone(1.2, 30, 30 * 600), 1.2, 0.1) == doctest::Approx(kSnrCap));
  }
  SUBCASE("white noise stays small") {
    std::mt19937 rng(3);
    std::normal_distribution<double> g;
    for (int seed = 0; seed < 20; ++seed) {
      PulseWaveform w{std::vector<double>(300), 30};
      for (auto& v : w.samples) v = g(rng);
      CHECK(two_harmonic_snr(w, 1.3, 0.1) < 0.2);
    }
  }
  SUBCASE("amplitude scaling leaves SNR unchanged") {
    std::mt19937 rng(4);
    std::normal_distribution<double> g;
    auto w = tone(1.1, 30, 300);
    for (auto& v : w.samples) v += g(rng);
    auto scaled = w;
    for (auto& v : scaled.samples) v *= 37.5;
    CHECK(two_harmonic_snr(scaled, 1.1, 0.1) == doctest::Approx(two_harmonic_snr(w, 1.1, 0.1)).epsilon(1e-12));
  }
  SUBCASE("errors") {
    CHECK_ERROR_CODE(two_harmonic_snr(PulseWaveform{std::vector<double>(300, 0.0), 30}, 1.0, 0.1),
                     ErrorCode::DegenerateSpectrum);
    CHECK_ERROR_CODE(two_harmonic_snr(tone(1, 30, 300), 1.0, 0.0), ErrorCode::InvalidArgument);
  }
}

TEST_CASE("notch suppression") {
  const auto s = psd(tone(1.0, 30, 300));
  SUBCASE("empty list is the identity") { CHECK(suppress_artifacts(s, {}).power == s.power); }
  SUBCASE("out of range notch is ignored") {
    const std::vector<double> notch{40.0};
    CHECK(suppress_artifacts(s, notch).power == s.power);
  }
  SUBCASE("notch on the tone moves the argmax") {
    const std::vector<double> notch{1.0};
    const auto out = suppress_artifacts(s, notch, 0.05);
    const auto k = std::max_element(out.power.begin(), out.power.end()) - out.power.begin();
    CHECK(std::abs(out.freqs[k] - 1.0) > 0.05);
    // Linear interpolation between the bracketing bins.
    std::size_t lo = 0, hi = 0;
    for (std::size_t j = 0; j < s.freqs.size(); ++j) {
      if (std::abs(s.freqs[j] - 1.0) <= 0.05) {
        if (!lo) lo = j;
        hi = j;
      }
    }
    for (std::size_t j = lo; j <= hi; ++j) {
      const double t = double(j - lo + 1) / double(hi - lo + 2);
      CHECK(out.power[j] == doctest::Approx(s.power[lo - 1] + t * (s.power[hi + 1] - s.power[lo - 1])));
    }
  }
}

TEST_CASE("select_hr") {
  SUBCASE("single peak at 1.2 Hz") { CHECK(select_hr(spikes(0.01, 5, {{1.2, 3.0}})) == doctest::Approx(72.0)); }
  SUBCASE("harmonic support beats a stronger lone peak") {
    const auto s = spikes(0.01, 5, {{0.9, 8}, {1.0, 10}, {2.0, 5}});
    const auto peaks = find_peaks(s);
    CHECK(select_hr(s) == doctest::Approx(60.0));
    CHECK(select_hr(s) == select_oracle(s, peaks, 0.1));
    const auto s2 = spikes(0.01, 5, {{0.8, 10}, {1.1, 8}, {2.2, 5}});
    CHECK(select_hr(s2) == doctest::Approx(66.0));
    CHECK(select_hr(s2) == select_oracle(s2, find_peaks(s2), 0.1));
  }
  SUBCASE("flat spectrum") { CHECK_ERROR_CODE(select_hr(spikes(0.01, 5, {})), ErrorCode::NoPeaks); }
  SUBCASE("at most five peaks, strongest first, prominence filtered") {
    const auto s = spikes(0.01, 5, {{0.8, 1}, {1.0, 2}, {1.2, 3}, {1.4, 4}, {1.6, 5}, {1.8, 6}, {2.0, 0.2}});
    const auto peaks = find_peaks(s);
    REQUIRE(peaks.size() == 5);
    CHECK(s.freqs[peaks[0]] == doctest::Approx(1.8));
    CHECK(s.freqs[peaks[4]] == doctest::Approx(1.0));
  }
  SUBCASE("random spectra agree with the scoring oracle and are scale invariant") {
    std::mt19937 rng(8);
    std::exponential_distribution<double> e;
    for (int trial = 0; trial < 100; ++trial) {
      Psd s = spikes(0.02, 8, {});
      for (auto& p : s.power) p = e(rng);
      const double bpm = select_hr(s);
      CHECK(bpm == select_oracle(s, find_peaks(s), 0.1));
      Psd t = s;
      for (auto& p : t.power) p *= 123.0;
      CHECK(select_hr(t) == bpm);
    }
  }
}

TEST_CASE("window planning") {
  CHECK(plan_windows(120).starts.size() == 23);
  CHECK(plan_windows(120).starts.back() == doctest::Approx(110));
  CHECK(plan_windows(10).starts.size() == 1);
  CHECK(plan_windows(14.9).starts.size() == 1);
  CHECK(plan_windows(9.99).starts.empty());
  std::mt19937 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const double win = 1 + rng() % 20, hop = 1 + rng() % 10;
    const double dur = (rng() % 4000) / 10.0;
    const auto plan = plan_windows(dur, win, hop);
    const std::size_t want = dur < win ? 0 : static_cast<std::size_t>(std::floor((dur - win) / hop + 1e-9)) + 1;
    REQUIRE(plan.starts.size() == want);
    for (std::size_t k = 0; k < plan.starts.size(); ++k) CHECK(plan.starts[k] == k * hop);
  }
}

TEST_CASE("video heart rate is the window mean") {
  const std::vector<PulseWaveform> windows{tone(70 / 60.0, 30, 300), tone(74 / 60.0, 30, 300)};
  const auto est = estimate_video_hr(windows);
  REQUIRE(est.per_window_bpm.size() == 2);
  CHECK(est.per_window_bpm[0] == doctest::Approx(70).epsilon(0.01));
  CHECK(est.per_window_bpm[1] == doctest::Approx(74).epsilon(0.01));
  CHECK(est.video_bpm == doctest::Approx((est.per_window_bpm[0] + est.per_window_bpm[1]) / 2));
  CHECK(est.video_bpm == doctest::Approx(72).epsilon(0.01));
  for (double b : est.per_window_bpm) {
    CHECK(b >= 42);
    CHECK(b <= 210);
  }
  CHECK_ERROR_CODE(estimate_video_hr(std::vector<PulseWaveform>{}), ErrorCode::NoWindows);
}

TEST_CASE("background notches come from the strongest background peaks") {
  const auto bg = spikes(0.01, 5, {{1.5, 9}, {2.5, 4}, {0.9, 1}});
  const auto notches = derive_notches(bg, 2);
  REQUIRE(notches.size() == 2);
  CHECK(notches[0] == doctest::Approx(1.5));
  CHECK(notches[1] == doctest::Approx(2.5));
}
