#include "rppg/chrom.hpp"

#include <cmath>

#include "rppg/error.hpp"
#include "rppg/numeric.hpp"

namespace rppg {

PulseWaveform chrom(const RgbTrace& trace, const HeartRateOptions& opts) {
  const std::size_t n = trace.size();
  if (!(trace.fps > 0.0) || static_cast<double>(n) < 2.0 * trace.fps) {
    throw Error(ErrorCode::TraceTooShort, "CHROM needs at least 2 s of samples, got " + std::to_string(n));
  }
  CompensatedSum sr, sg, sb;
  for (const auto& s : trace.samples) {
    sr.add(s.r);
    sg.add(s.g);
    sb.add(s.b);
  }
  const double mr = sr.value() / n, mg = sg.value() / n, mb = sb.value() / n;
  if (!(mr > 0.0) || !(mg > 0.0) || !(mb > 0.0)) {
    throw Error(ErrorCode::ZeroChannelMean, "channel mean is not positive");
  }

  PulseWaveform xs{std::vector<double>(n), trace.fps};
  PulseWaveform ys{std::vector<double>(n), trace.fps};
  for (std::size_t i = 0; i < n; ++i) {
    const double rn = trace.samples[i].r / mr;
    const double gn = trace.samples[i].g / mg;
    const double bn = trace.samples[i].b / mb;
    xs.samples[i] = 3.0 * rn - 2.0 * gn;
    ys.samples[i] = 1.5 * rn + gn - 1.5 * bn;
  }
  const PulseWaveform xf = bandpass(xs, opts);
  const PulseWaveform yf = bandpass(ys, opts);

  const double sy = stddev(yf.samples);
  const double alpha = sy < kChromMinSigma ? 0.0 : stddev(xf.samples) / sy;

  PulseWaveform out{std::vector<double>(n), trace.fps};
  for (std::size_t i = 0; i < n; ++i) out.samples[i] = xf.samples[i] - alpha * yf.samples[i];
  const double m = mean(out.samples);
  for (double& v : out.samples) v -= m;
  return out;
}

}  // namespace rppg
