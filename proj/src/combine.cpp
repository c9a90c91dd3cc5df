#include "rppg/combine.hpp"

#include <algorithm>
#include <exception>
#include <optional>

#include "rppg/chrom.hpp"
#include "rppg/error.hpp"
#include "rppg/numeric.hpp"

namespace rppg {

namespace {

constexpr double kWeightEpsilon = 1e-12;

void normalize_or_throw(std::vector<double>& w, const char* what) {
  const double total = compensated_sum(w);
  if (!(total >= kWeightEpsilon)) throw Error(ErrorCode::DegenerateWeights, std::string(what) + " sum below 1e-12");
  for (double& v : w) v /= total;
}

}  // namespace

std::size_t GridTraces::live_count() const {
  return static_cast<std::size_t>(std::count(dead.begin(), dead.end(), std::uint8_t{0}));
}

RgbTrace facial_aggregate(std::span<const Image> frames, std::span<const Bitmap> masks, double fps) {
  if (frames.empty()) throw Error(ErrorCode::EmptyRegion, "no frames");
  const Rect whole{0, 0, frames.front().width, frames.front().height};
  const auto sums = kernels::parallel::region_sums(frames, masks, std::span<const Rect>(&whole, 1));
  RgbTrace out{std::vector<Rgb>(frames.size()), fps};
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const long long n = sums.count[k];
    if (n == 0) throw Error(ErrorCode::EmptyRegion, "frame " + std::to_string(k) + " has no skin pixels");
    const double dn = static_cast<double>(n);
    out.samples[k] = {sums.r[k] / dn, sums.g[k] / dn, sums.b[k] / dn};
  }
  return out;
}

GridTraces grid_traces(std::span<const Image> frames, std::span<const Bitmap> masks, const GridSpec& grid, double fps) {
  const auto sums = kernels::parallel::region_sums(frames, masks, grid.cells);
  GridTraces out;
  out.rows = grid.rows;
  out.cols = grid.cols;
  out.fps = fps;
  const std::size_t cells = grid.cell_count();
  out.cells.assign(cells, RgbTrace{std::vector<Rgb>(frames.size()), fps});
  out.dead.assign(cells, 0);
  for (std::size_t c = 0; c < cells; ++c) {
    Rgb last{};
    for (std::size_t k = 0; k < frames.size(); ++k) {
      const std::size_t i = sums.index(k, c);
      const long long n = sums.count[i];
      if (n == 0) {
        if (k == 0) out.dead[c] = 1;
        out.cells[c].samples[k] = last;
        continue;
      }
      const double dn = static_cast<double>(n);
      last = {sums.r[i] / dn, sums.g[i] / dn, sums.b[i] / dn};
      out.cells[c].samples[k] = last;
    }
  }
  return out;
}

SnrWeights snr_weights(const GridTraces& traces, const HeartRateOptions& opts) {
  const std::size_t cells = traces.cell_count();
  if (traces.live_count() == 0) throw Error(ErrorCode::AllCellsDead, "every grid cell is empty");
  if (traces.cells.front().size() < static_cast<std::size_t>(2.0 * traces.fps)) {
    throw Error(ErrorCode::TraceTooShort, "SNR weighting needs >= 2 s of samples");
  }
  SnrWeights out{std::vector<double>(cells, 0.0), std::vector<double>(cells, 0.0)};
  const auto n = static_cast<long long>(cells);
#pragma omp parallel for schedule(dynamic)
  for (long long c = 0; c < n; ++c) {
    if (traces.dead[c]) continue;
    try {
      const Psd spectrum = psd(chrom(traces.cells[c], opts));
      const double p = dominant_frequency(spectrum, opts.passband);
      out.snr[c] = two_harmonic_snr(spectrum, p, opts.snr_halfwidth_hz);
    } catch (...) {
      // Undefined SNR (flat or degenerate cell) counts as no signal.
      out.snr[c] = 0.0;
    }
  }
  out.w = out.snr;
  normalize_or_throw(out.w, "SNR weights");
  return out;
}

PulseWaveform combine_benchmark_snr(const GridTraces& traces, const SnrWeights& weights, const HeartRateOptions& opts) {
  const std::size_t cells = traces.cell_count();
  if (weights.w.size() != cells) throw Error(ErrorCode::LengthMismatch, "weights do not match grid");
  const std::size_t len = traces.cells.front().size();
  std::vector<std::optional<PulseWaveform>> waves(cells);
  const auto n = static_cast<long long>(cells);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (long long c = 0; c < n; ++c) {
    if (weights.w[c] <= 0.0) continue;
    try {
      waves[c] = chrom(traces.cells[c], opts);
    } catch (...) {
#pragma omp critical(rppg_combine_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  PulseWaveform out{std::vector<double>(len, 0.0), traces.fps};
  for (std::size_t i = 0; i < len; ++i) {
    CompensatedSum acc;
    for (std::size_t c = 0; c < cells; ++c) {
      if (waves[c]) acc.add(weights.w[c] * waves[c]->samples[i]);
    }
    out.samples[i] = acc.value();
  }
  return out;
}

std::vector<double> proposed_weights(const GridTraces& traces, const SnrWeights& snr_w, const DiffuseWeights& diff_w) {
  const std::size_t cells = traces.cell_count();
  if (snr_w.w.size() != cells || diff_w.w.size() != cells) {
    throw Error(ErrorCode::LengthMismatch, "weight vectors do not match grid");
  }
  std::vector<double> w(cells, 0.0);
  for (std::size_t c = 0; c < cells; ++c) {
    if (!traces.dead[c]) w[c] = snr_w.w[c] * diff_w.w[c];
  }
  normalize_or_throw(w, "SNR x diffuse weights");
  return w;
}

RgbTrace weighted_rgb(const GridTraces& traces, std::span<const double> weights) {
  const std::size_t len = traces.cells.front().size();
  RgbTrace out{std::vector<Rgb>(len), traces.fps};
  for (std::size_t i = 0; i < len; ++i) {
    CompensatedSum r, g, b;
    for (std::size_t c = 0; c < traces.cell_count(); ++c) {
      if (weights[c] == 0.0) continue;
      const Rgb& s = traces.cells[c].samples[i];
      r.add(weights[c] * s.r);
      g.add(weights[c] * s.g);
      b.add(weights[c] * s.b);
    }
    out.samples[i] = {r.value(), g.value(), b.value()};
  }
  return out;
}

RgbTrace combine_proposed(const GridTraces& traces, const SnrWeights& snr_w, const DiffuseWeights& diff_w) {
  const auto w = proposed_weights(traces, snr_w, diff_w);
  return weighted_rgb(traces, w);
}

}  // namespace rppg
