#include "rppg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "rppg/chrom.hpp"
#include "rppg/error.hpp"
#include "rppg/io.hpp"

namespace rppg {

using json = nlohmann::json;

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Aggregate: return "aggregate";
    case Method::Snr: return "snr";
    case Method::Proposed: return "proposed";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  for (Method m : {Method::Aggregate, Method::Snr, Method::Proposed}) {
    if (to_string(m) == s) return m;
  }
  throw Error(ErrorCode::InvalidArgument, "method must be aggregate, snr or proposed, got " + std::string(s));
}

std::string_view to_string(DiffuseEstimator e) {
  return e == DiffuseEstimator::Bilateral ? "bilateral" : "min_channel";
}

DiffuseEstimator parse_estimator(std::string_view s) {
  if (s == "bilateral") return DiffuseEstimator::Bilateral;
  if (s == "min_channel") return DiffuseEstimator::MinChannel;
  throw Error(ErrorCode::InvalidArgument, "diffuse estimator must be bilateral or min_channel, got " + std::string(s));
}

void RunConfig::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); };
  if (!(window_s > 0.0) || !(hop_s > 0.0)) bad("window_s and hop_s must be positive");
  if (grid_rows < 1 || grid_cols < 1) bad("grid dimensions must be >= 1");
  if (!(hr.passband.low_hz > 0.0) || !(hr.passband.high_hz > hr.passband.low_hz)) bad("invalid passband");
  if (hr.filter_order < 1) bad("filter order must be >= 1");
  if (!(hr.snr_halfwidth_hz > 0.0)) bad("snr half-width must be positive");
  if (!(hr.notch_halfwidth_hz >= 0.0)) bad("notch half-width must be non-negative");
  if (!(bbox_alpha >= 0.0 && bbox_alpha < 1.0)) bad("bbox_alpha must lie in [0, 1)");
  if (diffuse.max_iterations < 1 || !(diffuse.convergence > 0.0)) bad("invalid diffuse iteration settings");
}

namespace {

std::vector<CellLuminance> compute_diffuse(std::span<const Image> frames, std::span<const Bitmap> masks,
                                           const GridSpec& grid, const DiffuseOptions& opts) {
  return kernels::parallel::diffuse_cell_luminance(frames, masks, grid, opts);
}

// Per-frame diffuse cell luminance, reused between overlapping windows as
// long as the grid does not move.
class DiffuseCache {
 public:
  explicit DiffuseCache(std::size_t frames) : per_frame_(frames) {}

  std::vector<CellLuminance> get(std::span<const Image> all, std::span<const Bitmap> masks, std::size_t first,
                                 std::size_t count, const GridSpec& grid, const DiffuseOptions& opts) {
    if (!(grid.bbox == bbox_) || grid.rows != rows_ || grid.cols != cols_) {
      std::fill(per_frame_.begin(), per_frame_.end(), std::nullopt);
      bbox_ = grid.bbox;
      rows_ = grid.rows;
      cols_ = grid.cols;
    }
    std::size_t miss = first;
    while (miss < first + count && per_frame_[miss]) ++miss;
    if (miss < first + count) {
      const std::size_t m = first + count - miss;
      auto fresh = compute_diffuse(all.subspan(miss, m), masks.subspan(miss, m), grid, opts);
      for (std::size_t k = 0; k < m; ++k) per_frame_[miss + k] = std::move(fresh[k]);
    }
    std::vector<CellLuminance> out;
    out.reserve(count);
    for (std::size_t k = first; k < first + count; ++k) out.push_back(*per_frame_[k]);
    return out;
  }

 private:
  std::vector<std::optional<CellLuminance>> per_frame_;
  Rect bbox_{-1, -1, -1, -1};
  int rows_ = 0;
  int cols_ = 0;
};

std::string matrix_csv(std::span<const double> w, int rows, int cols) {
  std::ostringstream o;
  o.precision(10);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c) o << ',';
      o << w[static_cast<std::size_t>(r) * cols + c];
    }
    o << '\n';
  }
  return o.str();
}

void write_debug(const std::filesystem::path& dir, const WindowReport& w, const Image& first_frame,
                 const DiffuseOptions& opts) {
  char stem[32];
  std::snprintf(stem, sizeof stem, "window_%03zu", w.index);
  const auto& s = w.signals;
  if (!s.snr_weights.empty()) {
    io::write_file_atomic(dir / (std::string(stem) + "_snr_weights.csv"), matrix_csv(s.snr_weights, s.grid_rows, s.grid_cols));
  }
  if (!s.diffuse_weights.empty()) {
    io::write_file_atomic(dir / (std::string(stem) + "_diffuse_weights.csv"),
                          matrix_csv(s.diffuse_weights, s.grid_rows, s.grid_cols));
  }
  if (!s.final_weights.empty()) {
    io::write_file_atomic(dir / (std::string(stem) + "_final_weights.csv"),
                          matrix_csv(s.final_weights, s.grid_rows, s.grid_cols));
  }
  const DiffuseFrame d = opts.estimator == DiffuseEstimator::Bilateral ? estimate_diffuse(first_frame, opts)
                                                                        : estimate_diffuse_min_channel(first_frame);
  io::write_ppm(to_image(d), dir / (std::string(stem) + "_diffuse.ppm"));
}

json config_json(const RunConfig& c) {
  return {
      {"method", to_string(c.method)},
      {"window_s", c.window_s},
      {"hop_s", c.hop_s},
      {"passband_low_hz", c.hr.passband.low_hz},
      {"passband_high_hz", c.hr.passband.high_hz},
      {"filter_order", c.hr.filter_order},
      {"snr_halfwidth_hz", c.hr.snr_halfwidth_hz},
      {"notch_hz", c.hr.notch_hz},
      {"notch_halfwidth_hz", c.hr.notch_halfwidth_hz},
      {"max_peaks", c.hr.max_peaks},
      {"min_prominence", c.hr.min_prominence},
      {"grid_rows", c.grid_rows},
      {"grid_cols", c.grid_cols},
      {"diffuse_estimator", to_string(c.diffuse.estimator)},
      {"diffuse_convergence", c.diffuse.convergence},
      {"diffuse_max_iterations", c.diffuse.max_iterations},
      {"bilateral_radius", c.diffuse.bilateral.radius},
      {"bilateral_sigma_space", c.diffuse.bilateral.sigma_space},
      {"bilateral_sigma_range", c.diffuse.bilateral.sigma_range},
      {"smooth_bbox", c.smooth_bbox},
      {"bbox_alpha", c.bbox_alpha},
  };
}

}  // namespace

WindowSignals process_window(std::span<const Image> frames, std::span<const Bitmap> masks, const Rect& bbox,
                             double fps, const RunConfig& cfg, std::span<const CellLuminance> diffuse) {
  WindowSignals out;
  if (cfg.method == Method::Aggregate) {
    out.waveform = chrom(facial_aggregate(frames, masks, fps), cfg.hr);
    return out;
  }

  const GridSpec grid = build_grid(bbox, cfg.grid_rows, cfg.grid_cols);
  const GridTraces traces = grid_traces(frames, masks, grid, fps);
  const SnrWeights snr = snr_weights(traces, cfg.hr);
  out.grid_rows = grid.rows;
  out.grid_cols = grid.cols;
  out.dead = traces.dead;
  out.snr_weights = snr.w;

  if (cfg.method == Method::Snr) {
    out.final_weights = snr.w;
    out.waveform = combine_benchmark_snr(traces, snr, cfg.hr);
    return out;
  }

  std::vector<CellLuminance> lum;
  if (diffuse.empty()) {
    lum = compute_diffuse(frames, masks, grid, cfg.diffuse);
    diffuse = lum;
  }
  const DiffuseWeights dw = diffuse_weights(diffuse);
  out.diffuse_weights = dw.w;
  out.final_weights = proposed_weights(traces, snr, dw);
  out.waveform = chrom(weighted_rgb(traces, out.final_weights), cfg.hr);
  return out;
}

HrReport run_pipeline(const FrameSequence& seq, const LandmarkSidecar& raw_lms, const RunConfig& cfg) {
  cfg.validate();
  io::validate_landmarks(raw_lms, seq.width(), seq.height(), seq.frame_count());
  const LandmarkSidecar lms = cfg.smooth_bbox ? smooth_bboxes(raw_lms, cfg.bbox_alpha) : raw_lms;

  HrReport rep;
  rep.config = cfg;
  rep.fps = seq.fps;
  rep.total_frames = seq.frame_count();

  const WindowPlan plan = plan_windows(seq.duration_s(), cfg.window_s, cfg.hop_s);
  if (plan.starts.empty()) {
    throw Error(ErrorCode::NoWindows, "video of " + std::to_string(seq.duration_s()) + " s is shorter than one window");
  }
  const SkinMask mask = build_mask(seq, lms);
  const std::span<const Image> frames(seq.frames);
  const std::span<const Bitmap> masks(mask.frames);
  const auto per_window = static_cast<std::size_t>(std::llround(cfg.window_s * seq.fps));

  DiffuseCache cache(seq.frame_count());
  std::vector<PulseWaveform> waves;
  for (std::size_t w = 0; w < plan.starts.size(); ++w) {
    WindowReport wr;
    wr.index = w;
    wr.start_s = plan.starts[w];
    wr.first_frame = static_cast<std::size_t>(std::llround(plan.starts[w] * seq.fps));
    wr.frame_count = std::min(per_window, seq.frame_count() - wr.first_frame);
    const Rect bbox = lms.per_frame[wr.first_frame].face_bbox;

    std::vector<CellLuminance> lum;
    if (cfg.method == Method::Proposed) {
      const GridSpec grid = build_grid(bbox, cfg.grid_rows, cfg.grid_cols);
      lum = cache.get(frames, masks, wr.first_frame, wr.frame_count, grid, cfg.diffuse);
    }
    wr.signals = process_window(frames.subspan(wr.first_frame, wr.frame_count),
                                masks.subspan(wr.first_frame, wr.frame_count), bbox, seq.fps, cfg, lum);
    waves.push_back(wr.signals.waveform);
    rep.windows.push_back(std::move(wr));
  }

  const HrEstimate est = estimate_video_hr(waves, cfg.hr);
  for (std::size_t w = 0; w < rep.windows.size(); ++w) rep.windows[w].bpm = est.per_window_bpm[w];
  rep.video_bpm = est.video_bpm;

  if (cfg.debug_dir) {
    for (const auto& w : rep.windows) write_debug(*cfg.debug_dir, w, seq.frames[w.first_frame], cfg.diffuse);
  }
  return rep;
}

std::string report_json(const HrReport& rep) {
  json windows = json::array();
  for (const auto& w : rep.windows) {
    json jw = {{"index", w.index},
               {"start_s", w.start_s},
               {"first_frame", w.first_frame},
               {"frame_count", w.frame_count},
               {"bpm", w.bpm}};
    if (!w.signals.final_weights.empty()) jw["weights"] = w.signals.final_weights;
    windows.push_back(std::move(jw));
  }
  json j = {{"schema_version", kReportSchemaVersion},
            {"method", to_string(rep.config.method)},
            {"config", config_json(rep.config)},
            {"fps", rep.fps},
            {"frame_count", rep.total_frames},
            {"windows", std::move(windows)},
            {"video_bpm", rep.video_bpm}};
  return j.dump(2) + "\n";
}

ReportSummary read_report(const std::filesystem::path& file) {
  const std::string text = io::read_file(file);
  try {
    const json j = json::parse(text);
    if (!j.contains("video_bpm") || !j["video_bpm"].is_number()) {
      throw Error(ErrorCode::MalformedFile, file.string() + ": no numeric video_bpm");
    }
    if (!j.contains("method") || !j["method"].is_string()) {
      throw Error(ErrorCode::MalformedFile, file.string() + ": no method");
    }
    return {j["method"].get<std::string>(), j["video_bpm"].get<double>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedFile, file.string() + ": " + e.what());
  }
}

}  // namespace rppg
