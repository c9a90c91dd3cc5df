#include "rppg/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "rppg/biophysics.hpp"
#include "rppg/evaluation.hpp"
#include "rppg/io.hpp"
#include "rppg/pipeline.hpp"
#include "rppg/synth.hpp"

namespace rppg::cli {

namespace fs = std::filesystem;

int exit_code(ErrorFamily family) {
  switch (family) {
    case ErrorFamily::Usage: return kExitUsage;
    case ErrorFamily::MissingInput: return kExitMissingInput;
    case ErrorFamily::InvalidInput: return kExitInvalidInput;
    case ErrorFamily::Processing: return kExitProcessing;
    case ErrorFamily::Output: return kExitOutput;
  }
  return kExitUnexpected;
}

namespace {

struct EstimateArgs {
  std::string frames, landmarks, out, method = "proposed", estimator = "bilateral", debug_dir;
  RunConfig cfg;
};

struct EvaluateArgs {
  std::string manifest, out, plots_dir;
};

struct SynthArgs {
  std::string scene, out;
  std::optional<std::uint64_t> seed;
  bool raw = false;
};

struct BiophysArgs {
  std::string out, channel = "green";
  bio::Figure5Sweep sweep;
  bio::CameraNoiseParams noise;
};

void require_exists(const std::string& path, const char* what) {
  if (!fs::exists(path)) throw Error(ErrorCode::MissingInput, std::string(what) + " not found: " + path);
}

void add_estimate(CLI::App& app, EstimateArgs& a) {
  auto* c = app.add_subcommand("estimate", "Estimate heart rate from a frame sequence");
  c->add_option("--frames", a.frames, "Frame directory or raw stream")->required();
  c->add_option("--landmarks", a.landmarks, "Landmark sidecar (JSON lines)")->required();
  c->add_option("--out", a.out, "Report file (JSON)")->required();
  c->add_option("--method", a.method, "aggregate | snr | proposed")->capture_default_str();
  c->add_option("--window_s", a.cfg.window_s)->capture_default_str();
  c->add_option("--hop_s", a.cfg.hop_s)->capture_default_str();
  c->add_option("--passband_low_hz", a.cfg.hr.passband.low_hz)->capture_default_str();
  c->add_option("--passband_high_hz", a.cfg.hr.passband.high_hz)->capture_default_str();
  c->add_option("--filter_order", a.cfg.hr.filter_order)->capture_default_str();
  c->add_option("--snr_halfwidth_hz", a.cfg.hr.snr_halfwidth_hz)->capture_default_str();
  c->add_option("--notch_hz", a.cfg.hr.notch_hz, "Frequencies to suppress before peak selection");
  c->add_option("--notch_halfwidth_hz", a.cfg.hr.notch_halfwidth_hz)->capture_default_str();
  c->add_option("--max_peaks", a.cfg.hr.max_peaks)->capture_default_str();
  c->add_option("--min_prominence", a.cfg.hr.min_prominence)->capture_default_str();
  c->add_option("--grid_rows", a.cfg.grid_rows)->capture_default_str();
  c->add_option("--grid_cols", a.cfg.grid_cols)->capture_default_str();
  c->add_option("--diffuse_estimator", a.estimator, "bilateral | min_channel")->capture_default_str();
  c->add_option("--diffuse_convergence", a.cfg.diffuse.convergence)->capture_default_str();
  c->add_option("--diffuse_max_iterations", a.cfg.diffuse.max_iterations)->capture_default_str();
  c->add_flag("--smooth_bbox", a.cfg.smooth_bbox, "Exponentially smooth the face box over time");
  c->add_option("--bbox_alpha", a.cfg.bbox_alpha)->capture_default_str();
  c->add_option("--debug_dir", a.debug_dir, "Write weight maps and diffuse frames here");
}

void add_evaluate(CLI::App& app, EvaluateArgs& a) {
  auto* c = app.add_subcommand("evaluate", "Compare reports against ground truth by cohort");
  c->add_option("--manifest", a.manifest, "CSV: report,ground_truth,skin_tone,condition,viewpoint")->required();
  c->add_option("--out", a.out, "Cohort report (CSV)")->required();
  c->add_option("--plots_dir", a.plots_dir, "Write scatter and Bland-Altman data here");
}

void add_synth(CLI::App& app, SynthArgs& a) {
  auto* c = app.add_subcommand("synth", "Render a synthetic dataset from a scene file");
  c->add_option("--scene", a.scene, "Scene description (key = value)")->required();
  c->add_option("--out", a.out, "Output directory")->required();
  c->add_option("--seed", a.seed, "Override the scene seed");
  c->add_flag("--raw", a.raw, "Also write frames as a single raw stream (frames.raw)");
}

void add_biophys(CLI::App& app, BiophysArgs& a) {
  auto* c = app.add_subcommand("biophys", "Emit signal-strength and camera-SNR curves");
  c->add_option("--out", a.out, "Output directory")->required();
  c->add_option("--f_mel_min", a.sweep.f_mel_min)->capture_default_str();
  c->add_option("--f_mel_max", a.sweep.f_mel_max)->capture_default_str();
  c->add_option("--f_mel_steps", a.sweep.f_mel_steps)->capture_default_str();
  c->add_option("--pixel_min", a.sweep.pixel_min)->capture_default_str();
  c->add_option("--pixel_max", a.sweep.pixel_max)->capture_default_str();
  c->add_option("--pixel_steps", a.sweep.pixel_steps)->capture_default_str();
  c->add_option("--channel", a.channel, "red | green | blue")->capture_default_str();
  c->add_option("--gain", a.noise.gain)->capture_default_str();
  c->add_option("--sigma_r", a.noise.sigma_r)->capture_default_str();
  c->add_option("--sigma_q", a.noise.sigma_q)->capture_default_str();
}

void cmd_estimate(EstimateArgs& a, std::ostream& out) {
  a.cfg.method = parse_method(a.method);
  a.cfg.diffuse.estimator = parse_estimator(a.estimator);
  if (!a.debug_dir.empty()) a.cfg.debug_dir = a.debug_dir;
  a.cfg.validate();
  require_exists(a.frames, "frames");
  require_exists(a.landmarks, "landmarks");

  const FrameSequence seq = io::load_frame_sequence(a.frames);
  const LandmarkSidecar lms = io::load_landmarks(a.landmarks, seq.width(), seq.height(), seq.frame_count());
  const HrReport rep = run_pipeline(seq, lms, a.cfg);
  io::write_file_atomic(a.out, report_json(rep));
  out << "video_bpm " << rep.video_bpm << " (" << rep.windows.size() << " windows, " << to_string(a.cfg.method)
      << ")\n";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t\r"));
    cell.erase(cell.find_last_not_of(" \t\r") + 1);
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

void cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  require_exists(a.manifest, "manifest");
  const std::string text = io::read_file(a.manifest);
  const fs::path base = fs::path(a.manifest).parent_path();
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyFile, a.manifest);

  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* need : {"report", "ground_truth", "skin_tone", "condition", "viewpoint"}) {
    if (!col.count(need)) throw Error(ErrorCode::MalformedFile, a.manifest + ": header lacks column " + need);
  }
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

  std::vector<eval::EvalRecord> records;
  std::size_t row_no = 1, rows = 0;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++rows;
    try {
      const auto cells = split_csv_line(line);
      if (cells.size() != header.size()) {
        throw Error(ErrorCode::ManifestRowInvalid, "expected " + std::to_string(header.size()) + " fields");
      }
      eval::EvalRecord r;
      const ReportSummary rep = read_report(resolve(cells[col["report"]]));
      r.method = rep.method;
      r.est_bpm = rep.video_bpm;
      r.gt_bpm = io::load_ground_truth(resolve(cells[col["ground_truth"]])).mean_bpm();
      r.key.skin_tone = eval::parse_skin_tone(cells[col["skin_tone"]]);
      r.key.condition = eval::parse_condition(cells[col["condition"]]);
      r.key.viewpoint = eval::parse_viewpoint(cells[col["viewpoint"]]);
      records.push_back(std::move(r));
    } catch (const Error& e) {
      err << "warning: manifest row " << row_no << " skipped: " << e.what() << '\n';
    }
  }
  if (records.empty()) {
    throw Error(ErrorCode::ManifestRowInvalid, "all " + std::to_string(rows) + " manifest rows were skipped");
  }

  const auto rep = eval::cohort_report(records);
  io::write_file_atomic(a.out, eval::report_csv(rep));
  if (!a.plots_dir.empty()) {
    for (const auto& row : rep.rows) {
      std::vector<double> est, gt;
      for (const auto& r : records) {
        if (r.method != row.method) continue;
        est.push_back(r.est_bpm);
        gt.push_back(r.gt_bpm);
      }
      io::write_file_atomic(fs::path(a.plots_dir) / ("scatter_" + row.method + ".csv"), eval::scatter_csv(est, gt));
      io::write_file_atomic(fs::path(a.plots_dir) / ("bland_altman_" + row.method + ".csv"),
                            eval::bland_altman_csv(est, gt));
    }
  }
  out << "evaluated " << records.size() << " of " << rows << " rows\n";
}

void cmd_synth(const SynthArgs& a, std::ostream& out) {
  require_exists(a.scene, "scene");
  synth::SynthScene scene = synth::load_scene(a.scene);
  if (a.seed) scene.seed = *a.seed;
  const auto data = synth::render(scene);
  synth::write_dataset(data, scene, a.out);
  if (a.raw) io::write_raw_stream(data.frames, fs::path(a.out) / "frames.raw");
  out << "wrote " << data.frames.frame_count() << " frames to " << a.out << '\n';
}

void cmd_biophys(BiophysArgs& a, std::ostream& out) {
  if (a.channel == "red") {
    a.sweep.channel = bio::Channel::Red;
  } else if (a.channel == "green") {
    a.sweep.channel = bio::Channel::Green;
  } else if (a.channel == "blue") {
    a.sweep.channel = bio::Channel::Blue;
  } else {
    throw Error(ErrorCode::InvalidArgument, "channel must be red, green or blue");
  }
  a.sweep.validate();
  a.noise.validate();
  const auto curves = bio::figure5_curves(bio::SpectralContext::defaults(), a.noise, a.sweep);
  bio::emit_figure5_curves(curves, a.out);
  out << "wrote curves to " << a.out << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Remote photoplethysmography heart-rate toolkit", "rppg"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Config file; sections are subcommand names")->envname("RPPG_CONFIG");

  EstimateArgs est;
  EvaluateArgs eva;
  SynthArgs syn;
  BiophysArgs bio;
  add_estimate(app, est);
  add_evaluate(app, eva);
  add_synth(app, syn);
  add_biophys(app, bio);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::FileError& e) {
    err << "error: " << e.what() << '\n';
    return kExitMissingInput;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (app.got_subcommand("estimate")) {
      cmd_estimate(est, out);
    } else if (app.got_subcommand("evaluate")) {
      cmd_evaluate(eva, out, err);
    } else if (app.got_subcommand("synth")) {
      cmd_synth(syn, out);
    } else if (app.got_subcommand("biophys")) {
      cmd_biophys(bio, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.family());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitOutput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUnexpected;
  }
  return kExitOk;
}

}  // namespace rppg::cli
