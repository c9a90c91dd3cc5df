#include "rppg/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "rppg/error.hpp"
#include "rppg/numeric.hpp"

namespace rppg {

double GroundTruth::mean_bpm() const {
  std::vector<double> v;
  v.reserve(hr_numerics.size());
  for (const auto& s : hr_numerics) v.push_back(s.value);
  return mean(v);
}

namespace io {

using json = nlohmann::json;

namespace {

std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void check_fps(double fps) {
  if (!(fps > 0.0) || !std::isfinite(fps)) {
    throw Error(ErrorCode::NonPositiveFps, "fps must be > 0, got " + std::to_string(fps));
  }
}

void check_dimensions(const FrameSequence& seq) {
  if (seq.frames.empty()) throw Error(ErrorCode::MalformedFile, "sequence has no frames");
  const auto& f0 = seq.frames.front();
  for (std::size_t k = 1; k < seq.frames.size(); ++k) {
    const auto& f = seq.frames[k];
    if (f.width != f0.width || f.height != f0.height) {
      throw Error(ErrorCode::DimensionMismatch, "frame " + std::to_string(k) + " is " +
                                                    std::to_string(f.width) + "x" + std::to_string(f.height) +
                                                    ", frame 0 is " + std::to_string(f0.width) + "x" +
                                                    std::to_string(f0.height));
    }
  }
}

FrameSequence load_raw_stream(const fs::path& file) {
  std::string bytes = read_file(file);
  if (bytes.size() < kRawHeaderBytes || std::string_view(bytes).substr(0, 8) != kRawMagic) {
    throw Error(ErrorCode::MalformedFile, file.string() + ": missing RPPGRAW1 header");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t w = read_u32_le(p + 8);
  const std::uint32_t h = read_u32_le(p + 12);
  const std::uint32_t n = read_u32_le(p + 16);
  const std::uint32_t fps_mhz = read_u32_le(p + 20);
  check_fps(fps_mhz / 1000.0);
  const std::size_t frame_bytes = static_cast<std::size_t>(w) * h * 3;
  if (w == 0 || h == 0 || n == 0) throw Error(ErrorCode::MalformedFile, "raw stream with empty geometry");
  if (bytes.size() != kRawHeaderBytes + frame_bytes * n) {
    throw Error(ErrorCode::MalformedFile, "raw stream payload is " + std::to_string(bytes.size() - kRawHeaderBytes) +
                                              " bytes, expected " + std::to_string(frame_bytes * n));
  }
  FrameSequence seq;
  seq.fps = fps_mhz / 1000.0;
  seq.frames.reserve(n);
  for (std::uint32_t k = 0; k < n; ++k) {
    Image img(static_cast<int>(w), static_cast<int>(h));
    std::memcpy(img.rgb.data(), bytes.data() + kRawHeaderBytes + frame_bytes * k, frame_bytes);
    seq.frames.push_back(std::move(img));
  }
  return seq;
}

FrameSequence load_frame_directory(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw Error(ErrorCode::MissingManifest, manifest_path.string());
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedFile, manifest_path.string() + ": " + e.what());
  }
  if (!manifest.contains("fps") || !manifest.contains("count")) {
    throw Error(ErrorCode::MalformedFile, manifest_path.string() + ": needs fps and count");
  }
  const double fps = manifest["fps"].get<double>();
  check_fps(fps);
  const auto count = manifest["count"].get<std::size_t>();
  if (count == 0) throw Error(ErrorCode::MalformedFile, "manifest count is 0");

  FrameSequence seq;
  seq.fps = fps;
  seq.frames.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const fs::path f = dir / frame_file_name(k);
    if (!fs::exists(f)) throw Error(ErrorCode::MissingInput, f.string());
    seq.frames.push_back(read_ppm(f));
  }
  check_dimensions(seq);
  if (manifest.contains("width") && manifest.contains("height")) {
    const int w = manifest["width"].get<int>();
    const int h = manifest["height"].get<int>();
    if (w != seq.width() || h != seq.height()) {
      throw Error(ErrorCode::DimensionMismatch, "manifest declares " + std::to_string(w) + "x" + std::to_string(h));
    }
  }
  return seq;
}

// Skips whitespace and '#' comments between PPM header tokens.
long read_ppm_token(const std::string& s, std::size_t& pos) {
  for (;;) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos < s.size() && s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  const std::size_t start = pos;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
  if (start == pos) throw Error(ErrorCode::MalformedFile, "bad PPM header");
  return std::stol(s.substr(start, pos - start));
}

void check_polygon(const Polygon& poly, const Rect& bbox, std::size_t frame, const char* what) {
  if (poly.empty()) return;
  if (poly.size() < 3) {
    throw Error(ErrorCode::MalformedPolygon,
                std::string(what) + " polygon in frame " + std::to_string(frame) + " has < 3 vertices");
  }
  for (const auto& v : poly) {
    if (v.x < bbox.x || v.x > bbox.x + bbox.w || v.y < bbox.y || v.y > bbox.y + bbox.h) {
      throw Error(ErrorCode::OutOfBounds, std::string(what) + " vertex (" + std::to_string(v.x) + "," +
                                              std::to_string(v.y) + ") outside bbox in frame " +
                                              std::to_string(frame));
    }
  }
}

Polygon parse_polygon(const json& j) {
  Polygon poly;
  for (const auto& v : j) {
    if (!v.is_array() || v.size() != 2) throw Error(ErrorCode::MalformedPolygon, "vertex must be [x,y]");
    poly.push_back({v[0].get<int>(), v[1].get<int>()});
  }
  return poly;
}

json polygon_json(const Polygon& poly) {
  json arr = json::array();
  for (const auto& v : poly) arr.push_back({v.x, v.y});
  return arr;
}

}  // namespace

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingInput, file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& file, std::string_view content) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  fs::path tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::WriteFailed, tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::WriteFailed, tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, file, ec);
  if (ec) throw Error(ErrorCode::WriteFailed, file.string() + ": " + ec.message());
}

std::string frame_file_name(std::size_t index) {
  std::ostringstream ss;
  ss << "frame_" << std::setw(6) << std::setfill('0') << index << ".ppm";
  return ss.str();
}

FrameSequence load_frame_sequence(const fs::path& locator) {
  if (fs::is_directory(locator)) return load_frame_directory(locator);
  if (!fs::exists(locator)) throw Error(ErrorCode::MissingInput, locator.string());
  return load_raw_stream(locator);
}

Image read_ppm(const fs::path& file) {
  const std::string s = read_file(file);
  if (s.size() < 2 || s[0] != 'P' || s[1] != '6') throw Error(ErrorCode::MalformedFile, file.string() + ": not P6");
  std::size_t pos = 2;
  const long w = read_ppm_token(s, pos);
  const long h = read_ppm_token(s, pos);
  const long maxval = read_ppm_token(s, pos);
  if (maxval != 255 || w <= 0 || h <= 0) throw Error(ErrorCode::MalformedFile, file.string() + ": unsupported PPM");
  ++pos;  // single whitespace after maxval
  Image img(static_cast<int>(w), static_cast<int>(h));
  if (s.size() < pos + img.rgb.size()) throw Error(ErrorCode::MalformedFile, file.string() + ": truncated");
  std::memcpy(img.rgb.data(), s.data() + pos, img.rgb.size());
  return img;
}

void write_ppm(const Image& img, const fs::path& file) {
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.rgb.data()), img.rgb.size());
  write_file_atomic(file, out);
}

void write_frame_directory(const FrameSequence& seq, const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t k = 0; k < seq.frames.size(); ++k) write_ppm(seq.frames[k], dir / frame_file_name(k));
  json manifest = {{"fps", seq.fps}, {"width", seq.width()}, {"height", seq.height()}, {"count", seq.frame_count()}};
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

void write_raw_stream(const FrameSequence& seq, const fs::path& file) {
  check_dimensions(seq);
  std::string out(kRawMagic);
  write_u32_le(out, static_cast<std::uint32_t>(seq.width()));
  write_u32_le(out, static_cast<std::uint32_t>(seq.height()));
  write_u32_le(out, static_cast<std::uint32_t>(seq.frame_count()));
  write_u32_le(out, static_cast<std::uint32_t>(std::llround(seq.fps * 1000.0)));
  for (const auto& f : seq.frames) out.append(reinterpret_cast<const char*>(f.rgb.data()), f.rgb.size());
  write_file_atomic(file, out);
}

void validate_landmarks(const LandmarkSidecar& lms, int width, int height, std::size_t frame_count) {
  if (lms.per_frame.size() != frame_count) {
    throw Error(ErrorCode::CountMismatch, std::to_string(lms.per_frame.size()) + " landmark records for " +
                                              std::to_string(frame_count) + " frames");
  }
  for (std::size_t k = 0; k < lms.per_frame.size(); ++k) {
    const auto& rec = lms.per_frame[k];
    if (rec.frame != static_cast<int>(k)) {
      throw Error(ErrorCode::CountMismatch, "record " + std::to_string(k) + " names frame " + std::to_string(rec.frame));
    }
    const Rect& b = rec.face_bbox;
    if (b.w < 0 || b.h < 0 || b.x < 0 || b.y < 0 || b.x + b.w > width || b.y + b.h > height) {
      throw Error(ErrorCode::OutOfBounds, "bbox outside frame in frame " + std::to_string(k));
    }
    check_polygon(rec.eyes[0], b, k, "eye");
    check_polygon(rec.eyes[1], b, k, "eye");
    check_polygon(rec.mouth, b, k, "mouth");
  }
}

LandmarkSidecar load_landmarks(const fs::path& file, int width, int height, std::size_t frame_count) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::MissingInput, file.string());
  LandmarkSidecar lms;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      LandmarkRecord rec;
      rec.frame = j.at("frame").get<int>();
      const auto& bb = j.at("bbox");
      if (!bb.is_array() || bb.size() != 4) throw Error(ErrorCode::MalformedFile, "bbox must be [x,y,w,h]");
      rec.face_bbox = {bb[0].get<int>(), bb[1].get<int>(), bb[2].get<int>(), bb[3].get<int>()};
      const auto& eyes = j.at("eyes");
      if (!eyes.is_array() || eyes.size() != 2) throw Error(ErrorCode::MalformedFile, "eyes must hold 2 polygons");
      rec.eyes[0] = parse_polygon(eyes[0]);
      rec.eyes[1] = parse_polygon(eyes[1]);
      rec.mouth = parse_polygon(j.at("mouth"));
      lms.per_frame.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedFile, file.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  std::stable_sort(lms.per_frame.begin(), lms.per_frame.end(),
                   [](const LandmarkRecord& a, const LandmarkRecord& b) { return a.frame < b.frame; });
  validate_landmarks(lms, width, height, frame_count);
  return lms;
}

void write_landmarks(const LandmarkSidecar& lms, const fs::path& file) {
  std::string out;
  for (const auto& rec : lms.per_frame) {
    json j;
    j["frame"] = rec.frame;
    j["bbox"] = {rec.face_bbox.x, rec.face_bbox.y, rec.face_bbox.w, rec.face_bbox.h};
    j["eyes"] = {polygon_json(rec.eyes[0]), polygon_json(rec.eyes[1])};
    j["mouth"] = polygon_json(rec.mouth);
    out += j.dump();
    out += '\n';
  }
  write_file_atomic(file, out);
}

TimeSeries load_signal_csv(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::MissingInput, file.string());
  TimeSeries series;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (lineno == 1 && line.rfind("time_s", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::MalformedFile, file.string() + ":" + std::to_string(lineno));
    try {
      std::size_t used = 0;
      const double t = std::stod(line.substr(0, comma));
      const std::string rest = line.substr(comma + 1);
      const double v = std::stod(rest, &used);
      if (rest.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("trailing");
      series.push_back({t, v});
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::MalformedFile, file.string() + ":" + std::to_string(lineno) + ": not numeric");
    }
  }
  if (series.empty()) throw Error(ErrorCode::EmptyFile, file.string());
  for (std::size_t k = 1; k < series.size(); ++k) {
    if (!(series[k].time_s > series[k - 1].time_s)) {
      throw Error(ErrorCode::NonMonotoneTime, file.string() + ": row " + std::to_string(k + 1));
    }
  }
  return series;
}

void write_signal_csv(const TimeSeries& series, const fs::path& file) {
  std::ostringstream ss;
  ss << "time_s,value\n" << std::setprecision(17);
  for (const auto& s : series) ss << s.time_s << ',' << s.value << '\n';
  write_file_atomic(file, ss.str());
}

GroundTruth load_ground_truth(const fs::path& hr_file, const std::optional<fs::path>& ppg_file) {
  GroundTruth gt;
  gt.hr_numerics = load_signal_csv(hr_file);
  for (const auto& s : gt.hr_numerics) {
    if (s.value < 30.0 || s.value > 240.0) {
      throw Error(ErrorCode::OutOfBounds, hr_file.string() + ": bpm " + std::to_string(s.value) + " outside [30, 240]");
    }
  }
  if (ppg_file) gt.ppg_samples = load_signal_csv(*ppg_file);
  return gt;
}

std::vector<double> interpolate_linear(const TimeSeries& series, std::span<const double> at) {
  std::vector<double> out(at.size(), 0.0);
  if (series.empty()) return out;
  std::size_t j = 0;
  for (std::size_t k = 0; k < at.size(); ++k) {
    const double t = at[k];
    if (t <= series.front().time_s) {
      out[k] = series.front().value;
    } else if (t >= series.back().time_s) {
      out[k] = series.back().value;
    } else {
      if (k > 0 && t < at[k - 1]) j = 0;
      while (series[j + 1].time_s < t) ++j;
      const auto& a = series[j];
      const auto& b = series[j + 1];
      out[k] = a.value + (t - a.time_s) / (b.time_s - a.time_s) * (b.value - a.value);
    }
  }
  return out;
}

std::vector<double> resample_linear(const TimeSeries& series, double fs, double t0, std::size_t n) {
  std::vector<double> grid(n);
  for (std::size_t k = 0; k < n; ++k) grid[k] = t0 + static_cast<double>(k) / fs;
  return interpolate_linear(series, grid);
}

}  // namespace io
}  // namespace rppg
