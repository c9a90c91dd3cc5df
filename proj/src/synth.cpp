#include "rppg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>

#include "rppg/error.hpp"
#include "rppg/io.hpp"

namespace rppg::synth {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint8_t to_level(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

// Per-frame noise source: the clean value of a pixel is one of at most six
// levels (three channels, with or without the specular layer), so the
// Poisson distributions are built once per frame.
class FrameNoise {
 public:
  FrameNoise(const bio::CameraNoiseParams& n, std::span<const double> levels) : gain_(n.gain), read_(0.0, n.sigma_r) {
    for (double p : levels) shot_.emplace_back(std::max(p * n.gain, 1e-300));
    use_read_ = n.sigma_r > 0.0;
  }

  // Shot noise in electrons plus read noise in electrons, referred back to levels.
  double sample(std::size_t level, double p, std::mt19937_64& rng) {
    const double electrons = p > 0.0 ? static_cast<double>(shot_[level](rng)) : 0.0;
    const double read = use_read_ ? read_(rng) : 0.0;
    return (electrons + read) / gain_;
  }

 private:
  double gain_;
  std::vector<std::poisson_distribution<long long>> shot_;
  std::normal_distribution<double> read_;
  bool use_read_ = false;
};

Image render_one(const SynthScene& scene, const Rgb& clean, std::size_t index) {
  Image img(scene.width, scene.height);
  std::mt19937_64 rng(frame_seed(scene.seed, index));
  const double strength = scene.specular ? scene.specular->strength : 0.0;
  const double levels[6] = {clean.r,
                            clean.g,
                            clean.b,
                            std::min(clean.r + strength, 255.0),
                            std::min(clean.g + strength, 255.0),
                            std::min(clean.b + strength, 255.0)};
  std::optional<FrameNoise> noise;
  if (scene.noise) noise.emplace(*scene.noise, levels);
  for (int y = 0; y < scene.height; ++y) {
    for (int x = 0; x < scene.width; ++x) {
      const std::size_t off = scene.specular && scene.specular->rect.contains(x, y) ? 3 : 0;
      std::uint8_t* px = img.at(x, y);
      for (std::size_t c = 0; c < 3; ++c) {
        const double p = levels[off + c];
        px[c] = to_level(noise ? noise->sample(off + c, p, rng) : p);
      }
    }
  }
  return img;
}

std::vector<Rect> jittered_bboxes(const SynthScene& scene) {
  const std::size_t n = scene.frame_count();
  std::vector<Rect> out(n, Rect{0, 0, scene.width, scene.height});
  const int a = scene.motion_px;
  if (a <= 0) return out;
  std::mt19937_64 rng(splitmix64(scene.seed ^ 0x6D6F74696F6Eull));
  std::uniform_int_distribution<int> jitter(-a, a);
  for (auto& r : out) {
    r = Rect{a + jitter(rng), a + jitter(rng), scene.width - 2 * a, scene.height - 2 * a};
  }
  return out;
}

}  // namespace

std::uint64_t frame_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x5851F42D4C957F2Dull));
}

void SynthScene::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidScene, m); };
  if (width < 1 || height < 1) fail("frame size must be positive");
  if (!(fps > 0.0) || !std::isfinite(fps)) fail("fps must be positive");
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) fail("duration_s must be positive");
  if (!(hr_bpm >= 42.0 && hr_bpm <= 210.0)) fail("hr_bpm outside [42, 210]");
  if (!(exposure > 0.0)) fail("exposure must be positive");
  if (motion_px < 0 || 2 * motion_px >= std::min(width, height)) fail("motion_px too large for the frame");
  if (specular) {
    const Rect& r = specular->rect;
    if (r.w < 1 || r.h < 1 || r.x < 0 || r.y < 0 || r.x + r.w > width || r.y + r.h > height) {
      fail("specular rect outside the frame");
    }
    if (!(specular->strength >= 0.0)) fail("specular strength must be non-negative");
  }
  try {
    skin.validate();
    if (noise) noise->validate();
  } catch (const Error& e) {
    fail(e.what());
  }
}

std::size_t SynthScene::frame_count() const {
  return static_cast<std::size_t>(std::floor(duration_s * fps + 1e-9));
}

double pulse_shape(const SynthScene& scene, double t) {
  const double w = 2.0 * std::numbers::pi * scene.hr_bpm / 60.0;
  double s = std::sin(w * t);
  if (scene.second_harmonic) s += 0.25 * std::sin(2.0 * w * t);
  return s;
}

Rgb clean_pixel(const SynthScene& scene, const bio::SpectralContext& ctx, double t) {
  bio::SkinParams p = scene.skin;
  p.f_blood = scene.skin.f_blood + scene.skin.delta_f_blood * pulse_shape(scene, t);
  return {scene.exposure * bio::channel_reflectance(p, ctx, bio::Channel::Red),
          scene.exposure * bio::channel_reflectance(p, ctx, bio::Channel::Green),
          scene.exposure * bio::channel_reflectance(p, ctx, bio::Channel::Blue)};
}

namespace kernels {
namespace serial {
std::vector<Image> render_frames(const SynthScene& scene, std::span<const Rgb> clean) {
  std::vector<Image> out(clean.size());
  for (std::size_t k = 0; k < clean.size(); ++k) out[k] = render_one(scene, clean[k], k);
  return out;
}
}  // namespace serial

namespace parallel {
std::vector<Image> render_frames(const SynthScene& scene, std::span<const Rgb> clean) {
  std::vector<Image> out(clean.size());
  const long long n = static_cast<long long>(clean.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (long long k = 0; k < n; ++k) {
    out[k] = render_one(scene, clean[k], static_cast<std::size_t>(k));
  }
  return out;
}
}  // namespace parallel
}  // namespace kernels

SynthOutput render(const SynthScene& scene) {
  scene.validate();
  const auto ctx = bio::SpectralContext::defaults();
  const std::size_t n = scene.frame_count();
  if (n == 0) throw Error(ErrorCode::InvalidScene, "scene has no frames");

  std::vector<Rgb> clean(n);
  SynthOutput out;
  out.truth.ppg_samples.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / scene.fps;
    clean[k] = clean_pixel(scene, ctx, t);
    out.truth.ppg_samples[k] = {t, scene.skin.f_blood + scene.skin.delta_f_blood * pulse_shape(scene, t)};
  }
  const auto boxes = jittered_bboxes(scene);

  out.frames.fps = scene.fps;
  out.frames.frames = kernels::parallel::render_frames(scene, clean);

  out.landmarks.per_frame.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.landmarks.per_frame[k].frame = static_cast<int>(k);
    out.landmarks.per_frame[k].face_bbox = boxes[k];
  }
  const auto seconds = static_cast<std::size_t>(std::floor(static_cast<double>(n) / scene.fps));
  for (std::size_t s = 0; s <= seconds; ++s) out.truth.hr_numerics.push_back({static_cast<double>(s), scene.hr_bpm});
  return out;
}

SynthScene parse_scene(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const CLI::Error& e) {
    throw Error(ErrorCode::InvalidScene, e.what());
  }

  SynthScene s;
  SpecularPatch spec;
  bool has_spec = false;
  bio::CameraNoiseParams noise;
  bool noise_on = true;

  auto num = [](const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidScene, key + ": not a number: " + v);
    }
  };
  auto integer = [&](const std::string& key, const std::string& v) {
    const double d = num(key, v);
    if (d != std::floor(d)) throw Error(ErrorCode::InvalidScene, key + ": not an integer: " + v);
    return static_cast<long long>(d);
  };
  auto boolean = [](const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw Error(ErrorCode::InvalidScene, key + ": not a boolean: " + v);
  };

  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"width", [&](auto& k, auto& v) { s.width = static_cast<int>(integer(k, v)); }},
      {"height", [&](auto& k, auto& v) { s.height = static_cast<int>(integer(k, v)); }},
      {"fps", [&](auto& k, auto& v) { s.fps = num(k, v); }},
      {"duration_s", [&](auto& k, auto& v) { s.duration_s = num(k, v); }},
      {"hr_bpm", [&](auto& k, auto& v) { s.hr_bpm = num(k, v); }},
      {"exposure", [&](auto& k, auto& v) { s.exposure = num(k, v); }},
      {"second_harmonic", [&](auto& k, auto& v) { s.second_harmonic = boolean(k, v); }},
      {"motion_px", [&](auto& k, auto& v) { s.motion_px = static_cast<int>(integer(k, v)); }},
      {"seed", [&](auto& k, auto& v) {
         std::size_t used = 0;
         try {
           if (v.empty() || v.front() == '-') throw std::invalid_argument(v);
           s.seed = std::stoull(v, &used);
         } catch (const std::exception&) {
           used = 0;
         }
         if (used == 0 || used != v.size()) throw Error(ErrorCode::InvalidScene, k + ": not a seed: " + v);
       }},
      {"skin.f_mel", [&](auto& k, auto& v) { s.skin.f_mel = num(k, v); }},
      {"skin.f_blood", [&](auto& k, auto& v) { s.skin.f_blood = num(k, v); }},
      {"skin.f_hg", [&](auto& k, auto& v) { s.skin.f_hg = num(k, v); }},
      {"skin.delta_f_blood", [&](auto& k, auto& v) { s.skin.delta_f_blood = num(k, v); }},
      {"specular.x", [&](auto& k, auto& v) { spec.rect.x = static_cast<int>(integer(k, v)); has_spec = true; }},
      {"specular.y", [&](auto& k, auto& v) { spec.rect.y = static_cast<int>(integer(k, v)); has_spec = true; }},
      {"specular.w", [&](auto& k, auto& v) { spec.rect.w = static_cast<int>(integer(k, v)); has_spec = true; }},
      {"specular.h", [&](auto& k, auto& v) { spec.rect.h = static_cast<int>(integer(k, v)); has_spec = true; }},
      {"specular.strength", [&](auto& k, auto& v) { spec.strength = num(k, v); has_spec = true; }},
      {"noise.enabled", [&](auto& k, auto& v) { noise_on = boolean(k, v); }},
      {"noise.gain", [&](auto& k, auto& v) { noise.gain = num(k, v); }},
      {"noise.sigma_r", [&](auto& k, auto& v) { noise.sigma_r = num(k, v); }},
      {"noise.sigma_q", [&](auto& k, auto& v) { noise.sigma_q = num(k, v); }},
  };

  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    const std::string key = item.fullname();
    const auto it = setters.find(key);
    if (it == setters.end()) throw Error(ErrorCode::InvalidScene, "unknown key: " + key);
    if (item.inputs.size() != 1) throw Error(ErrorCode::InvalidScene, key + ": expected one value");
    it->second(key, item.inputs.front());
  }
  if (has_spec) s.specular = spec;
  s.noise = noise_on ? std::optional(noise) : std::nullopt;
  s.validate();
  return s;
}

SynthScene load_scene(const std::filesystem::path& file) {
  return parse_scene(io::read_file(file));
}

std::string scene_to_text(const SynthScene& s) {
  std::ostringstream o;
  o << std::setprecision(17);
  o << "width = " << s.width << "\nheight = " << s.height << "\nfps = " << s.fps << "\nduration_s = " << s.duration_s
    << "\nhr_bpm = " << s.hr_bpm << "\nexposure = " << s.exposure
    << "\nsecond_harmonic = " << (s.second_harmonic ? "true" : "false") << "\nmotion_px = " << s.motion_px
    << "\nseed = " << s.seed << "\n";
  o << "\n[skin]\nf_mel = " << s.skin.f_mel << "\nf_blood = " << s.skin.f_blood << "\nf_hg = " << s.skin.f_hg
    << "\ndelta_f_blood = " << s.skin.delta_f_blood << "\n";
  if (s.specular) {
    const auto& r = s.specular->rect;
    o << "\n[specular]\nx = " << r.x << "\ny = " << r.y << "\nw = " << r.w << "\nh = " << r.h
      << "\nstrength = " << s.specular->strength << "\n";
  }
  o << "\n[noise]\nenabled = " << (s.noise ? "true" : "false") << "\n";
  if (s.noise) {
    o << "gain = " << s.noise->gain << "\nsigma_r = " << s.noise->sigma_r << "\nsigma_q = " << s.noise->sigma_q << "\n";
  }
  return o.str();
}

void write_dataset(const SynthOutput& out, const SynthScene& scene, const std::filesystem::path& dir) {
  io::write_frame_directory(out.frames, dir / "frames");
  io::write_landmarks(out.landmarks, dir / "landmarks.jsonl");
  io::write_signal_csv(out.truth.ppg_samples, dir / "ppg.csv");
  io::write_signal_csv(out.truth.hr_numerics, dir / "hr.csv");
  io::write_file_atomic(dir / "scene.ini", scene_to_text(scene));
}

}  // namespace rppg::synth
