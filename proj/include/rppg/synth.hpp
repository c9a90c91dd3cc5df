#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "rppg/biophysics.hpp"
#include "rppg/types.hpp"

namespace rppg::synth {

struct SpecularPatch {
  Rect rect;
  double strength = 60.0;  // intensity levels added to every channel
};

/// A uniform skin patch filmed by a noisy camera, pulsing at a known rate.
struct SynthScene {
  int width = 64;
  int height = 64;
  double fps = 30.0;
  double duration_s = 30.0;
  double hr_bpm = 72.0;
  bio::SkinParams skin{};
  double exposure = 450.0;  // pixel value per unit channel reflectance
  bool second_harmonic = false;  // adds a 25% second harmonic to the pulse
  std::optional<SpecularPatch> specular;
  std::optional<bio::CameraNoiseParams> noise = bio::CameraNoiseParams{};  // empty: only integer rounding
  int motion_px = 0;
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t frame_count() const;
};

struct SynthOutput {
  FrameSequence frames;
  LandmarkSidecar landmarks;
  GroundTruth truth;
};

/// Pulse shape in [-1.25, 1.25]: sin(2 pi f t) (+ 0.25 sin(4 pi f t)).
double pulse_shape(const SynthScene& scene, double t);

/// Noise-free per-channel pixel value at time t (before specular, rounding).
Rgb clean_pixel(const SynthScene& scene, const bio::SpectralContext& ctx, double t);

SynthOutput render(const SynthScene& scene);

/// Scene files are INI-style "key = value" text; unknown keys are rejected.
SynthScene parse_scene(std::string_view text);
SynthScene load_scene(const std::filesystem::path& file);
std::string scene_to_text(const SynthScene& scene);

/// Writes frames/ (frame directory), landmarks.jsonl, ppg.csv, hr.csv and scene.ini.
void write_dataset(const SynthOutput& out, const SynthScene& scene, const std::filesystem::path& dir);

/// Counter-based stream seed for frame `index`.
std::uint64_t frame_seed(std::uint64_t seed, std::uint64_t index);

namespace kernels {
namespace serial {
std::vector<Image> render_frames(const SynthScene& scene, std::span<const Rgb> clean);
}
namespace parallel {
std::vector<Image> render_frames(const SynthScene& scene, std::span<const Rgb> clean);
}
}  // namespace kernels

}  // namespace rppg::synth
