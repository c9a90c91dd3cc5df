#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace rppg::bio {

/// Two-layer skin: epidermis (melanin) over a semi-infinite dermis (blood).
struct SkinParams {
  double f_mel = 0.10;           // melanin volume fraction of the epidermis
  double f_blood = 0.05;         // blood volume fraction of the dermis
  double f_hg = 0.45;            // hemoglobin volume fraction of blood
  double delta_f_blood = 0.003;  // pulsatile swing of f_blood

  void validate() const;
};

enum class Channel { Red = 0, Green = 1, Blue = 2 };

/// Illuminant and camera sensitivities sampled on a uniform wavelength grid.
struct SpectralContext {
  std::vector<double> wavelengths;  // nm, uniform, within [400, 700]
  std::vector<double> illuminant;
  std::array<std::vector<double>, 3> sensitivity;  // R, G, B

  double step() const { return wavelengths.size() > 1 ? wavelengths[1] - wavelengths[0] : 0.0; }
  void validate() const;

  /// Flat illuminant; Gaussian sensitivities at 610/540/460 nm, sigma 35 nm.
  /// The 5 nm default is the coarsest step at which halving it moves M and N
  /// by under 0.5%.
  static SpectralContext defaults(double step_nm = 5.0);
};

struct CameraNoiseParams {
  double gain = 1.0;      // g
  double sigma_r = 1.5;   // read noise, electrons
  double sigma_q = 0.5;   // quantization noise, levels

  void validate() const;
};

inline constexpr double kMinWavelength = 400.0;
inline constexpr double kMaxWavelength = 700.0;

/// Absorption coefficients in 1/cm at wavelength nm.
double melanin_absorption(double nm);
double baseline_absorption(double nm);
double hemoglobin_absorption(double nm);  // packed red-cell hemoglobin at 75% saturation
double dermal_scattering(double nm);      // reduced scattering coefficient

/// Single-pass Beer-Lambert transmission of the epidermis.
double epidermal_transmission(const SkinParams& p, double nm);
/// Kubelka-Munk reflectance of the semi-infinite dermis.
double dermal_reflectance(const SkinParams& p, double nm);
/// R = T_ep^2 * R_d.
double skin_reflectance(const SkinParams& p, double nm);

/// dR/df_blood in closed form.
double reflectance_derivative(const SkinParams& p, double nm);
/// Central difference with step 1e-4 * f_blood.
double reflectance_derivative_fd(const SkinParams& p, double nm);

/// Sensitivity-weighted mean reflectance seen by a channel:
/// int E S_c R / int E S_c.
double channel_reflectance(const SkinParams& p, const SpectralContext& ctx, Channel c);

/// |M| with M = int E S_c (dR/df_blood * delta_f_blood) over the grid.
double signal_strength(const SkinParams& p, const SpectralContext& ctx, Channel c);

/// N = int E S_c L, with L = |dR/df_blood * delta_f_blood|^2 / |R|^2.
double sinr(const SkinParams& p, const SpectralContext& ctx, Channel c);

/// Per-pixel camera SNR: p / sqrt(p/g + (sigma_r/g)^2 + sigma_q^2).
double camera_snr(double pixel, const CameraNoiseParams& noise);

/// Trapezoidal rule on a uniform grid.
double trapezoid(std::span<const double> y, double step);

struct CurveTable {
  std::vector<std::pair<double, double>> rows;
};

struct Figure5Sweep {
  double f_mel_min = 0.02;
  double f_mel_max = 0.45;
  int f_mel_steps = 44;
  double pixel_min = 1.0;
  double pixel_max = 255.0;
  int pixel_steps = 255;
  Channel channel = Channel::Green;
  SkinParams base{};

  void validate() const;
};

struct Figure5Curves {
  CurveTable strength_vs_melanin;  // f_mel, M
  CurveTable snr_vs_pixel;         // pixel value, camera SNR
};

Figure5Curves figure5_curves(const SpectralContext& ctx, const CameraNoiseParams& noise, const Figure5Sweep& sweep);

/// Writes the two curves as two-column CSV files in `dir`.
void emit_figure5_curves(const Figure5Curves& curves, const std::filesystem::path& dir);

/// Reads "wavelength_nm,value" rows and resamples them linearly onto `grid`.
std::vector<double> load_spectrum_csv(const std::filesystem::path& file, std::span<const double> grid);

}  // namespace rppg::bio
