#include "rppg/biophysics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rppg/error.hpp"
#include "rppg/io.hpp"
#include "rppg/numeric.hpp"

namespace rppg::bio {

namespace {

// Molar extinction coefficients of hemoglobin, cm^-1/M, 400-700 nm in 10 nm
// steps (S. Prahl's compilation of Gratzer and Kollias data, OMLC).
constexpr std::array<double, 31> kOxyHemoglobin = {
    266232, 466816, 480360, 246072, 102580, 62816, 44480, 33209.2, 26629.2, 23684.4, 20932.8,
    20035.2, 24202.4, 39956.8, 53236, 43016, 32613.2, 44496, 50104, 14400.8, 3200, 1506,
    942, 610, 442, 368, 319.6, 294, 277.6, 276, 290};
constexpr std::array<double, 31> kDeoxyHemoglobin = {
    223296, 303956, 407560, 528600, 413280, 103292, 23388.8, 16156.4, 14550, 16684, 20035.2,
    25773.6, 31589.6, 39036.4, 46592, 53412, 53788, 45072, 37020, 28324.4, 14677.2, 9443.6,
    6509.6, 5148.8, 4345.2, 3750.12, 3226.56, 2795.12, 2407.92, 2051.96, 1794.28};

constexpr double kOxygenSaturation = 0.75;
constexpr double kCellHemoglobinGPerL = 334.0;  // mean corpuscular hemoglobin concentration
constexpr double kHemoglobinMolarMass = 64500.0;
constexpr double kEpidermisThicknessCm = 0.006;

void check_wavelength(double nm) {
  if (!(nm >= kMinWavelength - 1e-9 && nm <= kMaxWavelength + 1e-9)) {
    throw Error(ErrorCode::WavelengthOutOfRange, std::to_string(nm) + " nm outside [400, 700]");
  }
}

double table_lookup(const std::array<double, 31>& table, double nm) {
  const double u = std::clamp((nm - kMinWavelength) / 10.0, 0.0, 30.0);
  const auto i = static_cast<std::size_t>(std::min(std::floor(u), 29.0));
  const double t = u - static_cast<double>(i);
  return table[i] + t * (table[i + 1] - table[i]);
}

double dermal_absorption(const SkinParams& p, double nm) {
  return p.f_blood * p.f_hg * hemoglobin_absorption(nm) + (1.0 - p.f_blood) * baseline_absorption(nm);
}

double km_reflectance(double x) { return 1.0 + x - std::sqrt(x * x + 2.0 * x); }

template <typename F>
double integrate_channel(const SpectralContext& ctx, Channel c, F&& integrand) {
  const auto& s = ctx.sensitivity[static_cast<std::size_t>(c)];
  std::vector<double> y(ctx.wavelengths.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = ctx.illuminant[i] * s[i] * integrand(ctx.wavelengths[i]);
  return trapezoid(y, ctx.step());
}

}  // namespace

void SkinParams::validate() const {
  for (double f : {f_mel, f_blood, f_hg}) {
    if (!(f > 0.0 && f < 1.0)) throw Error(ErrorCode::InvalidArgument, "skin fractions must lie in (0, 1)");
  }
  if (!(delta_f_blood >= 0.0) || delta_f_blood > 0.1 * f_blood + 1e-15) {
    throw Error(ErrorCode::InvalidArgument, "delta_f_blood must lie in [0, 0.1 * f_blood]");
  }
}

void SpectralContext::validate() const {
  const std::size_t n = wavelengths.size();
  if (n < 2 || illuminant.size() != n) throw Error(ErrorCode::InvalidArgument, "spectral grids misaligned");
  for (const auto& s : sensitivity) {
    if (s.size() != n) throw Error(ErrorCode::InvalidArgument, "spectral grids misaligned");
    if (std::any_of(s.begin(), s.end(), [](double v) { return v < 0.0; })) {
      throw Error(ErrorCode::InvalidArgument, "negative sensitivity");
    }
  }
  if (std::any_of(illuminant.begin(), illuminant.end(), [](double v) { return v < 0.0; })) {
    throw Error(ErrorCode::InvalidArgument, "negative illuminant");
  }
  const double h = step();
  for (std::size_t i = 0; i < n; ++i) {
    check_wavelength(wavelengths[i]);
    if (i > 0 && std::abs(wavelengths[i] - wavelengths[i - 1] - h) > 1e-9 * h) {
      throw Error(ErrorCode::InvalidArgument, "wavelength grid must be uniform");
    }
  }
}

SpectralContext SpectralContext::defaults(double step_nm) {
  SpectralContext ctx;
  const auto n = static_cast<std::size_t>(std::llround((kMaxWavelength - kMinWavelength) / step_nm)) + 1;
  const std::array<double, 3> centers = {610.0, 540.0, 460.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double nm = kMinWavelength + static_cast<double>(i) * step_nm;
    ctx.wavelengths.push_back(nm);
    ctx.illuminant.push_back(1.0);
    for (std::size_t c = 0; c < 3; ++c) {
      const double z = (nm - centers[c]) / 35.0;
      ctx.sensitivity[c].push_back(std::exp(-0.5 * z * z));
    }
  }
  return ctx;
}

void CameraNoiseParams::validate() const {
  if (!(gain > 0.0) || !(sigma_r >= 0.0) || !(sigma_q >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "camera noise needs gain > 0 and sigmas >= 0");
  }
}

// Jacques' power laws for the melanosome interior and bloodless tissue.
double melanin_absorption(double nm) { return 6.6e11 * std::pow(nm, -3.33); }
double baseline_absorption(double nm) { return 7.84e8 * std::pow(nm, -3.255); }

double hemoglobin_absorption(double nm) {
  const double eps = kOxygenSaturation * table_lookup(kOxyHemoglobin, nm) +
                     (1.0 - kOxygenSaturation) * table_lookup(kDeoxyHemoglobin, nm);
  return std::log(10.0) * kCellHemoglobinGPerL / kHemoglobinMolarMass * eps;
}

double dermal_scattering(double nm) { return 2e5 * std::pow(nm, -1.5) + 2e12 * std::pow(nm, -4.0); }

double epidermal_transmission(const SkinParams& p, double nm) {
  check_wavelength(nm);
  const double mu = p.f_mel * melanin_absorption(nm) + (1.0 - p.f_mel) * baseline_absorption(nm);
  return std::exp(-mu * kEpidermisThicknessCm);
}

double dermal_reflectance(const SkinParams& p, double nm) {
  check_wavelength(nm);
  return km_reflectance(dermal_absorption(p, nm) / dermal_scattering(nm));
}

double skin_reflectance(const SkinParams& p, double nm) {
  const double t = epidermal_transmission(p, nm);
  return t * t * dermal_reflectance(p, nm);
}

double reflectance_derivative(const SkinParams& p, double nm) {
  const double t = epidermal_transmission(p, nm);
  const double s = dermal_scattering(nm);
  const double x = dermal_absorption(p, nm) / s;
  const double dx = (p.f_hg * hemoglobin_absorption(nm) - baseline_absorption(nm)) / s;
  const double drd = 1.0 - (x + 1.0) / std::sqrt(x * x + 2.0 * x);
  return t * t * drd * dx;
}

double reflectance_derivative_fd(const SkinParams& p, double nm) {
  const double h = 1e-4 * p.f_blood;
  SkinParams up = p, down = p;
  up.f_blood += h;
  down.f_blood -= h;
  return (skin_reflectance(up, nm) - skin_reflectance(down, nm)) / (2.0 * h);
}

double trapezoid(std::span<const double> y, double step) {
  if (y.size() < 2) return 0.0;
  CompensatedSum acc;
  acc.add(0.5 * y.front());
  for (std::size_t i = 1; i + 1 < y.size(); ++i) acc.add(y[i]);
  acc.add(0.5 * y.back());
  return acc.value() * step;
}

double channel_reflectance(const SkinParams& p, const SpectralContext& ctx, Channel c) {
  const double num = integrate_channel(ctx, c, [&](double nm) { return skin_reflectance(p, nm); });
  const double den = integrate_channel(ctx, c, [](double) { return 1.0; });
  return den > 0.0 ? num / den : 0.0;
}

double signal_strength(const SkinParams& p, const SpectralContext& ctx, Channel c) {
  return std::abs(
      integrate_channel(ctx, c, [&](double nm) { return reflectance_derivative(p, nm) * p.delta_f_blood; }));
}

double sinr(const SkinParams& p, const SpectralContext& ctx, Channel c) {
  return integrate_channel(ctx, c, [&](double nm) {
    const double r = skin_reflectance(p, nm);
    if (!(r >= 1e-9)) throw Error(ErrorCode::DegenerateReflectance, "reflectance below 1e-9 at " + std::to_string(nm));
    const double s = reflectance_derivative(p, nm) * p.delta_f_blood;
    return (s * s) / (r * r);
  });
}

double camera_snr(double pixel, const CameraNoiseParams& noise) {
  if (!(pixel >= 0.0)) throw Error(ErrorCode::InvalidArgument, "pixel value must be >= 0");
  noise.validate();
  const double read = noise.sigma_r / noise.gain;
  const double var = pixel / noise.gain + read * read + noise.sigma_q * noise.sigma_q;
  if (var <= 0.0) throw Error(ErrorCode::ZeroDenominator, "no noise and zero pixel value");
  return pixel / std::sqrt(var);
}

void Figure5Sweep::validate() const {
  if (f_mel_steps < 1 || pixel_steps < 1 || !(f_mel_max >= f_mel_min) || !(pixel_max >= pixel_min) ||
      (f_mel_steps > 1 && !(f_mel_max > f_mel_min)) || (pixel_steps > 1 && !(pixel_max > pixel_min)) ||
      !(f_mel_min > 0.0) || !(f_mel_max < 1.0) || !(pixel_min >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "empty or invalid sweep range");
  }
}

Figure5Curves figure5_curves(const SpectralContext& ctx, const CameraNoiseParams& noise, const Figure5Sweep& sweep) {
  sweep.validate();
  ctx.validate();
  Figure5Curves out;
  auto lerp = [](double a, double b, int i, int n) { return n == 1 ? a : a + (b - a) * i / (n - 1); };
  for (int i = 0; i < sweep.f_mel_steps; ++i) {
    SkinParams p = sweep.base;
    p.f_mel = lerp(sweep.f_mel_min, sweep.f_mel_max, i, sweep.f_mel_steps);
    out.strength_vs_melanin.rows.emplace_back(p.f_mel, signal_strength(p, ctx, sweep.channel));
  }
  for (int i = 0; i < sweep.pixel_steps; ++i) {
    const double px = lerp(sweep.pixel_min, sweep.pixel_max, i, sweep.pixel_steps);
    out.snr_vs_pixel.rows.emplace_back(px, camera_snr(px, noise));
  }
  return out;
}

void emit_figure5_curves(const Figure5Curves& curves, const std::filesystem::path& dir) {
  auto table_csv = [](const CurveTable& t, const char* header) {
    std::ostringstream ss;
    ss.precision(17);
    ss << header << '\n';
    for (const auto& [x, y] : t.rows) ss << x << ',' << y << '\n';
    return ss.str();
  };
  io::write_file_atomic(dir / "signal_strength_vs_melanin.csv", table_csv(curves.strength_vs_melanin, "f_mel,signal_strength"));
  io::write_file_atomic(dir / "camera_snr_vs_pixel.csv", table_csv(curves.snr_vs_pixel, "pixel_value,snr"));
}

std::vector<double> load_spectrum_csv(const std::filesystem::path& file, std::span<const double> grid) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::MissingInput, file.string());
  TimeSeries pts;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.rfind("wavelength", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::MalformedFile, file.string() + ": " + line);
    try {
      pts.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::MalformedFile, file.string() + ": " + line);
    }
  }
  if (pts.empty()) throw Error(ErrorCode::EmptyFile, file.string());
  for (std::size_t k = 1; k < pts.size(); ++k) {
    if (!(pts[k].time_s > pts[k - 1].time_s)) throw Error(ErrorCode::NonMonotoneTime, file.string());
  }
  auto out = io::interpolate_linear(pts, grid);
  if (std::any_of(out.begin(), out.end(), [](double v) { return v < 0.0; })) {
    throw Error(ErrorCode::MalformedFile, file.string() + ": negative spectrum value");
  }
  return out;
}

}  // namespace rppg::bio
