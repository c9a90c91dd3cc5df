#include "fft.hpp"

#include <algorithm>
#include <mutex>

#include <fftw3.h>

namespace rppg::detail {

namespace {
// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex planner_mutex;
}  // namespace

std::vector<double> squared_magnitude_spectrum(std::span<const double> x, std::size_t nfft) {
  const std::size_t bins = nfft / 2 + 1;
  double* in = fftw_alloc_real(nfft);
  fftw_complex* out = fftw_alloc_complex(bins);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), in, out, FFTW_ESTIMATE);
  }
  const std::size_t n = std::min(x.size(), nfft);
  std::copy_n(x.begin(), n, in);
  std::fill(in + n, in + nfft, 0.0);
  fftw_execute(plan);
  std::vector<double> mag2(bins);
  for (std::size_t k = 0; k < bins; ++k) mag2[k] = out[k][0] * out[k][0] + out[k][1] * out[k][1];
  {
    std::lock_guard<std::mutex> lock(planner_mutex);
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return mag2;
}

}  // namespace rppg::detail
