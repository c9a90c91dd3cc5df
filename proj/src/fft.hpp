#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rppg::detail {

/// |X_k|^2 for k = 0..nfft/2 of the real input zero-padded to nfft.
std::vector<double> squared_magnitude_spectrum(std::span<const double> x, std::size_t nfft);

}  // namespace rppg::detail
