#pragma once

#include <complex>

namespace airysim::detail {

/// In-place complex DFT on a contiguous buffer, FFTW sign convention
/// (sign = -1: e^{-2 pi i jk/n}). Unnormalized. Thread-safe; plans are
/// cached per (n, sign) and created deterministically (FFTW_ESTIMATE).
void dft_inplace(std::complex<double>* data, int n, int sign);

}  // namespace airysim::detail
