#pragma once

#include <complex>
#include <cstddef>

#include "kirchpeak/grid.hpp"

namespace kirchpeak::detail {

using cplx = std::complex<double>;

// Real-to-complex transform of a grid field (unnormalized, FFTW sign
// convention e^{-i xi x}). `out` holds grid.spectral_size() entries.
void forward(const GridSpec& g, const double* in, cplx* out);

// Inverse transform including the 1/M^N normalization.
void backward(const GridSpec& g, const cplx* in, double* out);

}  // namespace kirchpeak::detail
