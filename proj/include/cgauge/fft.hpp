#pragma once

#include <complex>
#include <span>
#include <vector>

// Thin RAII layer over FFTW's real-to-complex transforms.
namespace cgauge::fft {

/// Unnormalized forward transform; returns n/2 + 1 bins.
std::vector<std::complex<double>> forward(std::span<const double> x);

/// Inverse of `forward` including the 1/n normalization.
std::vector<double> inverse(std::span<const std::complex<double>> spectrum, std::size_t n);

/// Smallest size >= n whose only prime factors are 2, 3 and 5.
std::size_t good_size(std::size_t n);

} // namespace cgauge::fft
