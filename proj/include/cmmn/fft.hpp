#pragma once

#include <complex>
#include <span>
#include <vector>

namespace cmmn::fft {

/// Forward DFT of a real signal. Returns the n/2+1 nonredundant bins
/// (the remaining bins follow from Hermitian symmetry).
std::vector<std::complex<double>> forward_real(std::span<const double> x);

/// Inverse DFT of a Hermitian half-spectrum (n/2+1 bins) back to a real
/// signal of length n. Includes the 1/n normalization.
std::vector<double> inverse_hermitian(std::span<const std::complex<double>> half, std::size_t n);

/// Full complex inverse DFT with 1/n normalization.
std::vector<std::complex<double>> inverse_complex(std::span<const std::complex<double>> spectrum);

/// Squared magnitudes of the full two-sided DFT of a real signal
/// (length n, bins j and n-j equal by construction).
std::vector<double> power_spectrum(std::span<const double> x);

/// Expands a Hermitian half-spectrum of real values to the full two-sided
/// vector of length n (bins[j] == bins[n-j]).
std::vector<double> mirror_to_two_sided(std::span<const double> half, std::size_t n);

}  // namespace cmmn::fft
