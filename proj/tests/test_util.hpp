// Shared helpers for the test suites. The DFT here is a deliberate O(n^2)
// direct evaluation, independent of the library's FFT path, so it can serve
// as an oracle for it.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <numbers>
#include <vector>

#include "cmmn/rng.hpp"
#include "cmmn/signal.hpp"
#include "cmmn/welch.hpp"

namespace testutil {

inline std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k * j) /
                           static_cast<double>(n);
      acc += x[j] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

inline std::vector<std::complex<double>> naive_dft_real(const std::vector<double>& x) {
  std::vector<std::complex<double>> cx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) cx[i] = x[i];
  return naive_dft(cx);
}

inline std::vector<std::complex<double>> naive_idft(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(k * j) /
                           static_cast<double>(n);
      acc += x[j] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc / static_cast<double>(n);
  }
  return out;
}

/// Random strictly positive two-sided PSD (bins[j] == bins[F-j]).
inline cmmn::Psd random_psd(std::size_t f, cmmn::Rng& rng, double lo = 0.1, double hi = 10.0) {
  std::vector<double> half(f / 2 + 1);
  for (double& v : half) v = rng.uniform(lo, hi);
  cmmn::Psd p;
  p.bins.resize(f);
  for (std::size_t j = 0; j < f; ++j) p.bins[j] = half[std::min(j, f - j)];
  return p;
}

/// Random positive PSD that is smooth across neighboring bins: log spectrum
/// built from a handful of low-order cosine harmonics. Suitable for
/// Monte-Carlo pushforward checks, where window leakage smears anything
/// rougher than the analysis resolution.
inline cmmn::Psd smooth_random_psd(std::size_t f, cmmn::Rng& rng, double log_amp = 0.5) {
  constexpr std::size_t kHarmonics = 3;
  std::vector<double> coef(kHarmonics + 1);
  for (std::size_t m = 0; m <= kHarmonics; ++m)
    coef[m] = log_amp / static_cast<double>(m + 1) * rng.normal();
  cmmn::Psd p;
  p.bins.resize(f);
  for (std::size_t j = 0; j < f; ++j) {
    double logv = 0.0;
    for (std::size_t m = 0; m <= kHarmonics; ++m)
      logv += coef[m] * std::cos(2.0 * std::numbers::pi * static_cast<double>(m * j) /
                                 static_cast<double>(f));
    p.bins[j] = std::exp(logv);
  }
  // Symmetrize exactly; cos leaves only rounding-level asymmetry.
  for (std::size_t j = 1; j < f - j; ++j)
    p.bins[f - j] = p.bins[j];
  return p;
}

/// Symmetric circulant covariance whose DFT eigenvalues are the PSD bins:
/// first column = inverse DFT of the PSD.
inline Eigen::MatrixXd circulant_from_psd(const cmmn::Psd& psd) {
  const std::size_t f = psd.filter_size();
  std::vector<std::complex<double>> bins(f);
  for (std::size_t j = 0; j < f; ++j) bins[j] = psd.bins[j];
  const auto col = naive_idft(bins);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(f));
  for (std::size_t i = 0; i < f; ++i)
    for (std::size_t j = 0; j < f; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          col[(i + f - j) % f].real();
  return m;
}

/// Circulant matrix realizing circular convolution with the kernel.
inline Eigen::MatrixXd circulant_from_kernel(const std::vector<double>& kernel) {
  const std::size_t f = kernel.size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(f));
  for (std::size_t i = 0; i < f; ++i)
    for (std::size_t j = 0; j < f; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kernel[(i + f - j) % f];
  return m;
}

inline Eigen::MatrixXd random_spd(std::size_t dim, cmmn::Rng& rng, double jitter = 0.1) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = rng.normal();
  return a * a.transpose() +
         jitter * Eigen::MatrixXd::Identity(a.rows(), a.cols());
}

inline Eigen::MatrixXd random_orthogonal(std::size_t dim, cmmn::Rng& rng) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = rng.normal();
  return Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
}

/// White-noise signal set, unit variance.
inline cmmn::SignalSet white_noise(std::size_t n, std::size_t c, std::size_t t, cmmn::Rng& rng,
                                   double scale = 1.0) {
  auto s = cmmn::SignalSet::zeros(n, c, t);
  for (double& v : s.data) v = scale * rng.normal();
  return s;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

}  // namespace testutil
