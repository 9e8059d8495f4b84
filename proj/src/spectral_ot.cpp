#include "cmmn/spectral_ot.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "cmmn/fft.hpp"

namespace cmmn {

void TargetSpec::validate() const {
  if (kind == Kind::Powerlaw && !(powerlaw_exponent > 0.0))
    fail(ErrorCode::InvalidSpec, "powerlaw exponent must be > 0");
  if (kind == Kind::ExplicitPsd) validate_psd(explicit_psd);
}

std::string target_kind_name(TargetSpec::Kind kind) {
  switch (kind) {
    case TargetSpec::Kind::Barycenter: return "barycenter";
    case TargetSpec::Kind::Whitening: return "whitening";
    case TargetSpec::Kind::Powerlaw: return "powerlaw";
    case TargetSpec::Kind::ExplicitPsd: return "explicit";
  }
  return "unknown";
}

Psd barycenter_psd(std::span<const Psd> psds) {
  if (psds.empty()) fail(ErrorCode::EmptyInput, "barycenter of zero PSDs");
  const std::size_t f = psds.front().filter_size();
  std::vector<double> sqrt_mean(f, 0.0);
  for (const Psd& p : psds) {
    if (p.filter_size() != f)
      fail(ErrorCode::LengthMismatch, "PSDs disagree on filter size");
    for (std::size_t j = 0; j < f; ++j) {
      const double b = p.bins[j];
      if (b < 0.0) fail(ErrorCode::NegativeBin, "PSD bin is negative");
      sqrt_mean[j] += std::sqrt(b);
    }
  }
  const double inv_k = 1.0 / static_cast<double>(psds.size());
  Psd out;
  out.bins.resize(f);
  for (std::size_t j = 0; j < f; ++j) {
    const double m = sqrt_mean[j] * inv_k;
    out.bins[j] = m * m;
  }
  return out;
}

MongeFilter monge_filter(const Psd& source, const Psd& target, double eps_floor) {
  const std::size_t f = source.filter_size();
  if (f == 0) fail(ErrorCode::EmptyInput, "empty source PSD");
  if (target.filter_size() != f)
    fail(ErrorCode::LengthMismatch, "source and target PSDs disagree on filter size");
  if (!(eps_floor > 0.0)) fail(ErrorCode::InvalidSpec, "eps_floor must be > 0");

  // The floor applies to both sides: bins below it carry no usable signal
  // (e.g. the DC bin of mean-removed windows is rounding residue), and
  // flooring only the source would turn source==target into a non-identity
  // response there.
  std::vector<std::complex<double>> response(f);
  for (std::size_t j = 0; j < f; ++j) {
    const double s = source.bins[j];
    const double t = target.bins[j];
    if (!std::isfinite(s) || !std::isfinite(t)) fail(ErrorCode::NonFinite, "PSD bin not finite");
    if (t < 0.0) fail(ErrorCode::NegativeBin, "target PSD bin is negative");
    response[j] = std::sqrt(std::max(t, eps_floor)) / std::sqrt(std::max(s, eps_floor));
  }

  // Hermitian symmetry of the response makes the kernel real; materialize
  // the full inverse DFT and check the residual rather than assume it.
  const auto kernel_c = fft::inverse_complex(response);
  double norm_sq = 0.0, imag_sq = 0.0;
  for (const auto& v : kernel_c) {
    norm_sq += std::norm(v);
    imag_sq += v.imag() * v.imag();
  }
  if (imag_sq > 1e-18 * norm_sq && norm_sq > 0.0)
    fail(ErrorCode::NonFinite, "inverse DFT of spectral ratio is not real");

  MongeFilter filter;
  filter.kernel.resize(f);
  for (std::size_t j = 0; j < f; ++j) {
    filter.kernel[j] = kernel_c[j].real();
    if (!std::isfinite(filter.kernel[j])) fail(ErrorCode::NonFinite, "filter tap not finite");
  }
  return filter;
}

Psd target_psd(const TargetSpec& spec, std::span<const Psd> psds) {
  spec.validate();
  if (spec.kind == TargetSpec::Kind::ExplicitPsd) return spec.explicit_psd;
  if (psds.empty()) fail(ErrorCode::EmptyInput, "target_psd needs at least one input PSD");
  const std::size_t f = psds.front().filter_size();

  if (spec.kind == TargetSpec::Kind::Barycenter) return barycenter_psd(psds);

  double mean_power = 0.0;
  for (const Psd& p : psds) {
    if (p.filter_size() != f) fail(ErrorCode::LengthMismatch, "PSDs disagree on filter size");
    mean_power += p.total_power();
  }
  mean_power /= static_cast<double>(psds.size());

  Psd out;
  out.bins.assign(f, 0.0);
  if (spec.kind == TargetSpec::Kind::Whitening) {
    const double level = mean_power / static_cast<double>(f);
    out.bins.assign(f, level);
    return out;
  }

  // Powerlaw a*f^(a-1) on the two-sided grid; the DC bin copies the first
  // nonzero frequency to dodge the 0^(a-1) singularity for a < 1.
  const double a = spec.powerlaw_exponent;
  for (std::size_t j = 1; j < f; ++j) {
    const double freq = static_cast<double>(std::min(j, f - j)) / static_cast<double>(f);
    out.bins[j] = a * std::pow(freq, a - 1.0);
  }
  out.bins[0] = f > 1 ? out.bins[1] : 1.0;
  double total = 0.0;
  for (double b : out.bins) total += b;
  const double scale = total > 0.0 ? mean_power / total : 0.0;
  for (double& b : out.bins) b *= scale;
  return out;
}

namespace {

// Linear-phase layout of the kernel: zero-lag tap moved from index 0 to
// index floor(F/2), upper-half taps becoming the leading (negative-lag)
// coefficients.
std::vector<double> centered_taps(const MongeFilter& filter) {
  const std::size_t f = filter.filter_size();
  const std::size_t c = f / 2;
  std::vector<double> g(f);
  for (std::size_t m = 0; m < f; ++m) g[(m + c) % f] = filter.kernel[m];
  return g;
}

std::vector<double> direct_full_convolution(std::span<const double> x,
                                            std::span<const double> g) {
  const std::size_t t = x.size(), f = g.size();
  std::vector<double> full(t + f - 1, 0.0);
  for (std::size_t m = 0; m < f; ++m) {
    const double gm = g[m];
    if (gm == 0.0) continue;
    for (std::size_t n = 0; n < t; ++n) full[m + n] += gm * x[n];
  }
  return full;
}

std::vector<double> fft_full_convolution(std::span<const double> x, std::span<const double> g) {
  const std::size_t t = x.size(), f = g.size();
  const std::size_t full_len = t + f - 1;
  std::size_t padded = 1;
  while (padded < full_len) padded <<= 1;
  std::vector<double> xa(padded, 0.0), ga(padded, 0.0);
  std::copy(x.begin(), x.end(), xa.begin());
  std::copy(g.begin(), g.end(), ga.begin());
  auto xs = fft::forward_real(xa);
  const auto gs = fft::forward_real(ga);
  for (std::size_t j = 0; j < xs.size(); ++j) xs[j] *= gs[j];
  auto y = fft::inverse_hermitian(xs, padded);
  y.resize(full_len);
  return y;
}

}  // namespace

std::vector<double> convolve_same(std::span<const double> x, const MongeFilter& filter,
                                  ConvMode mode) {
  const std::size_t t = x.size();
  const std::size_t f = filter.filter_size();
  if (f == 0) fail(ErrorCode::EmptyInput, "empty filter kernel");
  if (f > t)
    fail(ErrorCode::FilterTooLarge, "kernel of length " + std::to_string(f) +
                                        " cannot filter signals of length " + std::to_string(t));
  const auto g = centered_taps(filter);
  const auto full = mode == ConvMode::DirectSame ? direct_full_convolution(x, g)
                                                 : fft_full_convolution(x, g);
  const std::size_t c = f / 2;
  return {full.begin() + static_cast<std::ptrdiff_t>(c),
          full.begin() + static_cast<std::ptrdiff_t>(c + t)};
}

SignalSet apply_filter(const MongeFilter& filter, const SignalSet& signals, std::size_t channel,
                       ConvMode mode) {
  SignalSet out = signals;
  apply_filter_in_place(filter, out, channel, mode);
  return out;
}

void apply_filter_in_place(const MongeFilter& filter, SignalSet& signals, std::size_t channel,
                           ConvMode mode) {
  if (channel >= signals.num_channels)
    fail(ErrorCode::ChannelMismatch, "channel " + std::to_string(channel) + " out of range");
  for (std::size_t i = 0; i < signals.num_samples; ++i) {
    auto x = signals.channel(i, channel);
    const auto y = convolve_same(x, filter, mode);
    std::copy(y.begin(), y.end(), x.begin());
  }
}

}  // namespace cmmn
