#include "cmmn/welch.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "cmmn/fft.hpp"

namespace cmmn {

const char* window_name(Window w) {
  return w == Window::hann ? "hann" : "rectangular";
}

Window window_from_name(const std::string& name) {
  if (name == "hann") return Window::hann;
  if (name == "rectangular" || name == "rect") return Window::rectangular;
  fail(ErrorCode::InvalidSpec, "unknown window '" + name + "'");
}

void WelchConfig::validate() const {
  if (filter_size == 0) fail(ErrorCode::InvalidSpec, "filter_size must be >= 1");
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0))
    fail(ErrorCode::InvalidSpec, "overlap_fraction must lie in [0, 1)");
}

double Psd::total_power() const {
  double s = 0.0;
  for (double b : bins) s += b;
  return s;
}

double Psd::max_bin() const {
  double m = 0.0;
  for (double b : bins) m = std::max(m, b);
  return m;
}

void validate_psd(const Psd& psd) {
  const std::size_t f = psd.bins.size();
  if (f == 0) fail(ErrorCode::EmptyInput, "PSD has no bins");
  double peak = 0.0;
  for (double b : psd.bins) {
    if (!std::isfinite(b)) fail(ErrorCode::NonFinite, "PSD bin is not finite");
    if (b < 0.0) fail(ErrorCode::NegativeBin, "PSD bin is negative");
    peak = std::max(peak, b);
  }
  for (std::size_t j = 1; j < f; ++j) {
    const double diff = std::abs(psd.bins[j] - psd.bins[f - j]);
    if (diff > 1e-10 * std::max(peak, 1.0))
      fail(ErrorCode::InvalidSpec, "PSD violates two-sided symmetry at bin " + std::to_string(j));
  }
}

std::vector<double> window_taps(Window window, std::size_t length) {
  std::vector<double> taps(length, 1.0);
  if (window == Window::hann && length > 1) {
    const double step = 2.0 * std::numbers::pi / static_cast<double>(length - 1);
    for (std::size_t n = 0; n < length; ++n)
      taps[n] = 0.5 * (1.0 - std::cos(step * static_cast<double>(n)));
  }
  return taps;
}

std::size_t windows_per_signal(std::size_t num_timepoints, const WelchConfig& config) {
  if (config.filter_size > num_timepoints) return 0;
  return (num_timepoints - config.filter_size) / config.hop() + 1;
}

std::size_t window_count(const SignalSet& signals, const WelchConfig& config) {
  return signals.num_samples * windows_per_signal(signals.num_timepoints, config);
}

Psd welch_psd(const SignalSet& signals, std::size_t channel, const WelchConfig& config) {
  config.validate();
  if (signals.num_samples == 0) fail(ErrorCode::EmptyInput, "no samples to estimate a PSD from");
  if (channel >= signals.num_channels)
    fail(ErrorCode::ChannelMismatch, "channel " + std::to_string(channel) + " out of range");
  const std::size_t f = config.filter_size;
  const std::size_t t = signals.num_timepoints;
  if (f > t)
    fail(ErrorCode::FilterTooLarge, "filter_size " + std::to_string(f) +
                                        " exceeds signal length " + std::to_string(t));

  const auto taps = window_taps(config.window, f);
  const std::size_t hop = config.hop();
  // A centered length-1 window is identically zero, so centering only
  // applies for F > 1.
  const bool center = config.center && f > 1;

  std::vector<double> windowed(f);
  std::vector<double> acc(f / 2 + 1, 0.0);
  std::size_t count = 0;

  for (std::size_t i = 0; i < signals.num_samples; ++i) {
    const auto x = signals.channel(i, channel);
    for (double v : x)
      if (!std::isfinite(v)) fail(ErrorCode::NonFinite, "signal contains NaN or Inf");
    for (std::size_t start = 0; start + f <= t; start += hop) {
      double mean = 0.0;
      if (center) {
        for (std::size_t n = 0; n < f; ++n) mean += x[start + n];
        mean /= static_cast<double>(f);
      }
      for (std::size_t n = 0; n < f; ++n) windowed[n] = taps[n] * (x[start + n] - mean);
      const auto spectrum = fft::forward_real(windowed);
      for (std::size_t j = 0; j < spectrum.size(); ++j) acc[j] += std::norm(spectrum[j]);
      ++count;
    }
  }

  if (count == 0) fail(ErrorCode::EmptyInput, "configuration yields no windows");
  const double scale = 1.0 / static_cast<double>(count);
  for (double& v : acc) v *= scale;
  return Psd{fft::mirror_to_two_sided(acc, f)};
}

std::vector<Psd> psd_all_channels(const SignalSet& signals, const WelchConfig& config) {
  std::vector<Psd> out;
  out.reserve(signals.num_channels);
  for (std::size_t c = 0; c < signals.num_channels; ++c)
    out.push_back(welch_psd(signals, c, config));
  return out;
}

}  // namespace cmmn
