#pragma once

#include <cstddef>
#include <vector>

#include "cmmn/signal.hpp"

namespace cmmn {

enum class Window { rectangular, hann };

const char* window_name(Window w);
Window window_from_name(const std::string& name);

/// Welch periodogram settings. filter_size is the window length F and also
/// the spectral resolution of every downstream PSD and Monge filter.
struct WelchConfig {
  std::size_t filter_size = 128;
  Window window = Window::rectangular;
  double overlap_fraction = 0.5;
  bool center = true;

  std::size_t hop() const {
    const double h = static_cast<double>(filter_size) * (1.0 - overlap_fraction);
    const auto floored = static_cast<std::size_t>(h);
    return floored < 1 ? 1 : floored;
  }

  void validate() const;
};

/// Two-sided power spectral density: F nonnegative bins with
/// bins[j] == bins[F-j] (Hermitian symmetry of a real signal's spectrum).
struct Psd {
  std::vector<double> bins;

  std::size_t filter_size() const { return bins.size(); }
  double total_power() const;
  double max_bin() const;
};

/// Throws unless every bin is finite, nonnegative, and the two-sided
/// symmetry holds within 1e-10 relative.
void validate_psd(const Psd& psd);

/// Window taps for a given shape; the length-1 window is always {1}.
std::vector<double> window_taps(Window window, std::size_t length);

/// Number of Welch windows extracted per signal for this configuration.
std::size_t windows_per_signal(std::size_t num_timepoints, const WelchConfig& config);

/// Total number of windows pooled over all samples of the set.
std::size_t window_count(const SignalSet& signals, const WelchConfig& config);

/// Average of |DFT|^2 over all length-F windows of one channel, pooled over
/// all samples. Raw scale: no density normalization is applied, so absolute
/// values are only meaningful relative to other PSDs estimated the same way.
Psd welch_psd(const SignalSet& signals, std::size_t channel, const WelchConfig& config);

/// welch_psd for every channel, in channel order.
std::vector<Psd> psd_all_channels(const SignalSet& signals, const WelchConfig& config);

}  // namespace cmmn
