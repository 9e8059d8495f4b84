#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cmmn/signal.hpp"
#include "cmmn/welch.hpp"

namespace cmmn {

/// Length-F real kernel realizing the optimal-transport map between two
/// PSDs. Tap 0 is the zero-lag coefficient; taps in the upper half are the
/// negative lags of the (two-sided, non-causal) filter, mirroring the
/// inverse-DFT layout.
struct MongeFilter {
  std::vector<double> kernel;

  std::size_t filter_size() const { return kernel.size(); }
};

/// Which spectrum every domain is mapped onto.
struct TargetSpec {
  enum class Kind { Barycenter, Whitening, Powerlaw, ExplicitPsd };

  Kind kind = Kind::Barycenter;
  double powerlaw_exponent = 0.659;  // only read for Kind::Powerlaw
  Psd explicit_psd{};                // only read for Kind::ExplicitPsd

  static TargetSpec barycenter() { return {}; }
  static TargetSpec whitening() { return {Kind::Whitening, 0.659, {}}; }
  static TargetSpec powerlaw(double a) { return {Kind::Powerlaw, a, {}}; }
  static TargetSpec explicit_target(Psd p) { return {Kind::ExplicitPsd, 0.659, std::move(p)}; }

  void validate() const;
};

std::string target_kind_name(TargetSpec::Kind kind);

/// Wasserstein barycenter of PSDs in closed form: the elementwise square of
/// the mean of elementwise square roots.
Psd barycenter_psd(std::span<const Psd> psds);

/// Builds the filter whose spectral response is
/// sqrt(max(target[j], eps_floor)) / sqrt(max(source[j], eps_floor)).
/// eps_floor guards the division against (near-)zero bins; bins where both
/// sides sit below it get a unit response.
MongeFilter monge_filter(const Psd& source, const Psd& target, double eps_floor);

/// Resolves a TargetSpec against the per-domain PSDs of one channel.
/// Whitening and powerlaw targets are scaled to the mean total power of the
/// inputs; the powerlaw DC bin copies the first nonzero-frequency bin.
Psd target_psd(const TargetSpec& spec, std::span<const Psd> psds);

enum class ConvMode { FftSame, DirectSame };

/// "Same"-length convolution of one signal with the filter kernel.
/// The kernel's zero-lag tap is aligned at index floor(F/2) of the
/// equivalent linear-phase FIR; boundaries are zero-padded.
std::vector<double> convolve_same(std::span<const double> x, const MongeFilter& filter,
                                  ConvMode mode);

/// Applies the filter to the chosen channel of every sample; other channels
/// are copied unchanged.
SignalSet apply_filter(const MongeFilter& filter, const SignalSet& signals, std::size_t channel,
                       ConvMode mode = ConvMode::FftSame);

/// In-place variant used by the pipeline when all channels get filtered.
void apply_filter_in_place(const MongeFilter& filter, SignalSet& signals, std::size_t channel,
                           ConvMode mode = ConvMode::FftSame);

}  // namespace cmmn
