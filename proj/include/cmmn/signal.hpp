#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cmmn/errors.hpp"

namespace cmmn {

/// A set of N real signals with C channels and T time points each,
/// stored contiguously in (sample, channel, time) order.
struct SignalSet {
  std::size_t num_samples = 0;
  std::size_t num_channels = 0;
  std::size_t num_timepoints = 0;
  double sample_rate_hz = 1.0;
  std::vector<double> data;

  static SignalSet zeros(std::size_t n, std::size_t c, std::size_t t, double rate_hz = 1.0) {
    SignalSet s;
    s.num_samples = n;
    s.num_channels = c;
    s.num_timepoints = t;
    s.sample_rate_hz = rate_hz;
    s.data.assign(n * c * t, 0.0);
    return s;
  }

  std::size_t offset(std::size_t sample, std::size_t channel) const {
    return (sample * num_channels + channel) * num_timepoints;
  }

  std::span<const double> channel(std::size_t sample, std::size_t ch) const {
    return {data.data() + offset(sample, ch), num_timepoints};
  }
  std::span<double> channel(std::size_t sample, std::size_t ch) {
    return {data.data() + offset(sample, ch), num_timepoints};
  }

  double at(std::size_t sample, std::size_t ch, std::size_t t) const {
    return data[offset(sample, ch) + t];
  }
  double& at(std::size_t sample, std::size_t ch, std::size_t t) {
    return data[offset(sample, ch) + t];
  }

  void validate() const {
    if (num_samples == 0) fail(ErrorCode::EmptyInput, "signal set has no samples");
    if (num_channels == 0 || num_timepoints == 0)
      fail(ErrorCode::EmptyInput, "signal set has empty shape");
    if (data.size() != num_samples * num_channels * num_timepoints)
      fail(ErrorCode::SizeMismatch, "signal buffer does not match declared shape");
    if (!(sample_rate_hz > 0.0)) fail(ErrorCode::InvalidSpec, "sample rate must be positive");
  }
};

/// A collection of domains (subjects, sessions, datasets) sharing channel
/// count and sample rate.
struct DomainSet {
  struct Domain {
    std::string id;
    SignalSet signals;
  };
  std::vector<Domain> domains;

  std::size_t size() const { return domains.size(); }

  const Domain* find(const std::string& id) const {
    for (const auto& d : domains)
      if (d.id == id) return &d;
    return nullptr;
  }

  std::size_t channel_count() const {
    return domains.empty() ? 0 : domains.front().signals.num_channels;
  }

  void validate() const {
    if (domains.empty()) fail(ErrorCode::EmptyInput, "domain set is empty");
    const std::size_t c = domains.front().signals.num_channels;
    for (const auto& d : domains) {
      d.signals.validate();
      if (d.signals.num_channels != c)
        fail(ErrorCode::InconsistentChannels,
             "domain '" + d.id + "' has " + std::to_string(d.signals.num_channels) +
                 " channels, expected " + std::to_string(c));
      for (const auto& other : domains) {
        if (&other != &d && other.id == d.id)
          fail(ErrorCode::InvalidSpec, "duplicate domain id '" + d.id + "'");
      }
    }
  }
};

}  // namespace cmmn
