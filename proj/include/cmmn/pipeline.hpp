#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cmmn/signal.hpp"
#include "cmmn/spectral_ot.hpp"
#include "cmmn/welch.hpp"

namespace cmmn {

inline constexpr const char* kModelFormatVersion = "cmmn-model/1";
inline constexpr const char* kFilterBankFormatVersion = "cmmn-filters/1";

/// Fitted normalizer: per-channel target spectrum plus everything needed to
/// rebuild the mapping for new data. Immutable after fit.
struct CmmnModel {
  std::string version = kModelFormatVersion;
  std::size_t channel_count = 0;
  WelchConfig welch_config;
  TargetSpec target_spec;
  double eps_floor_rel = 1e-12;  // absolute floor = eps_floor_rel * max source bin
  std::vector<Psd> barycenter;   // one PSD per channel

  void validate() const;
};

/// Per-domain filters computed at fit time (one per channel).
struct DomainFilterBank {
  std::string version = kFilterBankFormatVersion;
  std::map<std::string, std::vector<MongeFilter>> filters;
};

struct FitResult {
  CmmnModel model;
  DomainFilterBank bank;
};

/// Fits the normalizer on K source domains: per-domain Welch PSDs, target
/// spectrum per channel, and one Monge filter per (domain, channel).
/// The barycenter reduction folds domains in sorted-id order, so the result
/// is independent of input ordering.
FitResult fit(const DomainSet& sources, const TargetSpec& target_spec,
              const WelchConfig& welch_config, double eps_floor_rel = 1e-12);

/// Test-time adaptation: estimates the domain's PSD with the fit-time
/// config, builds the filter to the stored target, and applies it.
SignalSet transform(const CmmnModel& model, const SignalSet& signals,
                    ConvMode mode = ConvMode::FftSame);

/// Applies a fit-time filter without re-estimating any PSD.
SignalSet transform_with_stored_filter(const DomainFilterBank& bank, const std::string& domain_id,
                                       const SignalSet& signals,
                                       ConvMode mode = ConvMode::FftSame);

/// Absolute division floor for a source PSD under the model's relative
/// setting. Falls back to the relative value itself for an all-zero source.
double absolute_eps_floor(double eps_floor_rel, const Psd& source);

nlohmann::json model_to_json(const CmmnModel& model);
CmmnModel model_from_json(const nlohmann::json& j);
nlohmann::json filter_bank_to_json(const DomainFilterBank& bank);
DomainFilterBank filter_bank_from_json(const nlohmann::json& j);

nlohmann::json target_spec_to_json(const TargetSpec& spec);
TargetSpec target_spec_from_json(const nlohmann::json& j);

}  // namespace cmmn
