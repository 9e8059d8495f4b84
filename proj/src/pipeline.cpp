#include "cmmn/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace cmmn {

void CmmnModel::validate() const {
  if (version != kModelFormatVersion)
    fail(ErrorCode::BadMagicOrVersion, "unsupported model version '" + version + "'");
  if (channel_count == 0) fail(ErrorCode::InvalidSpec, "model has no channels");
  if (barycenter.size() != channel_count)
    fail(ErrorCode::InvalidSpec, "model stores " + std::to_string(barycenter.size()) +
                                     " target PSDs for " + std::to_string(channel_count) +
                                     " channels");
  welch_config.validate();
  target_spec.validate();
  if (!(eps_floor_rel > 0.0)) fail(ErrorCode::InvalidSpec, "eps_floor must be > 0");
  for (const Psd& p : barycenter) {
    validate_psd(p);
    if (p.filter_size() != welch_config.filter_size)
      fail(ErrorCode::LengthMismatch, "target PSD length does not match filter size");
  }
}

double absolute_eps_floor(double eps_floor_rel, const Psd& source) {
  const double peak = source.max_bin();
  return peak > 0.0 ? eps_floor_rel * peak : eps_floor_rel;
}

FitResult fit(const DomainSet& sources, const TargetSpec& target_spec,
              const WelchConfig& welch_config, double eps_floor_rel) {
  sources.validate();
  welch_config.validate();
  if (!(eps_floor_rel > 0.0)) fail(ErrorCode::InvalidSpec, "eps_floor must be > 0");

  const std::size_t channels = sources.channel_count();

  std::vector<std::size_t> order(sources.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sources.domains[a].id < sources.domains[b].id;
  });

  // Per-domain PSDs, iterated in sorted-id order so the barycenter fold is
  // order-independent.
  std::vector<std::vector<Psd>> domain_psds(sources.size());
  for (std::size_t k : order)
    domain_psds[k] = psd_all_channels(sources.domains[k].signals, welch_config);

  FitResult result;
  result.model.channel_count = channels;
  result.model.welch_config = welch_config;
  result.model.target_spec = target_spec;
  result.model.eps_floor_rel = eps_floor_rel;
  result.model.barycenter.reserve(channels);

  for (std::size_t c = 0; c < channels; ++c) {
    std::vector<Psd> channel_psds;
    channel_psds.reserve(sources.size());
    for (std::size_t k : order) channel_psds.push_back(domain_psds[k][c]);
    result.model.barycenter.push_back(target_psd(target_spec, channel_psds));
  }

  for (std::size_t k = 0; k < sources.size(); ++k) {
    std::vector<MongeFilter> per_channel;
    per_channel.reserve(channels);
    for (std::size_t c = 0; c < channels; ++c) {
      const Psd& source = domain_psds[k][c];
      per_channel.push_back(monge_filter(source, result.model.barycenter[c],
                                         absolute_eps_floor(eps_floor_rel, source)));
    }
    result.bank.filters.emplace(sources.domains[k].id, std::move(per_channel));
  }
  return result;
}

SignalSet transform(const CmmnModel& model, const SignalSet& signals, ConvMode mode) {
  model.validate();
  signals.validate();
  if (signals.num_channels != model.channel_count)
    fail(ErrorCode::ChannelMismatch, "data has " + std::to_string(signals.num_channels) +
                                         " channels, model expects " +
                                         std::to_string(model.channel_count));
  if (signals.num_timepoints < model.welch_config.filter_size)
    fail(ErrorCode::FilterTooLarge, "signals shorter than the model's filter size");

  SignalSet out = signals;
  for (std::size_t c = 0; c < model.channel_count; ++c) {
    const Psd source = welch_psd(signals, c, model.welch_config);
    const MongeFilter filter = monge_filter(source, model.barycenter[c],
                                            absolute_eps_floor(model.eps_floor_rel, source));
    apply_filter_in_place(filter, out, c, mode);
  }
  return out;
}

SignalSet transform_with_stored_filter(const DomainFilterBank& bank, const std::string& domain_id,
                                       const SignalSet& signals, ConvMode mode) {
  const auto it = bank.filters.find(domain_id);
  if (it == bank.filters.end())
    fail(ErrorCode::UnknownDomain, "no stored filters for domain '" + domain_id + "'");
  signals.validate();
  if (signals.num_channels != it->second.size())
    fail(ErrorCode::ChannelMismatch, "data channel count does not match stored filters");

  SignalSet out = signals;
  for (std::size_t c = 0; c < it->second.size(); ++c)
    apply_filter_in_place(it->second[c], out, c, mode);
  return out;
}

nlohmann::json target_spec_to_json(const TargetSpec& spec) {
  nlohmann::json j;
  j["kind"] = target_kind_name(spec.kind);
  if (spec.kind == TargetSpec::Kind::Powerlaw) j["exponent"] = spec.powerlaw_exponent;
  if (spec.kind == TargetSpec::Kind::ExplicitPsd) j["psd"] = spec.explicit_psd.bins;
  return j;
}

TargetSpec target_spec_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "barycenter") return TargetSpec::barycenter();
  if (kind == "whitening") return TargetSpec::whitening();
  if (kind == "powerlaw") return TargetSpec::powerlaw(j.at("exponent").get<double>());
  if (kind == "explicit")
    return TargetSpec::explicit_target(Psd{j.at("psd").get<std::vector<double>>()});
  fail(ErrorCode::InvalidSpec, "unknown target kind '" + kind + "'");
}

nlohmann::json model_to_json(const CmmnModel& model) {
  nlohmann::json j;
  j["version"] = model.version;
  j["channel_count"] = model.channel_count;
  j["filter_size"] = model.welch_config.filter_size;
  j["window"] = window_name(model.welch_config.window);
  j["overlap_fraction"] = model.welch_config.overlap_fraction;
  j["center"] = model.welch_config.center;
  j["eps_floor"] = model.eps_floor_rel;
  j["target_spec"] = target_spec_to_json(model.target_spec);
  nlohmann::json bary = nlohmann::json::array();
  for (const Psd& p : model.barycenter) bary.push_back(p.bins);
  j["barycenter"] = std::move(bary);
  return j;
}

CmmnModel model_from_json(const nlohmann::json& j) {
  CmmnModel model;
  model.version = j.at("version").get<std::string>();
  if (model.version != kModelFormatVersion)
    fail(ErrorCode::BadMagicOrVersion, "unsupported model version '" + model.version + "'");
  model.channel_count = j.at("channel_count").get<std::size_t>();
  model.welch_config.filter_size = j.at("filter_size").get<std::size_t>();
  model.welch_config.window = window_from_name(j.at("window").get<std::string>());
  model.welch_config.overlap_fraction = j.at("overlap_fraction").get<double>();
  model.welch_config.center = j.at("center").get<bool>();
  model.eps_floor_rel = j.at("eps_floor").get<double>();
  model.target_spec = target_spec_from_json(j.at("target_spec"));
  for (const auto& bins : j.at("barycenter"))
    model.barycenter.push_back(Psd{bins.get<std::vector<double>>()});
  model.validate();
  return model;
}

nlohmann::json filter_bank_to_json(const DomainFilterBank& bank) {
  nlohmann::json j;
  j["version"] = bank.version;
  nlohmann::json filters = nlohmann::json::object();
  for (const auto& [id, per_channel] : bank.filters) {
    nlohmann::json kernels = nlohmann::json::array();
    for (const MongeFilter& f : per_channel) kernels.push_back(f.kernel);
    filters[id] = std::move(kernels);
  }
  j["filters"] = std::move(filters);
  return j;
}

DomainFilterBank filter_bank_from_json(const nlohmann::json& j) {
  DomainFilterBank bank;
  bank.version = j.at("version").get<std::string>();
  if (bank.version != kFilterBankFormatVersion)
    fail(ErrorCode::BadMagicOrVersion, "unsupported filter bank version '" + bank.version + "'");
  for (const auto& [id, kernels] : j.at("filters").items()) {
    std::vector<MongeFilter> per_channel;
    for (const auto& kernel : kernels)
      per_channel.push_back(MongeFilter{kernel.get<std::vector<double>>()});
    bank.filters.emplace(id, std::move(per_channel));
  }
  return bank;
}

}  // namespace cmmn
