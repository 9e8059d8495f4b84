#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "cmmn/fft.hpp"
#include "cmmn/pipeline.hpp"
#include "test_util.hpp"

using cmmn::CmmnModel;
using cmmn::DomainSet;
using cmmn::FitResult;
using cmmn::Psd;
using cmmn::SignalSet;
using cmmn::TargetSpec;
using cmmn::WelchConfig;

namespace {

WelchConfig config_f(std::size_t f) {
  WelchConfig c;
  c.filter_size = f;
  c.window = cmmn::Window::rectangular;
  c.overlap_fraction = 0.5;
  c.center = false;
  return c;
}

DomainSet gain_domains(cmmn::Rng& rng, std::vector<double> gains, std::size_t n = 24,
                       std::size_t t = 1024, std::size_t channels = 1) {
  DomainSet set;
  for (std::size_t k = 0; k < gains.size(); ++k) {
    auto signals = testutil::white_noise(n, channels, t, rng, gains[k]);
    set.domains.push_back({"dom" + std::to_string(k), std::move(signals)});
  }
  return set;
}

double channel_variance(const SignalSet& s, std::size_t ch) {
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < s.num_samples; ++i)
    for (double v : s.channel(i, ch)) {
      acc += v * v;
      ++count;
    }
  return acc / static_cast<double>(count);
}

}  // namespace

TEST_CASE("single-domain fit yields identity filters") {
  cmmn::Rng rng(1);
  const DomainSet set = gain_domains(rng, {1.0}, 8, 256);
  const FitResult fitted = cmmn::fit(set, TargetSpec::barycenter(), config_f(16));
  const auto& kernels = fitted.bank.filters.at("dom0");
  REQUIRE(kernels.size() == 1);
  CHECK(std::abs(kernels[0].kernel[0] - 1.0) < 1e-9);
  for (std::size_t j = 1; j < 16; ++j) CHECK(std::abs(kernels[0].kernel[j]) < 1e-9);
}

TEST_CASE("two white-noise domains with variances 1 and 9 at F=1") {
  cmmn::Rng rng(2);
  const DomainSet set = gain_domains(rng, {1.0, 3.0}, 32, 4096);
  const FitResult fitted = cmmn::fit(set, TargetSpec::barycenter(), config_f(1));

  // PSD estimates converge to the variances, so the barycenter bin
  // approaches ((1+3)/2)^2 = 4 and the scalar filters approach {2, 2/3}.
  const double bary = fitted.model.barycenter[0].bins[0];
  CHECK(testutil::rel_err(bary, 4.0) < 0.02);
  const double g0 = fitted.bank.filters.at("dom0")[0].kernel[0];
  const double g1 = fitted.bank.filters.at("dom1")[0].kernel[0];
  CHECK(testutil::rel_err(g0, 2.0) < 0.02);
  CHECK(testutil::rel_err(g1, 2.0 / 3.0) < 0.02);

  // Filters must be the analytic scalar gain sqrt(bary / psd) exactly.
  const Psd psd0 = cmmn::welch_psd(set.domains[0].signals, 0, config_f(1));
  CHECK(std::abs(g0 - std::sqrt(bary / psd0.bins[0])) <= 1e-12 * g0);

  // Transformed data has variance near the barycenter bin.
  for (const auto& d : set.domains) {
    const SignalSet mapped = cmmn::transform(fitted.model, d.signals);
    CHECK(testutil::rel_err(channel_variance(mapped, 0), 4.0) < 0.05);
  }
}

TEST_CASE("whitening target over identical flat domains gives identity-gain filters") {
  cmmn::Rng rng(3);
  const DomainSet set = gain_domains(rng, {1.0, 1.0}, 48, 2048);
  const FitResult fitted = cmmn::fit(set, TargetSpec::whitening(), config_f(8));
  for (const auto& [id, kernels] : fitted.bank.filters) {
    CHECK(testutil::rel_err(kernels[0].kernel[0], 1.0) < 0.05);
    for (std::size_t j = 1; j < 8; ++j) CHECK(std::abs(kernels[0].kernel[j]) < 0.05);
  }
}

TEST_CASE("transform of a fit source equals its stored filter bit for bit") {
  cmmn::Rng rng(4);
  const DomainSet set = gain_domains(rng, {1.0, 2.0}, 6, 512, 2);
  const FitResult fitted = cmmn::fit(set, TargetSpec::barycenter(), config_f(32));
  for (const auto& d : set.domains) {
    const SignalSet via_model = cmmn::transform(fitted.model, d.signals);
    const SignalSet via_bank = cmmn::transform_with_stored_filter(fitted.bank, d.id, d.signals);
    CHECK(via_model.data == via_bank.data);
  }
}

TEST_CASE("transform near the barycenter is near the identity") {
  cmmn::Rng rng(5);
  // All domains share one distribution, so every domain sits at the
  // barycenter up to estimation noise.
  const DomainSet set = gain_domains(rng, {1.0, 1.0, 1.0}, 40, 2048);
  const FitResult fitted = cmmn::fit(set, TargetSpec::barycenter(), config_f(16));

  const auto& probe = set.domains.front().signals;
  const SignalSet once = cmmn::transform(fitted.model, probe);
  const Psd before = cmmn::welch_psd(probe, 0, config_f(16));
  const Psd after = cmmn::welch_psd(once, 0, config_f(16));
  CHECK(testutil::rel_err(after.total_power(), before.total_power()) < 0.05);

  // Idempotence in distribution: a second pass changes the PSD by < 5%.
  const SignalSet twice = cmmn::transform(fitted.model, once);
  const Psd after2 = cmmn::welch_psd(twice, 0, config_f(16));
  CHECK(testutil::rel_err(after2.total_power(), after.total_power()) < 0.05);
}

TEST_CASE("fit is invariant to the domain order") {
  cmmn::Rng rng(6);
  DomainSet set = gain_domains(rng, {0.5, 1.0, 2.0}, 8, 512);
  DomainSet reversed;
  reversed.domains.assign(set.domains.rbegin(), set.domains.rend());

  const FitResult a = cmmn::fit(set, TargetSpec::barycenter(), config_f(16));
  const FitResult b = cmmn::fit(reversed, TargetSpec::barycenter(), config_f(16));
  for (std::size_t j = 0; j < 16; ++j) {
    const double va = a.model.barycenter[0].bins[j];
    const double vb = b.model.barycenter[0].bins[j];
    CHECK(std::abs(va - vb) <= 1e-12 * std::max(1.0, std::abs(va)));
  }
  for (const auto& [id, kernels] : a.bank.filters)
    CHECK(kernels[0].kernel == b.bank.filters.at(id)[0].kernel);
}

TEST_CASE("consistent channel permutation permutes the fit") {
  cmmn::Rng rng(7);
  const DomainSet set = gain_domains(rng, {1.0, 2.0}, 8, 512, 2);
  DomainSet swapped = set;
  for (auto& d : swapped.domains) {
    for (std::size_t i = 0; i < d.signals.num_samples; ++i) {
      auto c0 = d.signals.channel(i, 0);
      auto c1 = d.signals.channel(i, 1);
      for (std::size_t t = 0; t < d.signals.num_timepoints; ++t) std::swap(c0[t], c1[t]);
    }
  }
  const FitResult a = cmmn::fit(set, TargetSpec::barycenter(), config_f(16));
  const FitResult b = cmmn::fit(swapped, TargetSpec::barycenter(), config_f(16));
  CHECK(a.model.barycenter[0].bins == b.model.barycenter[1].bins);
  CHECK(a.model.barycenter[1].bins == b.model.barycenter[0].bins);
  for (const auto& [id, kernels] : a.bank.filters) {
    CHECK(kernels[0].kernel == b.bank.filters.at(id)[1].kernel);
    CHECK(kernels[1].kernel == b.bank.filters.at(id)[0].kernel);
  }
}

TEST_CASE("after fit+transform all source domains share one spectrum") {
  cmmn::Rng rng(8);
  const std::size_t f = 16;
  // Distinct smooth spectra per domain; 40 samples x 255 windows > 1e4.
  DomainSet set;
  for (int k = 0; k < 4; ++k) {
    Psd shape = testutil::smooth_random_psd(2048, rng, 0.6);
    auto signals = SignalSet::zeros(40, 1, 2048);
    std::vector<double> half(shape.bins.begin(),
                             shape.bins.begin() + 2048 / 2 + 1);
    for (double& v : half) v = std::sqrt(v);
    for (std::size_t i = 0; i < 40; ++i) {
      std::vector<double> white(2048);
      for (double& v : white) v = rng.normal();
      auto spectrum = cmmn::fft::forward_real(white);
      for (std::size_t j = 0; j < spectrum.size(); ++j) spectrum[j] *= half[j];
      const auto shaped = cmmn::fft::inverse_hermitian(spectrum, 2048);
      auto dst = signals.channel(i, 0);
      std::copy(shaped.begin(), shaped.end(), dst.begin());
    }
    set.domains.push_back({"dom" + std::to_string(k), std::move(signals)});
  }

  const FitResult fitted = cmmn::fit(set, TargetSpec::barycenter(), config_f(f));
  std::vector<Psd> mapped_psds;
  for (const auto& d : set.domains) {
    const SignalSet mapped = cmmn::transform_with_stored_filter(fitted.bank, d.id, d.signals);
    mapped_psds.push_back(cmmn::welch_psd(mapped, 0, config_f(f)));
  }
  for (std::size_t a = 0; a < mapped_psds.size(); ++a)
    for (std::size_t b = a + 1; b < mapped_psds.size(); ++b)
      for (std::size_t j = 0; j < f; ++j)
        CHECK(testutil::rel_err(mapped_psds[a].bins[j], mapped_psds[b].bins[j]) < 0.2);
}

TEST_CASE("model serialization round trip is bit exact") {
  cmmn::Rng rng(9);
  const DomainSet set = gain_domains(rng, {1.0, 2.0}, 6, 256, 2);
  WelchConfig hann_config = config_f(16);
  hann_config.window = cmmn::Window::hann;
  hann_config.center = true;
  const FitResult fitted = cmmn::fit(set, TargetSpec::powerlaw(0.659), hann_config);

  const nlohmann::json j = cmmn::model_to_json(fitted.model);
  const std::string text = j.dump();
  const CmmnModel restored = cmmn::model_from_json(nlohmann::json::parse(text));

  CHECK(restored.channel_count == fitted.model.channel_count);
  CHECK(restored.welch_config.filter_size == fitted.model.welch_config.filter_size);
  CHECK(restored.welch_config.window == cmmn::Window::hann);
  CHECK(restored.welch_config.center == true);
  CHECK(restored.welch_config.overlap_fraction == fitted.model.welch_config.overlap_fraction);
  CHECK(restored.eps_floor_rel == fitted.model.eps_floor_rel);
  CHECK(restored.target_spec.kind == fitted.model.target_spec.kind);
  CHECK(restored.target_spec.powerlaw_exponent == fitted.model.target_spec.powerlaw_exponent);
  for (std::size_t c = 0; c < restored.channel_count; ++c)
    CHECK(restored.barycenter[c].bins == fitted.model.barycenter[c].bins);  // bitwise
  CHECK(cmmn::model_to_json(restored).dump() == text);
}

TEST_CASE("filter bank serialization round trip is bit exact") {
  cmmn::Rng rng(10);
  const DomainSet set = gain_domains(rng, {1.0, 3.0}, 6, 256, 2);
  const FitResult fitted = cmmn::fit(set, TargetSpec::barycenter(), config_f(8));

  const std::string text = cmmn::filter_bank_to_json(fitted.bank).dump();
  const auto restored = cmmn::filter_bank_from_json(nlohmann::json::parse(text));
  REQUIRE(restored.filters.size() == fitted.bank.filters.size());
  for (const auto& [id, kernels] : fitted.bank.filters) {
    const auto& other = restored.filters.at(id);
    REQUIRE(other.size() == kernels.size());
    for (std::size_t c = 0; c < kernels.size(); ++c)
      CHECK(other[c].kernel == kernels[c].kernel);  // bitwise
  }
  CHECK(cmmn::filter_bank_to_json(restored).dump() == text);

  // Stored filters keep producing identical outputs after the round trip.
  const auto& probe = set.domains[0];
  const SignalSet direct = cmmn::transform_with_stored_filter(fitted.bank, probe.id, probe.signals);
  const SignalSet loaded = cmmn::transform_with_stored_filter(restored, probe.id, probe.signals);
  CHECK(direct.data == loaded.data);
}

TEST_CASE("pipeline error paths") {
  cmmn::Rng rng(11);

  SUBCASE("inconsistent channel counts across domains") {
    DomainSet set;
    set.domains.push_back({"a", testutil::white_noise(4, 1, 64, rng)});
    set.domains.push_back({"b", testutil::white_noise(4, 2, 64, rng)});
    try {
      cmmn::fit(set, TargetSpec::barycenter(), config_f(16));
      FAIL("expected InconsistentChannels");
    } catch (const cmmn::Error& e) {
      CHECK(e.code() == cmmn::ErrorCode::InconsistentChannels);
    }
  }
  SUBCASE("transform channel mismatch") {
    const DomainSet set = gain_domains(rng, {1.0}, 4, 128, 2);
    const FitResult fitted = cmmn::fit(set, TargetSpec::barycenter(), config_f(16));
    const auto wrong = testutil::white_noise(2, 1, 128, rng);
    try {
      cmmn::transform(fitted.model, wrong);
      FAIL("expected ChannelMismatch");
    } catch (const cmmn::Error& e) {
      CHECK(e.code() == cmmn::ErrorCode::ChannelMismatch);
    }
  }
  SUBCASE("transform data shorter than the filter") {
    const DomainSet set = gain_domains(rng, {1.0}, 4, 128);
    const FitResult fitted = cmmn::fit(set, TargetSpec::barycenter(), config_f(64));
    const auto brief = testutil::white_noise(2, 1, 32, rng);
    try {
      cmmn::transform(fitted.model, brief);
      FAIL("expected FilterTooLarge");
    } catch (const cmmn::Error& e) {
      CHECK(e.code() == cmmn::ErrorCode::FilterTooLarge);
    }
  }
  SUBCASE("unknown domain id") {
    const DomainSet set = gain_domains(rng, {1.0}, 4, 128);
    const FitResult fitted = cmmn::fit(set, TargetSpec::barycenter(), config_f(16));
    try {
      cmmn::transform_with_stored_filter(fitted.bank, "nope", set.domains[0].signals);
      FAIL("expected UnknownDomain");
    } catch (const cmmn::Error& e) {
      CHECK(e.code() == cmmn::ErrorCode::UnknownDomain);
    }
  }
}
