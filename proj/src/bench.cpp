#include "cmmn/bench.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cmmn/fft.hpp"
#include "cmmn/pipeline.hpp"
#include "cmmn/rng.hpp"
#include "cmmn/welch.hpp"

namespace cmmn::bench {

void SyntheticSpec::validate() const {
  if (num_domains == 0 || samples_per_class == 0 || classes == 0 || length == 0 || channels == 0)
    fail(ErrorCode::InvalidSpec, "synthetic spec has an empty dimension");
  if (!(noise_floor >= 0.0) || !(shift_log_std >= 0.0))
    fail(ErrorCode::InvalidSpec, "noise_floor and shift_log_std must be >= 0");
  if (shift_knots < 2) fail(ErrorCode::InvalidSpec, "shift_knots must be >= 2");
  if (!class_spectra.empty()) {
    if (class_spectra.size() != classes)
      fail(ErrorCode::InvalidSpec, "class_spectra size does not match classes");
    for (const auto& s : class_spectra) {
      if (s.size() != length)
        fail(ErrorCode::InvalidSpec, "class spectrum length does not match T");
      for (double v : s)
        if (!(v >= 0.0) || !std::isfinite(v))
          fail(ErrorCode::InvalidSpec, "class spectra must be finite and nonnegative");
    }
  }
}

std::vector<std::vector<double>> default_class_spectra(std::size_t classes, std::size_t length,
                                                       double noise_floor) {
  std::vector<std::vector<double>> spectra(classes, std::vector<double>(length));
  constexpr double kBumpWidth = 0.04;
  for (std::size_t c = 0; c < classes; ++c) {
    const double center =
        0.5 * static_cast<double>(c + 1) / static_cast<double>(classes + 1);
    for (std::size_t j = 0; j < length; ++j) {
      const double freq =
          static_cast<double>(std::min(j, length - j)) / static_cast<double>(length);
      const double d = (freq - center) / kBumpWidth;
      spectra[c][j] = noise_floor + std::exp(-0.5 * d * d);
    }
  }
  return spectra;
}

namespace {

// Smooth strictly-positive spectral response: iid normal log-magnitudes at
// equally spaced knots over [0, Nyquist], cosine-interpolated, mirrored to
// the two-sided grid.
std::vector<double> domain_response(std::size_t length, std::size_t knots, double log_std,
                                    Rng& rng) {
  std::vector<double> knot_values(knots);
  for (double& v : knot_values) v = log_std * rng.normal();
  std::vector<double> response(length);
  const double knot_spacing = 0.5 / static_cast<double>(knots - 1);
  for (std::size_t j = 0; j < length; ++j) {
    const double freq =
        static_cast<double>(std::min(j, length - j)) / static_cast<double>(length);
    std::size_t left = static_cast<std::size_t>(freq / knot_spacing);
    left = std::min(left, knots - 2);
    double t = (freq - static_cast<double>(left) * knot_spacing) / knot_spacing;
    t = 0.5 * (1.0 - std::cos(std::numbers::pi * std::clamp(t, 0.0, 1.0)));
    const double g = knot_values[left] * (1.0 - t) + knot_values[left + 1] * t;
    response[j] = std::exp(g);
  }
  return response;
}

// One stationary sample: white noise shaped in the frequency domain by
// sqrt(class spectrum) times the domain response.
void synthesize_sample(std::span<double> out, std::span<const double> shaper_half, Rng& rng) {
  const std::size_t t = out.size();
  std::vector<double> white(t);
  for (double& v : white) v = rng.normal();
  auto spectrum = fft::forward_real(white);
  for (std::size_t j = 0; j < spectrum.size(); ++j) spectrum[j] *= shaper_half[j];
  const auto shaped = fft::inverse_hermitian(spectrum, t);
  std::copy(shaped.begin(), shaped.end(), out.begin());
}

}  // namespace

LabeledDomains generate(const SyntheticSpec& spec) {
  spec.validate();
  const auto spectra = spec.class_spectra.empty()
                           ? default_class_spectra(spec.classes, spec.length, spec.noise_floor)
                           : spec.class_spectra;

  // Per-class spectral shapers on the half grid (the synthesis path only
  // needs the nonredundant bins).
  const std::size_t half = spec.length / 2 + 1;
  std::vector<std::vector<double>> class_shaper(spec.classes, std::vector<double>(half));
  for (std::size_t c = 0; c < spec.classes; ++c)
    for (std::size_t j = 0; j < half; ++j) class_shaper[c][j] = std::sqrt(spectra[c][j]);

  LabeledDomains out;
  out.labels.resize(spec.num_domains);
  for (std::size_t k = 0; k < spec.num_domains; ++k) {
    Rng rng(derive_seed(spec.seed, k));
    const auto response = domain_response(spec.length, spec.shift_knots, spec.shift_log_std, rng);

    const std::size_t n = spec.samples_per_class * spec.classes;
    SignalSet signals = SignalSet::zeros(n, spec.channels, spec.length, spec.sample_rate_hz);
    std::vector<int>& labels = out.labels[k];
    labels.resize(n);

    std::vector<double> shaper(half);
    std::size_t i = 0;
    for (std::size_t c = 0; c < spec.classes; ++c) {
      for (std::size_t j = 0; j < half; ++j) shaper[j] = class_shaper[c][j] * response[j];
      for (std::size_t s = 0; s < spec.samples_per_class; ++s, ++i) {
        labels[i] = static_cast<int>(c);
        for (std::size_t ch = 0; ch < spec.channels; ++ch)
          synthesize_sample(signals.channel(i, ch), shaper, rng);
      }
    }
    out.data.domains.push_back({"domain" + std::to_string(k), std::move(signals)});
  }
  return out;
}

std::vector<double> default_band_edges() {
  return {0.0, 0.02, 0.05, 0.09, 0.14, 0.20, 0.28, 0.38, 0.50};
}

Eigen::MatrixXd band_power_features(const SignalSet& signals,
                                    std::span<const double> band_edges) {
  signals.validate();
  if (band_edges.size() < 2) fail(ErrorCode::EmptyBand, "need at least one band");
  for (std::size_t b = 0; b + 1 < band_edges.size(); ++b)
    if (!(band_edges[b] < band_edges[b + 1]))
      fail(ErrorCode::InvalidSpec, "band edges must be strictly increasing");
  if (band_edges.front() < 0.0 || band_edges.back() > 0.5)
    fail(ErrorCode::InvalidSpec, "band edges must lie within [0, 0.5]");

  const std::size_t t = signals.num_timepoints;
  const std::size_t half = t / 2 + 1;
  const std::size_t bands = band_edges.size() - 1;

  // Bin -> band assignment over the one-sided grid; the last band is closed
  // at its upper edge so Nyquist is covered.
  std::vector<std::vector<std::size_t>> band_bins(bands);
  for (std::size_t j = 0; j < half; ++j) {
    const double freq = static_cast<double>(j) / static_cast<double>(t);
    for (std::size_t b = 0; b < bands; ++b) {
      const bool in_band = freq >= band_edges[b] &&
                           (freq < band_edges[b + 1] ||
                            (b + 1 == bands && freq <= band_edges[b + 1]));
      if (in_band) {
        band_bins[b].push_back(j);
        break;
      }
    }
  }
  for (std::size_t b = 0; b < bands; ++b)
    if (band_bins[b].empty())
      fail(ErrorCode::EmptyBand, "band " + std::to_string(b) + " contains no frequency bins");

  Eigen::MatrixXd features(signals.num_samples, signals.num_channels * bands);
  std::vector<double> centered(t);
  for (std::size_t i = 0; i < signals.num_samples; ++i) {
    for (std::size_t ch = 0; ch < signals.num_channels; ++ch) {
      const auto x = signals.channel(i, ch);
      double mean = 0.0;
      for (double v : x) mean += v;
      mean /= static_cast<double>(t);
      for (std::size_t n = 0; n < t; ++n) centered[n] = x[n] - mean;
      const auto spectrum = fft::forward_real(centered);
      for (std::size_t b = 0; b < bands; ++b) {
        double acc = 0.0;
        for (std::size_t j : band_bins[b]) acc += std::norm(spectrum[j]);
        acc /= static_cast<double>(band_bins[b].size());
        features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(ch * bands + b)) =
            std::log(std::max(acc, 1e-300));
      }
    }
  }
  return features;
}

std::string Strategy::name() const {
  switch (kind) {
    case Kind::None: return "none";
    case Kind::SampleZscore: return "sample_zscore";
    case Kind::SessionZscore: return "session_zscore";
    case Kind::Cmmn: {
      std::string label = "cmmn:" + target_kind_name(target.kind);
      if (target.kind == TargetSpec::Kind::Powerlaw) {
        std::ostringstream os;
        os << "@" << target.powerlaw_exponent;
        label += os.str();
      }
      return label + ":" + std::to_string(filter_size);
    }
  }
  return "unknown";
}

double balanced_accuracy(std::span<const int> truth, std::span<const int> predicted,
                         std::size_t classes) {
  if (truth.size() != predicted.size())
    fail(ErrorCode::LengthMismatch, "truth/prediction lengths disagree");
  if (truth.empty()) fail(ErrorCode::EmptyInput, "no labels to score");
  std::vector<double> hits(classes, 0.0), support(classes, 0.0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int c = truth[i];
    if (c < 0 || static_cast<std::size_t>(c) >= classes)
      fail(ErrorCode::InvalidSpec, "label out of range");
    support[static_cast<std::size_t>(c)] += 1.0;
    if (predicted[i] == c) hits[static_cast<std::size_t>(c)] += 1.0;
  }
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    if (support[c] > 0.0) {
      sum += hits[c] / support[c];
      ++present;
    }
  }
  if (present == 0) fail(ErrorCode::EmptyInput, "no class present in truth");
  return sum / static_cast<double>(present);
}

namespace {

// Multinomial logistic regression on standardized features, trained with
// plain gradient descent plus momentum. Deterministic: zero init, fixed
// schedule.
struct LinearModel {
  Eigen::VectorXd feat_mean, feat_scale;
  Eigen::MatrixXd weights;  // (D+1) x classes, last row is the bias
  bool centroid = false;
  Eigen::MatrixXd centroids;  // classes x D (centroid classifier only)
};

Eigen::MatrixXd standardized(const LinearModel& model, const Eigen::MatrixXd& feats) {
  Eigen::MatrixXd z = (feats.rowwise() - model.feat_mean.transpose()).array().rowwise() /
                      model.feat_scale.transpose().array();
  return z;
}

LinearModel train_classifier(const Eigen::MatrixXd& feats, const std::vector<int>& labels,
                             std::size_t classes, EvalConfig::Classifier kind) {
  LinearModel model;
  model.feat_mean = feats.colwise().mean();
  Eigen::MatrixXd centered = feats.rowwise() - model.feat_mean.transpose();
  model.feat_scale = (centered.array().square().colwise().mean().sqrt() + 1e-12).matrix();
  const Eigen::MatrixXd z = standardized(model, feats);
  const auto n = feats.rows();
  const auto d = feats.cols();

  if (kind == EvalConfig::Classifier::Centroid) {
    model.centroid = true;
    model.centroids = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(classes), d);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(classes));
    for (Eigen::Index i = 0; i < n; ++i) {
      model.centroids.row(labels[static_cast<std::size_t>(i)]) += z.row(i);
      counts(labels[static_cast<std::size_t>(i)]) += 1.0;
    }
    for (Eigen::Index c = 0; c < model.centroids.rows(); ++c)
      if (counts(c) > 0.0) model.centroids.row(c) /= counts(c);
    return model;
  }

  Eigen::MatrixXd zb(n, d + 1);
  zb << z, Eigen::VectorXd::Ones(n);
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(classes));
  for (Eigen::Index i = 0; i < n; ++i) onehot(i, labels[static_cast<std::size_t>(i)]) = 1.0;

  constexpr int kIters = 400;
  constexpr double kLearningRate = 1.0;
  constexpr double kMomentum = 0.9;
  constexpr double kRidge = 1e-3;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d + 1, static_cast<Eigen::Index>(classes));
  Eigen::MatrixXd velocity = w;
  for (int iter = 0; iter < kIters; ++iter) {
    Eigen::MatrixXd scores = zb * w;
    const Eigen::VectorXd row_max = scores.rowwise().maxCoeff();
    scores.colwise() -= row_max;
    Eigen::MatrixXd probs = scores.array().exp();
    const Eigen::VectorXd row_sum = probs.rowwise().sum();
    probs.array().colwise() /= row_sum.array();
    const Eigen::MatrixXd grad =
        zb.transpose() * (probs - onehot) / static_cast<double>(n) + kRidge * w;
    velocity = kMomentum * velocity - kLearningRate * grad;
    w += velocity;
  }
  model.weights = std::move(w);
  return model;
}

std::vector<int> predict(const LinearModel& model, const Eigen::MatrixXd& feats) {
  const Eigen::MatrixXd z = standardized(model, feats);
  std::vector<int> out(static_cast<std::size_t>(feats.rows()));
  if (model.centroid) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      Eigen::Index best = 0;
      (model.centroids.rowwise() - z.row(i)).rowwise().squaredNorm().minCoeff(&best);
      out[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return out;
  }
  Eigen::MatrixXd zb(z.rows(), z.cols() + 1);
  zb << z, Eigen::VectorXd::Ones(z.rows());
  const Eigen::MatrixXd scores = zb * model.weights;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    scores.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

SignalSet sample_zscore_normalize(const SignalSet& in) {
  SignalSet out = in;
  for (std::size_t i = 0; i < out.num_samples; ++i) {
    for (std::size_t ch = 0; ch < out.num_channels; ++ch) {
      auto x = out.channel(i, ch);
      double mean = 0.0;
      for (double v : x) mean += v;
      mean /= static_cast<double>(x.size());
      double var = 0.0;
      for (double v : x) var += (v - mean) * (v - mean);
      const double sd = std::sqrt(var / static_cast<double>(x.size()));
      const double inv = 1.0 / std::max(sd, 1e-12);
      for (double& v : x) v = (v - mean) * inv;
    }
  }
  return out;
}

SignalSet session_zscore_normalize(const SignalSet& in) {
  SignalSet out = in;
  for (std::size_t ch = 0; ch < out.num_channels; ++ch) {
    double mean = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < out.num_samples; ++i)
      for (double v : out.channel(i, ch)) {
        mean += v;
        ++count;
      }
    mean /= static_cast<double>(count);
    double var = 0.0;
    for (std::size_t i = 0; i < out.num_samples; ++i)
      for (double v : out.channel(i, ch)) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(count));
    const double inv = 1.0 / std::max(sd, 1e-12);
    for (std::size_t i = 0; i < out.num_samples; ++i)
      for (double& v : out.channel(i, ch)) v = (v - mean) * inv;
  }
  return out;
}

struct PreparedSplit {
  std::vector<SignalSet> train, test;  // same order as train_idx/test_idx
};

// Applies one strategy to a train/test domain split. CMMN fits on the train
// domains only; test domains are adapted through the model (test-time path).
PreparedSplit apply_strategy(const Strategy& strategy, const LabeledDomains& data,
                             const std::vector<std::size_t>& train_idx,
                             const std::vector<std::size_t>& test_idx) {
  PreparedSplit out;
  const auto& domains = data.data.domains;
  switch (strategy.kind) {
    case Strategy::Kind::None:
      for (auto k : train_idx) out.train.push_back(domains[k].signals);
      for (auto k : test_idx) out.test.push_back(domains[k].signals);
      break;
    case Strategy::Kind::SampleZscore:
      for (auto k : train_idx) out.train.push_back(sample_zscore_normalize(domains[k].signals));
      for (auto k : test_idx) out.test.push_back(sample_zscore_normalize(domains[k].signals));
      break;
    case Strategy::Kind::SessionZscore:
      for (auto k : train_idx) out.train.push_back(session_zscore_normalize(domains[k].signals));
      for (auto k : test_idx) out.test.push_back(session_zscore_normalize(domains[k].signals));
      break;
    case Strategy::Kind::Cmmn: {
      WelchConfig welch;
      welch.filter_size = strategy.filter_size;
      DomainSet train_set;
      for (auto k : train_idx) train_set.domains.push_back(domains[k]);
      const FitResult fitted = fit(train_set, strategy.target, welch);
      for (auto k : train_idx)
        out.train.push_back(
            transform_with_stored_filter(fitted.bank, domains[k].id, domains[k].signals));
      for (auto k : test_idx)
        out.test.push_back(transform(fitted.model, domains[k].signals));
      break;
    }
  }
  return out;
}

Eigen::MatrixXd stack_features(std::span<const SignalSet> sets,
                               std::span<const double> band_edges) {
  std::vector<Eigen::MatrixXd> blocks;
  Eigen::Index rows = 0, cols = 0;
  for (const SignalSet& s : sets) {
    blocks.push_back(band_power_features(s, band_edges));
    rows += blocks.back().rows();
    cols = blocks.back().cols();
  }
  Eigen::MatrixXd out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  return out;
}

double mean_of(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

double train_and_score(std::span<const SignalSet> train,
                       std::span<const std::vector<int>> train_labels, const SignalSet& test,
                       const std::vector<int>& test_labels, std::size_t classes,
                       const EvalConfig& config) {
  if (train.size() != train_labels.size())
    fail(ErrorCode::LengthMismatch, "train sets/labels count mismatch");
  std::vector<int> pooled;
  for (const auto& labels : train_labels) pooled.insert(pooled.end(), labels.begin(), labels.end());
  const Eigen::MatrixXd feats = stack_features(train, config.band_edges);
  const LinearModel model = train_classifier(feats, pooled, classes, config.classifier);
  const auto pred = predict(model, band_power_features(test, config.band_edges));
  return balanced_accuracy(test_labels, pred, classes);
}

const BenchResult::Aggregate& BenchResult::aggregate(const std::string& strategy) const {
  for (const auto& a : aggregates)
    if (a.strategy == strategy) return a;
  fail(ErrorCode::UnknownDomain, "no aggregate for strategy '" + strategy + "'");
}

BenchResult evaluate(const LabeledDomains& data, std::span<const Strategy> strategies,
                     const EvalConfig& config) {
  data.data.validate();
  if (data.labels.size() != data.data.size())
    fail(ErrorCode::LengthMismatch, "labels/domains count mismatch");
  if (data.data.size() < 2) fail(ErrorCode::TooFewDomains, "need >= 2 domains to hold some out");
  if (config.trials == 0) fail(ErrorCode::InvalidSpec, "trials must be >= 1");
  if (strategies.empty()) fail(ErrorCode::EmptyInput, "no strategies to evaluate");
  if (!(config.test_fraction > 0.0 && config.test_fraction < 1.0))
    fail(ErrorCode::InvalidSpec, "test_fraction must lie in (0, 1)");

  std::size_t classes = 0;
  for (const auto& labels : data.labels)
    for (int label : labels) classes = std::max(classes, static_cast<std::size_t>(label) + 1);

  const std::size_t num_domains = data.data.size();
  std::size_t num_test = static_cast<std::size_t>(
      std::llround(static_cast<double>(num_domains) * config.test_fraction));
  num_test = std::clamp<std::size_t>(num_test, 1, num_domains - 1);

  // Baseline strategy for deltas: prefer `none`, else `sample_zscore`.
  std::ptrdiff_t baseline = -1;
  for (std::size_t s = 0; s < strategies.size(); ++s)
    if (strategies[s].kind == Strategy::Kind::None) {
      baseline = static_cast<std::ptrdiff_t>(s);
      break;
    }
  if (baseline < 0)
    for (std::size_t s = 0; s < strategies.size(); ++s)
      if (strategies[s].kind == Strategy::Kind::SampleZscore) {
        baseline = static_cast<std::ptrdiff_t>(s);
        break;
      }

  BenchResult result;
  result.aggregates.resize(strategies.size());
  for (std::size_t s = 0; s < strategies.size(); ++s)
    result.aggregates[s].strategy = strategies[s].name();

  // bacc[s][t][j]: strategy s, trial t, test domain j (split order).
  std::vector<std::vector<std::vector<double>>> bacc(
      strategies.size(), std::vector<std::vector<double>>(config.trials));

  for (std::size_t trial = 0; trial < config.trials; ++trial) {
    Rng rng(derive_seed(config.seed, trial));
    std::vector<std::size_t> perm(num_domains);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    const std::vector<std::size_t> train_idx(perm.begin(),
                                             perm.end() - static_cast<std::ptrdiff_t>(num_test));
    const std::vector<std::size_t> test_idx(perm.end() - static_cast<std::ptrdiff_t>(num_test),
                                            perm.end());

    for (std::size_t s = 0; s < strategies.size(); ++s) {
      const PreparedSplit split = apply_strategy(strategies[s], data, train_idx, test_idx);

      std::vector<int> train_labels;
      for (std::size_t m = 0; m < split.train.size(); ++m) {
        const auto& labels = data.labels[train_idx[m]];
        train_labels.insert(train_labels.end(), labels.begin(), labels.end());
      }
      const Eigen::MatrixXd train_feats = stack_features(split.train, config.band_edges);
      const LinearModel model =
          train_classifier(train_feats, train_labels, classes, config.classifier);

      for (std::size_t m = 0; m < split.test.size(); ++m) {
        const auto feats = band_power_features(split.test[m], config.band_edges);
        const auto pred = predict(model, feats);
        const auto& truth = data.labels[test_idx[m]];
        const double score = balanced_accuracy(truth, pred, classes);
        bacc[s][trial].push_back(score);
        result.domain_rows.push_back(
            {strategies[s].name(), trial, data.data.domains[test_idx[m]].id, score});
      }
      result.trial_rows.push_back({strategies[s].name(), trial, mean_of(bacc[s][trial])});
    }
  }

  const std::size_t worst_count = static_cast<std::size_t>(
      std::ceil(0.2 * static_cast<double>(num_test)));
  for (std::size_t s = 0; s < strategies.size(); ++s) {
    auto& agg = result.aggregates[s];
    for (std::size_t trial = 0; trial < config.trials; ++trial) {
      agg.per_trial_bacc.push_back(mean_of(bacc[s][trial]));
      if (baseline >= 0 && s != static_cast<std::size_t>(baseline)) {
        const auto& base = bacc[static_cast<std::size_t>(baseline)][trial];
        const auto& mine = bacc[s][trial];
        std::vector<std::size_t> order(base.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return base[a] < base[b]; });
        double worst_delta = 0.0;
        for (std::size_t r = 0; r < worst_count && r < order.size(); ++r)
          worst_delta += mine[order[r]] - base[order[r]];
        worst_delta /= static_cast<double>(std::min(worst_count, order.size()));
        double all_delta = 0.0;
        for (std::size_t r = 0; r < order.size(); ++r) all_delta += mine[r] - base[r];
        all_delta /= static_cast<double>(order.size());
        agg.per_trial_delta20.push_back(worst_delta);
        agg.per_trial_delta_mean.push_back(all_delta);
      }
    }
    agg.mean_bacc = mean_of(agg.per_trial_bacc);
    agg.std_bacc = std_of(agg.per_trial_bacc);
    if (!agg.per_trial_delta20.empty()) {
      agg.has_delta = true;
      agg.delta_bacc_at_20 = mean_of(agg.per_trial_delta20);
      agg.delta_bacc_mean = mean_of(agg.per_trial_delta_mean);
    }
  }
  return result;
}

std::vector<SweepPoint> sensitivity_sweep(const LabeledDomains& data,
                                          std::span<const std::size_t> filter_sizes,
                                          const EvalConfig& config, const TargetSpec& target) {
  if (filter_sizes.empty()) fail(ErrorCode::EmptyInput, "no filter sizes requested");
  std::vector<Strategy> strategies{Strategy::none()};
  for (std::size_t f : filter_sizes) strategies.push_back(Strategy::cmmn(target, f));
  const BenchResult result = evaluate(data, strategies, config);

  const auto& base = result.aggregates[0];
  std::vector<SweepPoint> points;
  for (std::size_t i = 0; i < filter_sizes.size(); ++i) {
    const auto& agg = result.aggregates[i + 1];
    SweepPoint p;
    p.filter_size = filter_sizes[i];
    p.mean_bacc = agg.mean_bacc;
    p.baseline_mean_bacc = base.mean_bacc;
    p.mean_delta_bacc = agg.delta_bacc_mean;
    p.per_trial_delta = agg.per_trial_delta_mean;
    points.push_back(std::move(p));
  }
  return points;
}

namespace {

std::string format_double(double v) { return nlohmann::json(v).dump(); }

}  // namespace

std::string to_csv(const BenchResult& result) {
  std::string csv = "strategy,trial,domain_id,bacc\n";
  for (const auto& row : result.domain_rows) {
    csv += row.strategy;
    csv += ',';
    csv += std::to_string(row.trial);
    csv += ',';
    csv += row.domain_id;
    csv += ',';
    csv += format_double(row.bacc);
    csv += '\n';
  }
  return csv;
}

std::string sweep_to_csv(std::span<const SweepPoint> points, const std::string& strategy_name) {
  std::string csv = "strategy,trial,filter_size,delta_bacc\n";
  for (const auto& p : points) {
    for (std::size_t trial = 0; trial < p.per_trial_delta.size(); ++trial) {
      csv += strategy_name;
      csv += ',';
      csv += std::to_string(trial);
      csv += ',';
      csv += std::to_string(p.filter_size);
      csv += ',';
      csv += format_double(p.per_trial_delta[trial]);
      csv += '\n';
    }
  }
  return csv;
}

}  // namespace cmmn::bench
