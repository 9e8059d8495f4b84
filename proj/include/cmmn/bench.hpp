#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmmn/signal.hpp"
#include "cmmn/spectral_ot.hpp"

namespace cmmn::bench {

/// Multi-domain synthetic classification data: per-class spectral shapes,
/// per-domain random smooth spectral responses (the convolutional shift),
/// Gaussian sample noise.
struct SyntheticSpec {
  std::size_t num_domains = 12;
  std::size_t samples_per_class = 10;
  std::size_t classes = 3;
  std::size_t length = 512;  // T
  std::size_t channels = 1;
  double sample_rate_hz = 1.0;
  double noise_floor = 0.01;
  double shift_log_std = 1.0;   // std of the domain responses' log magnitude
  std::size_t shift_knots = 8;  // knots of the smooth log-response interpolant
  std::uint64_t seed = 0;
  // Optional explicit two-sided class spectra (one length-T vector per
  // class); empty selects the default band-bump construction.
  std::vector<std::vector<double>> class_spectra;

  void validate() const;
};

struct LabeledDomains {
  DomainSet data;
  std::vector<std::vector<int>> labels;  // labels[k][i] in [0, classes)
};

/// Default class spectra: one Gaussian band bump per class over the
/// two-sided frequency grid, plus the noise floor.
std::vector<std::vector<double>> default_class_spectra(std::size_t classes, std::size_t length,
                                                       double noise_floor);

/// Deterministic under spec.seed: same spec, same bytes.
LabeledDomains generate(const SyntheticSpec& spec);

/// Per-sample log mean PSD within each band, per channel. Rows are samples,
/// columns are (channel, band) pairs. Band edges are normalized frequencies
/// in [0, 0.5]; the last band includes Nyquist.
Eigen::MatrixXd band_power_features(const SignalSet& signals, std::span<const double> band_edges);

std::vector<double> default_band_edges();

/// Normalization strategy evaluated by the harness.
struct Strategy {
  enum class Kind { None, SampleZscore, SessionZscore, Cmmn };
  Kind kind = Kind::None;
  TargetSpec target{};           // cmmn only
  std::size_t filter_size = 64;  // cmmn only

  static Strategy none() { return {}; }
  static Strategy sample_zscore() { return {Kind::SampleZscore, {}, 0}; }
  static Strategy session_zscore() { return {Kind::SessionZscore, {}, 0}; }
  static Strategy cmmn(TargetSpec target, std::size_t filter_size) {
    return {Kind::Cmmn, std::move(target), filter_size};
  }

  std::string name() const;
};

struct EvalConfig {
  std::size_t trials = 10;
  std::uint64_t seed = 0;
  double test_fraction = 0.5;
  enum class Classifier { Logistic, Centroid };
  Classifier classifier = Classifier::Logistic;
  std::vector<double> band_edges = default_band_edges();
};

struct BenchResult {
  struct DomainRow {
    std::string strategy;
    std::size_t trial;
    std::string domain_id;
    double bacc;
  };
  struct TrialRow {
    std::string strategy;
    std::size_t trial;
    double bacc;  // mean over that trial's test domains
  };
  struct Aggregate {
    std::string strategy;
    double mean_bacc = 0.0;
    double std_bacc = 0.0;
    std::vector<double> per_trial_bacc;
    // Deltas against the baseline strategy; valid only when has_delta.
    bool has_delta = false;
    double delta_bacc_at_20 = 0.0;   // mean gain on the 20% worst baseline domains
    double delta_bacc_mean = 0.0;    // mean gain over all test domains
    std::vector<double> per_trial_delta20;
    std::vector<double> per_trial_delta_mean;
  };

  std::vector<DomainRow> domain_rows;
  std::vector<TrialRow> trial_rows;
  std::vector<Aggregate> aggregates;

  const Aggregate& aggregate(const std::string& strategy) const;
};

/// Leave-domains-out evaluation: per trial, a reseeded domain split; the
/// classifier is trained on pooled source-domain features and scored per
/// held-out domain with balanced accuracy. The baseline for deltas is the
/// first `none` strategy (falling back to the first `sample_zscore`).
BenchResult evaluate(const LabeledDomains& data, std::span<const Strategy> strategies,
                     const EvalConfig& config);

struct SweepPoint {
  std::size_t filter_size;
  double mean_delta_bacc;
  std::vector<double> per_trial_delta;
  double mean_bacc;
  double baseline_mean_bacc;
};

/// Delta-BACC (cmmn minus baseline) as a function of filter size.
std::vector<SweepPoint> sensitivity_sweep(const LabeledDomains& data,
                                          std::span<const std::size_t> filter_sizes,
                                          const EvalConfig& config,
                                          const TargetSpec& target = TargetSpec::barycenter());

/// Mean of per-class recalls over classes present in the truth.
double balanced_accuracy(std::span<const int> truth, std::span<const int> predicted,
                         std::size_t classes);

/// Trains the configured classifier on pooled features from the train sets
/// and scores balanced accuracy on the test set. The building block behind
/// evaluate(), exposed for control-condition comparisons.
double train_and_score(std::span<const SignalSet> train,
                       std::span<const std::vector<int>> train_labels, const SignalSet& test,
                       const std::vector<int>& test_labels, std::size_t classes,
                       const EvalConfig& config);

std::string to_csv(const BenchResult& result);
std::string sweep_to_csv(std::span<const SweepPoint> points, const std::string& strategy_name);

}  // namespace cmmn::bench
