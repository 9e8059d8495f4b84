// Command-line front end: fit/transform for dataset normalization plus the
// synthetic bench and filter-size sweep. All runs echo a resolved-config
// JSON on stdout so a run can be replayed exactly.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmmn/bench.hpp"
#include "cmmn/dataset_io.hpp"
#include "cmmn/pipeline.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) cmmn::fail(cmmn::ErrorCode::MissingFile, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json parse_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    cmmn::fail(cmmn::ErrorCode::BadMagicOrVersion,
               "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

// Grammar: barycenter | whitening | powerlaw[:a] | psd:<file>
cmmn::TargetSpec parse_target(const std::string& text) {
  if (text == "barycenter") return cmmn::TargetSpec::barycenter();
  if (text == "whitening") return cmmn::TargetSpec::whitening();
  if (text == "powerlaw") return cmmn::TargetSpec::powerlaw(0.659);
  if (text.rfind("powerlaw:", 0) == 0)
    return cmmn::TargetSpec::powerlaw(std::stod(text.substr(9)));
  if (text.rfind("psd:", 0) == 0) {
    const json j = parse_json_file(text.substr(4));
    return cmmn::TargetSpec::explicit_target(cmmn::Psd{j.at("bins").get<std::vector<double>>()});
  }
  cmmn::fail(cmmn::ErrorCode::InvalidSpec, "unknown target '" + text + "'");
}

// In-strategy targets use '@' for the powerlaw exponent so ':' stays the
// field separator: cmmn[:target[:filter_size]], e.g. cmmn:whitening:64 or
// cmmn:powerlaw@0.5:32.
cmmn::bench::Strategy parse_strategy(const std::string& token,
                                     const cmmn::TargetSpec& default_target,
                                     std::size_t default_filter_size) {
  using cmmn::bench::Strategy;
  if (token == "none") return Strategy::none();
  if (token == "sample_zscore") return Strategy::sample_zscore();
  if (token == "session_zscore") return Strategy::session_zscore();
  if (token.rfind("cmmn", 0) == 0) {
    cmmn::TargetSpec target = default_target;
    std::size_t filter_size = default_filter_size;
    std::string rest = token.substr(4);
    std::vector<std::string> parts;
    while (!rest.empty() && rest.front() == ':') {
      rest.erase(0, 1);
      const auto next = rest.find(':');
      parts.push_back(rest.substr(0, next));
      rest = next == std::string::npos ? "" : rest.substr(next);
    }
    if (!rest.empty()) cmmn::fail(cmmn::ErrorCode::InvalidSpec, "bad strategy '" + token + "'");
    if (!parts.empty() && !parts[0].empty()) {
      std::string t = parts[0];
      const auto at = t.find('@');
      if (at != std::string::npos) t = t.substr(0, at) + ":" + t.substr(at + 1);
      target = parse_target(t);
    }
    if (parts.size() > 1 && !parts[1].empty())
      filter_size = static_cast<std::size_t>(std::stoull(parts[1]));
    if (parts.size() > 2) cmmn::fail(cmmn::ErrorCode::InvalidSpec, "bad strategy '" + token + "'");
    return Strategy::cmmn(target, filter_size);
  }
  cmmn::fail(cmmn::ErrorCode::InvalidSpec, "unknown strategy '" + token + "'");
}

std::vector<std::string> split_csv_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

json welch_config_json(const cmmn::WelchConfig& w) {
  return {{"filter_size", w.filter_size},
          {"window", cmmn::window_name(w.window)},
          {"overlap_fraction", w.overlap_fraction},
          {"center", w.center}};
}

struct DatasetFlags {
  std::string manifest;
};

struct WelchFlags {
  std::size_t filter_size = 128;
  std::string window = "rectangular";
  double overlap = 0.5;
  bool no_center = false;

  cmmn::WelchConfig config() const {
    cmmn::WelchConfig w;
    w.filter_size = filter_size;
    w.window = cmmn::window_from_name(window);
    w.overlap_fraction = overlap;
    w.center = !no_center;
    return w;
  }
};

struct SyntheticFlags {
  std::size_t domains = 14;
  std::size_t samples_per_class = 12;
  std::size_t classes = 3;
  std::size_t length = 512;
  std::size_t channels = 1;
  double noise_floor = 0.01;
  double shift = 1.2;
  std::size_t knots = 8;

  cmmn::bench::SyntheticSpec spec(std::uint64_t seed) const {
    cmmn::bench::SyntheticSpec s;
    s.num_domains = domains;
    s.samples_per_class = samples_per_class;
    s.classes = classes;
    s.length = length;
    s.channels = channels;
    s.noise_floor = noise_floor;
    s.shift_log_std = shift;
    s.shift_knots = knots;
    s.seed = seed;
    return s;
  }

  json to_json(std::uint64_t seed) const {
    return {{"domains", domains},     {"samples_per_class", samples_per_class},
            {"classes", classes},     {"length", length},
            {"channels", channels},   {"noise_floor", noise_floor},
            {"shift", shift},         {"knots", knots},
            {"seed", seed}};
  }
};

void add_synthetic_flags(CLI::App* cmd, SyntheticFlags& f) {
  cmd->add_option("--domains", f.domains, "Number of synthetic domains");
  cmd->add_option("--samples-per-class", f.samples_per_class, "Samples per domain per class");
  cmd->add_option("--classes", f.classes, "Number of classes");
  cmd->add_option("--length", f.length, "Time points per sample");
  cmd->add_option("--channels", f.channels, "Channels per sample");
  cmd->add_option("--noise-floor", f.noise_floor, "Broadband noise floor of the class spectra");
  cmd->add_option("--shift", f.shift, "Std of the domain responses' log magnitude");
  cmd->add_option("--knots", f.knots, "Knot count of the smooth domain responses");
}

int run_fit(const DatasetFlags& data_flags, const WelchFlags& welch_flags,
            const std::string& target_text, double eps_floor, const std::string& out_path,
            const std::string& filters_path) {
  const cmmn::TargetSpec target = parse_target(target_text);
  const cmmn::WelchConfig welch = welch_flags.config();
  const cmmn::DomainSet sources = cmmn::io::load_dataset(data_flags.manifest);
  const cmmn::FitResult fitted = cmmn::fit(sources, target, welch, eps_floor);

  cmmn::io::write_file_atomic(out_path, cmmn::model_to_json(fitted.model).dump(2) + "\n");
  if (!filters_path.empty())
    cmmn::io::write_file_atomic(filters_path,
                                cmmn::filter_bank_to_json(fitted.bank).dump(2) + "\n");

  json window_counts = json::object();
  for (const auto& d : sources.domains)
    window_counts[d.id] = cmmn::window_count(d.signals, welch);

  json echo = {{"command", "fit"},
               {"data", data_flags.manifest},
               {"welch", welch_config_json(welch)},
               {"target", target_text},
               {"eps_floor", eps_floor},
               {"out", out_path},
               {"save_filters", filters_path},
               {"domains", sources.size()},
               {"window_counts", window_counts}};
  std::cout << echo.dump(2) << "\n";
  return kExitOk;
}

int run_transform(const std::string& model_path, const DatasetFlags& data_flags,
                  const std::string& out_dir, const std::string& mode_text) {
  if (mode_text != "direct" && mode_text != "fft")
    cmmn::fail(cmmn::ErrorCode::InvalidSpec, "mode must be 'fft' or 'direct'");
  const cmmn::ConvMode mode =
      mode_text == "direct" ? cmmn::ConvMode::DirectSame : cmmn::ConvMode::FftSame;
  cmmn::CmmnModel model;
  try {
    model = cmmn::model_from_json(parse_json_file(model_path));
  } catch (const json::exception& e) {
    cmmn::fail(cmmn::ErrorCode::BadMagicOrVersion,
               "model '" + model_path + "' is malformed: " + e.what());
  }

  const cmmn::DomainSet input = cmmn::io::load_dataset(data_flags.manifest);
  cmmn::DomainSet output;
  json window_counts = json::object();
  for (const auto& d : input.domains) {
    output.domains.push_back({d.id, cmmn::transform(model, d.signals, mode)});
    window_counts[d.id] = cmmn::window_count(d.signals, model.welch_config);
  }
  const auto manifest_path = cmmn::io::save_dataset(output, out_dir);

  json echo = {{"command", "transform"},
               {"model", model_path},
               {"data", data_flags.manifest},
               {"out", out_dir},
               {"out_manifest", manifest_path.string()},
               {"mode", mode_text},
               {"filter_size", model.welch_config.filter_size},
               {"window_counts", window_counts}};
  std::cout << echo.dump(2) << "\n";
  return kExitOk;
}

json aggregates_json(const cmmn::bench::BenchResult& result) {
  json out = json::array();
  for (const auto& a : result.aggregates) {
    json entry = {{"strategy", a.strategy},
                  {"mean_bacc", a.mean_bacc},
                  {"std_bacc", a.std_bacc},
                  {"per_trial_bacc", a.per_trial_bacc}};
    if (a.has_delta) {
      entry["delta_bacc_at_20"] = a.delta_bacc_at_20;
      entry["delta_bacc_mean"] = a.delta_bacc_mean;
    }
    out.push_back(std::move(entry));
  }
  return out;
}

int run_bench(const SyntheticFlags& synth, std::uint64_t seed, std::size_t trials,
              const std::string& strategies_text, const std::string& target_text,
              std::size_t filter_size, double test_fraction, const std::string& classifier_text,
              const std::string& out_csv, const std::string& out_json) {
  const cmmn::TargetSpec default_target = parse_target(target_text);
  std::vector<cmmn::bench::Strategy> strategies;
  for (const auto& token : split_csv_list(strategies_text))
    strategies.push_back(parse_strategy(token, default_target, filter_size));

  const auto data = cmmn::bench::generate(synth.spec(seed));
  cmmn::bench::EvalConfig config;
  config.trials = trials;
  config.seed = seed;
  config.test_fraction = test_fraction;
  if (classifier_text == "centroid")
    config.classifier = cmmn::bench::EvalConfig::Classifier::Centroid;
  else if (classifier_text != "logistic")
    cmmn::fail(cmmn::ErrorCode::InvalidSpec, "classifier must be 'logistic' or 'centroid'");

  const auto result = cmmn::bench::evaluate(data, strategies, config);

  if (!out_csv.empty()) cmmn::io::write_file_atomic(out_csv, cmmn::bench::to_csv(result));

  json echo = {{"command", "bench"},
               {"synthetic", synth.to_json(seed)},
               {"trials", trials},
               {"strategies", strategies_text},
               {"target", target_text},
               {"filter_size", filter_size},
               {"test_fraction", test_fraction},
               {"classifier", classifier_text},
               {"out_csv", out_csv},
               {"out_json", out_json}};
  if (!out_json.empty()) {
    json summary = {{"config", echo}, {"aggregates", aggregates_json(result)}};
    cmmn::io::write_file_atomic(out_json, summary.dump(2) + "\n");
  }
  echo["aggregates"] = aggregates_json(result);
  std::cout << echo.dump(2) << "\n";
  return kExitOk;
}

int run_sweep(const SyntheticFlags& synth, std::uint64_t seed, std::size_t trials,
              const std::string& sizes_text, const std::string& target_text,
              double test_fraction, const std::string& out_csv, const std::string& out_json) {
  const cmmn::TargetSpec target = parse_target(target_text);
  std::vector<std::size_t> sizes;
  for (const auto& tok : split_csv_list(sizes_text))
    sizes.push_back(static_cast<std::size_t>(std::stoull(tok)));

  const auto data = cmmn::bench::generate(synth.spec(seed));
  cmmn::bench::EvalConfig config;
  config.trials = trials;
  config.seed = seed;
  config.test_fraction = test_fraction;

  const auto points = cmmn::bench::sensitivity_sweep(data, sizes, config, target);

  if (!out_csv.empty()) {
    // Name rows by target only; the filter size is its own column.
    const std::string label = "cmmn:" + cmmn::target_kind_name(target.kind);
    cmmn::io::write_file_atomic(out_csv, cmmn::bench::sweep_to_csv(points, label));
  }

  json curve = json::array();
  for (const auto& p : points)
    curve.push_back({{"filter_size", p.filter_size},
                     {"mean_delta_bacc", p.mean_delta_bacc},
                     {"mean_bacc", p.mean_bacc},
                     {"baseline_mean_bacc", p.baseline_mean_bacc},
                     {"per_trial_delta", p.per_trial_delta}});

  json echo = {{"command", "sweep"},
               {"synthetic", synth.to_json(seed)},
               {"trials", trials},
               {"filter_sizes", sizes_text},
               {"target", target_text},
               {"test_fraction", test_fraction},
               {"out_csv", out_csv},
               {"out_json", out_json}};
  if (!out_json.empty()) {
    json summary = {{"config", echo}, {"curve", curve}};
    cmmn::io::write_file_atomic(out_json, summary.dump(2) + "\n");
  }
  echo["curve"] = curve;
  std::cout << echo.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convolutional Monge mapping normalization for multi-domain signals"};
  app.require_subcommand(1);

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit a normalizer on source domains");
  DatasetFlags fit_data;
  WelchFlags fit_welch;
  std::string fit_target = "barycenter";
  double fit_eps_floor = 1e-12;
  std::string fit_out = "model.json";
  std::string fit_filters;
  fit_cmd->add_option("--data", fit_data.manifest, "Dataset manifest")->required();
  fit_cmd->add_option("--filter-size", fit_welch.filter_size, "Filter length F");
  fit_cmd->add_option("--window", fit_welch.window, "Welch window: rectangular|hann");
  fit_cmd->add_option("--overlap", fit_welch.overlap, "Welch overlap fraction in [0,1)");
  fit_cmd->add_flag("--no-center", fit_welch.no_center, "Skip per-window mean removal");
  fit_cmd->add_option("--target", fit_target,
                      "Target spectrum: barycenter|whitening|powerlaw[:a]|psd:<file>");
  fit_cmd->add_option("--eps-floor", fit_eps_floor, "Relative floor for source PSD bins");
  fit_cmd->add_option("--out", fit_out, "Output model path");
  fit_cmd->add_option("--save-filters", fit_filters, "Also write the per-domain filter bank");

  // transform
  auto* transform_cmd = app.add_subcommand("transform", "Normalize a dataset with a fitted model");
  std::string transform_model;
  DatasetFlags transform_data;
  std::string transform_out;
  std::string transform_mode = "fft";
  transform_cmd->add_option("--model", transform_model, "Fitted model JSON")->required();
  transform_cmd->add_option("--data", transform_data.manifest, "Dataset manifest")->required();
  transform_cmd->add_option("--out", transform_out, "Output directory")->required();
  transform_cmd->add_option("--mode", transform_mode, "Convolution path: fft|direct");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Score normalization strategies on synthetic data");
  SyntheticFlags bench_synth;
  std::uint64_t bench_seed = 0;
  std::size_t bench_trials = 10;
  std::string bench_strategies = "none,sample_zscore,cmmn";
  std::string bench_target = "barycenter";
  std::size_t bench_filter_size = 64;
  double bench_test_fraction = 0.5;
  std::string bench_classifier = "logistic";
  std::string bench_out_csv, bench_out_json;
  add_synthetic_flags(bench_cmd, bench_synth);
  bench_cmd->add_option("--seed", bench_seed, "Master seed");
  bench_cmd->add_option("--trials", bench_trials, "Evaluation trials");
  bench_cmd->add_option("--strategies", bench_strategies,
                        "Comma list: none|sample_zscore|session_zscore|cmmn[:target[:F]]");
  bench_cmd->add_option("--target", bench_target, "Default cmmn target");
  bench_cmd->add_option("--filter-size", bench_filter_size, "Default cmmn filter size");
  bench_cmd->add_option("--test-fraction", bench_test_fraction, "Held-out domain fraction");
  bench_cmd->add_option("--classifier", bench_classifier, "logistic|centroid");
  bench_cmd->add_option("--out-csv", bench_out_csv, "Per-domain results CSV");
  bench_cmd->add_option("--out-json", bench_out_json, "Summary JSON");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Delta-BACC versus filter size");
  SyntheticFlags sweep_synth;
  std::uint64_t sweep_seed = 0;
  std::size_t sweep_trials = 5;
  std::string sweep_sizes = "1,8,32,128";
  std::string sweep_target = "barycenter";
  double sweep_test_fraction = 0.5;
  std::string sweep_out_csv, sweep_out_json;
  add_synthetic_flags(sweep_cmd, sweep_synth);
  sweep_cmd->add_option("--seed", sweep_seed, "Master seed");
  sweep_cmd->add_option("--trials", sweep_trials, "Evaluation trials");
  sweep_cmd->add_option("--filter-sizes", sweep_sizes, "Comma list of filter sizes");
  sweep_cmd->add_option("--target", sweep_target, "cmmn target spectrum");
  sweep_cmd->add_option("--test-fraction", sweep_test_fraction, "Held-out domain fraction");
  sweep_cmd->add_option("--out-csv", sweep_out_csv, "Per-trial sweep CSV");
  sweep_cmd->add_option("--out-json", sweep_out_json, "Sweep summary JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (fit_cmd->parsed())
      return run_fit(fit_data, fit_welch, fit_target, fit_eps_floor, fit_out, fit_filters);
    if (transform_cmd->parsed())
      return run_transform(transform_model, transform_data, transform_out, transform_mode);
    if (bench_cmd->parsed())
      return run_bench(bench_synth, bench_seed, bench_trials, bench_strategies, bench_target,
                       bench_filter_size, bench_test_fraction, bench_classifier, bench_out_csv,
                       bench_out_json);
    if (sweep_cmd->parsed())
      return run_sweep(sweep_synth, sweep_seed, sweep_trials, sweep_sizes, sweep_target,
                       sweep_test_fraction, sweep_out_csv, sweep_out_json);
  } catch (const cmmn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_io() ? kExitIo : kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
