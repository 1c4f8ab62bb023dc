#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ordq/metrics.hpp"
#include "ordq/protocols.hpp"
#include "ordq/quantifiers.hpp"

namespace ordq {

// Inline synthetic-dataset request used when no dataset path is given.
struct SynthSpec {
  int classes = 5;
  Index features = 4;
  Index size = 20000;
  double overlap = 1.0;
  std::optional<std::vector<double>> prevalence;  // default uniform
};

struct ExperimentConfig {
  std::string dataset_path;  // empty: generate from `synth`
  SynthSpec synth;

  Index train_size = 2000;
  Index val_pool_size = 4000;
  Index test_pool_size = 8000;

  int val_samples = 300;
  int test_samples = 1000;
  Index sample_size = 1000;
  std::optional<double> retain_percent;  // adds the APP-OQ protocol

  std::vector<Method> methods;
  Measure measure = Measure::nmd;
  int cv_folds = 10;
  TrainConfig classifier;

  std::optional<std::uint64_t> seed;  // required; determinism is mandatory
  std::string output_dir = ".";

  void validate() const;  // throws ConfigError
};

// Parses the key-value config format (see README); unknown keys and
// malformed values throw ConfigError with the line number.
ExperimentConfig parse_experiment_config(const std::string& text);

struct MethodResult {
  Method method;
  Hyperparams chosen;
  ScoreSeries scores;       // per test sample of the protocol
  Summary summary{0.0, 0.0};
  double p_vs_best = 1.0;   // two-sided Wilcoxon against the best method
  bool is_best = false;
};

struct ProtocolReport {
  std::string protocol;  // "APP" or "APP-OQ(x%)"
  std::vector<int> sample_ids;  // draw indices of the evaluated samples
  std::vector<MethodResult> methods;
  double mean_xi1 = 0.0;  // realized prevalence jaggedness over the samples
};

struct EvaluationReport {
  std::vector<ProtocolReport> protocols;
  long val_rejections = 0;
  long test_rejections = 0;
};

// Runs split -> sample generation -> per-protocol grid selection on
// validation samples -> test evaluation -> significance analysis, and
// writes scores.csv, summary.csv, summary.txt, significance.csv,
// selected.csv, and protocol_stats.csv under cfg.output_dir. Every output
// is a pure function of (config, input files, seed).
EvaluationReport run_experiment(const ExperimentConfig& cfg);

// Monte-Carlo mean jaggedness of uniform prevalence draws, for the full
// protocol and for each retained percentage; formatted as an aligned table.
std::string protocol_stats_table(int n_classes, int n_draws,
                                 const std::vector<double>& percents,
                                 std::uint64_t seed);

}  // namespace ordq
