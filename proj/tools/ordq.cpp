// Command-line front end: synthetic data generation, splitting, APP sample
// drawing, quantifier fitting, prevalence estimation, evaluation, and the
// end-to-end experiment pipeline.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ordq/error.hpp"
#include "ordq/experiment.hpp"
#include "ordq/io.hpp"
#include "ordq/metrics.hpp"
#include "ordq/protocols.hpp"
#include "ordq/quantifiers.hpp"

namespace {

using namespace ordq;

Distribution parse_prevalence(const std::string& text, int n_classes) {
  if (text.empty()) return Distribution::uniform(n_classes);
  std::vector<double> values;
  std::string token;
  for (char c : text + ",") {
    if (c == ',') {
      if (!token.empty()) {
        values.push_back(std::stod(token));
        token.clear();
      }
    } else {
      token.push_back(c);
    }
  }
  if (static_cast<int>(values.size()) != n_classes) {
    throw ConfigError("prevalence needs exactly " + std::to_string(n_classes) +
                      " comma-separated values");
  }
  Vector v(n_classes);
  for (int i = 0; i < n_classes; ++i) v[i] = values[static_cast<std::size_t>(i)];
  return Distribution(std::move(v));
}

Hyperparams parse_hyperparams(const std::vector<std::string>& pairs) {
  Hyperparams h;
  for (const std::string& pair : pairs) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("hyperparameter must be key=value: " + pair);
    }
    h[pair.substr(0, eq)] = std::stod(pair.substr(eq + 1));
  }
  return h;
}

int run(int argc, char** argv) {
  CLI::App app{"ordq: ordinal quantification toolkit"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic ordinal dataset");
  int s_classes = 5;
  Index s_features = 4;
  Index s_size = 10000;
  double s_overlap = 1.0;
  std::string s_prevalence;
  std::uint64_t s_seed = 0;
  std::string s_out;
  synth->add_option("--classes", s_classes, "number of ordered classes")->required();
  synth->add_option("--features", s_features, "feature dimension")->required();
  synth->add_option("--size", s_size, "number of items")->required();
  synth->add_option("--overlap", s_overlap, "shared class spread (std dev)");
  synth->add_option("--prevalence", s_prevalence, "comma-separated class prevalences");
  synth->add_option("--seed", s_seed, "random seed")->required();
  synth->add_option("--out", s_out, "output CSV path")->required();

  // split
  auto* split = app.add_subcommand("split", "stratified train/val/test split");
  std::string sp_data, sp_outdir;
  Index sp_train = 0, sp_val = 0, sp_test = 0;
  std::uint64_t sp_seed = 0;
  split->add_option("--data", sp_data, "dataset CSV")->required();
  split->add_option("--train", sp_train, "training set size")->required();
  split->add_option("--val", sp_val, "validation pool size")->required();
  split->add_option("--test", sp_test, "test pool size")->required();
  split->add_option("--seed", sp_seed, "random seed")->required();
  split->add_option("--outdir", sp_outdir, "directory for train/val/test CSVs")->required();

  // sample
  auto* sample = app.add_subcommand("sample", "draw APP evaluation samples from a pool");
  std::string sm_pool, sm_out;
  int sm_count = 100;
  Index sm_size = 1000;
  std::optional<double> sm_retain;
  std::uint64_t sm_seed = 0;
  sample->add_option("--pool", sm_pool, "pool CSV")->required();
  sample->add_option("--samples", sm_count, "number of samples")->required();
  sample->add_option("--sample-size", sm_size, "items per sample")->required();
  sample->add_option("--retain", sm_retain, "keep only the x% smoothest samples");
  sample->add_option("--seed", sm_seed, "random seed")->required();
  sample->add_option("--out", sm_out, "output samples JSON")->required();

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit a quantifier");
  std::string f_train, f_method, f_out;
  std::vector<std::string> f_params;
  int f_folds = 10;
  std::uint64_t f_seed = 0;
  TrainConfig f_clf;
  fit_cmd->add_option("--train", f_train, "training CSV")->required();
  fit_cmd->add_option("--method", f_method, "method name (e.g. PACC, o-PACC)")->required();
  fit_cmd->add_option("--hyperparam", f_params, "key=value, repeatable");
  fit_cmd->add_option("--cv-folds", f_folds, "cross-validation folds");
  fit_cmd->add_option("--l2", f_clf.l2_strength, "classifier ridge strength");
  fit_cmd->add_flag("--balanced", f_clf.class_weighting, "inverse-frequency class weights");
  fit_cmd->add_option("--max-epochs", f_clf.max_epochs, "classifier epoch cap");
  fit_cmd->add_option("--tol", f_clf.tol, "classifier gradient tolerance");
  fit_cmd->add_option("--seed", f_seed, "random seed")->required();
  fit_cmd->add_option("--out", f_out, "output model file")->required();

  // quantify
  auto* quant = app.add_subcommand("quantify", "estimate prevalences of a sample");
  std::string q_model, q_sample;
  quant->add_option("--model", q_model, "fitted model file")->required();
  quant->add_option("--sample", q_sample, "sample CSV (label column ignored)")->required();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "score one model over drawn samples");
  std::string e_model, e_pool, e_samples, e_measure = "NMD", e_out;
  eval->add_option("--model", e_model, "fitted model file")->required();
  eval->add_option("--pool", e_pool, "pool CSV the samples index into")->required();
  eval->add_option("--samples", e_samples, "samples JSON")->required();
  eval->add_option("--measure", e_measure, "NMD or RNOD");
  eval->add_option("--out", e_out, "per-sample scores CSV")->required();

  // experiment
  auto* exp = app.add_subcommand("experiment", "run the full evaluation pipeline");
  std::string x_config;
  std::optional<std::uint64_t> x_seed;
  std::string x_outdir;
  exp->add_option("--config", x_config, "experiment config file")->required();
  exp->add_option("--seed", x_seed, "override the config seed");
  exp->add_option("--output-dir", x_outdir, "override the output directory");

  // protocol-stats
  auto* stats = app.add_subcommand("protocol-stats", "mean jaggedness per protocol");
  int st_classes = 5;
  int st_draws = 10000;
  std::vector<double> st_percents = {66, 50, 33, 20, 5};
  std::uint64_t st_seed = 0;
  stats->add_option("--classes", st_classes, "number of classes")->required();
  stats->add_option("--draws", st_draws, "Monte-Carlo draws");
  stats->add_option("--percents", st_percents, "APP-OQ percentages")->delimiter(',');
  stats->add_option("--seed", st_seed, "random seed")->required();

  CLI11_PARSE(app, argc, argv);

  if (*synth) {
    const Distribution prevalence = parse_prevalence(s_prevalence, s_classes);
    write_dataset_csv(
        synth_ordinal(s_classes, s_features, s_size, s_overlap, prevalence, s_seed),
        s_out);
  } else if (*split) {
    const LabeledDataset data = read_dataset_csv(sp_data);
    const SplitIndices idx =
        stratified_split(data, sp_train, sp_val, sp_test, sp_seed);
    namespace fs = std::filesystem;
    fs::create_directories(sp_outdir);
    write_dataset_csv(data.subset(idx.train), (fs::path(sp_outdir) / "train.csv").string());
    write_dataset_csv(data.subset(idx.validation), (fs::path(sp_outdir) / "val.csv").string());
    write_dataset_csv(data.subset(idx.test), (fs::path(sp_outdir) / "test.csv").string());
  } else if (*sample) {
    const LabeledDataset pool = read_dataset_csv(sm_pool);
    AppDraw draw = draw_app(pool, ProtocolConfig{sm_count, sm_size, sm_retain, sm_seed});
    if (sm_retain) draw.samples = filter_smoothest(draw.samples, *sm_retain);
    write_samples_json(draw, sm_out);
  } else if (*fit_cmd) {
    const LabeledDataset data = read_dataset_csv(f_train);
    MethodSpec spec{parse_method(f_method), parse_hyperparams(f_params), f_clf};
    write_text_file(f_out, serialize(fit(spec, data, f_folds, f_seed)));
  } else if (*quant) {
    const FittedQuantifier fq = deserialize(read_text_file(q_model));
    const Matrix features = read_features_csv(q_sample);
    const Distribution estimate = quantify(fq, features);
    std::string line;
    for (Index i = 0; i < estimate.size(); ++i) {
      if (i > 0) line += " ";
      line += format_double(estimate[i]);
    }
    std::cout << line << "\n";
  } else if (*eval) {
    const FittedQuantifier fq = deserialize(read_text_file(e_model));
    const LabeledDataset pool = read_dataset_csv(e_pool);
    const AppDraw draw = read_samples_json(e_samples);
    const Measure measure = parse_measure(e_measure);
    ScoreSeries series{method_name(fq.spec.method), {}, measure};
    std::string csv = "sample,score\n";
    for (std::size_t i = 0; i < draw.samples.size(); ++i) {
      const DrawnSample& s = draw.samples[i];
      const Distribution estimate = quantify(fq, pool.subset(s.indices).features);
      const double score = measure == Measure::nmd
                               ? nmd(s.realized_prevalence, estimate)
                               : rnod(s.realized_prevalence, estimate);
      series.scores.push_back(score);
      csv += std::to_string(i) + "," + format_double(score) + "\n";
    }
    write_text_file(e_out, csv);
    const Summary summary = summarize(series);
    std::cout << measure_name(measure) << " mean=" << format_double(summary.mean)
              << " std=" << format_double(summary.stddev) << "\n";
  } else if (*exp) {
    ExperimentConfig cfg = parse_experiment_config(read_text_file(x_config));
    if (x_seed) cfg.seed = *x_seed;
    if (!x_outdir.empty()) cfg.output_dir = x_outdir;
    run_experiment(cfg);
  } else if (*stats) {
    std::cout << protocol_stats_table(st_classes, st_draws, st_percents, st_seed);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const UnknownMethod& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
