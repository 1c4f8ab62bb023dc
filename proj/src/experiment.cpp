#include "ordq/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

#include "ordq/error.hpp"
#include "ordq/io.hpp"
#include "ordq/rng.hpp"

namespace ordq {

void ExperimentConfig::validate() const {
  if (!seed) throw ConfigError("seed is required");
  if (methods.empty()) throw ConfigError("at least one method is required");
  if (val_samples < 1 || test_samples < 1) {
    throw ConfigError("sample counts must be positive");
  }
  if (sample_size < 1) throw ConfigError("sample_size must be positive");
  if (retain_percent && (*retain_percent <= 0.0 || *retain_percent > 100.0)) {
    throw ConfigError("retain_percent must be in (0, 100]");
  }
  if (cv_folds < 2) throw ConfigError("cv_folds must be at least 2");
  if (output_dir.empty()) throw ConfigError("output_dir must be set");
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::string word;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!word.empty()) out.push_back(std::exchange(word, ""));
    } else {
      word.push_back(c);
    }
  }
  if (!word.empty()) out.push_back(word);
  return out;
}

double config_number(const std::string& value, int line_no) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line_no) +
                      ": expected a number, got '" + value + "'");
  }
}

bool config_bool(const std::string& value, int line_no) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("line " + std::to_string(line_no) +
                    ": expected true/false, got '" + value + "'");
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool saw_version = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.resize(comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty value");
    }

    if (key == "version") {
      if (config_number(value, line_no) != 1.0) {
        throw ConfigError("unsupported config version: " + value);
      }
      saw_version = true;
    } else if (key == "dataset") {
      cfg.dataset_path = value;
    } else if (key == "synth.classes") {
      cfg.synth.classes = static_cast<int>(config_number(value, line_no));
    } else if (key == "synth.features") {
      cfg.synth.features = static_cast<Index>(config_number(value, line_no));
    } else if (key == "synth.size") {
      cfg.synth.size = static_cast<Index>(config_number(value, line_no));
    } else if (key == "synth.overlap") {
      cfg.synth.overlap = config_number(value, line_no);
    } else if (key == "synth.prevalence") {
      std::vector<double> p;
      for (const auto& word : split_words(value)) {
        p.push_back(config_number(word, line_no));
      }
      cfg.synth.prevalence = std::move(p);
    } else if (key == "train_size") {
      cfg.train_size = static_cast<Index>(config_number(value, line_no));
    } else if (key == "val_pool_size") {
      cfg.val_pool_size = static_cast<Index>(config_number(value, line_no));
    } else if (key == "test_pool_size") {
      cfg.test_pool_size = static_cast<Index>(config_number(value, line_no));
    } else if (key == "val_samples") {
      cfg.val_samples = static_cast<int>(config_number(value, line_no));
    } else if (key == "test_samples") {
      cfg.test_samples = static_cast<int>(config_number(value, line_no));
    } else if (key == "sample_size") {
      cfg.sample_size = static_cast<Index>(config_number(value, line_no));
    } else if (key == "retain_percent") {
      cfg.retain_percent = config_number(value, line_no);
    } else if (key == "methods") {
      cfg.methods.clear();
      for (const auto& word : split_words(value)) {
        cfg.methods.push_back(parse_method(word));
      }
    } else if (key == "measure") {
      cfg.measure = parse_measure(value);
    } else if (key == "cv_folds") {
      cfg.cv_folds = static_cast<int>(config_number(value, line_no));
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(config_number(value, line_no));
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else if (key == "classifier.l2") {
      cfg.classifier.l2_strength = config_number(value, line_no);
    } else if (key == "classifier.balanced") {
      cfg.classifier.class_weighting = config_bool(value, line_no);
    } else if (key == "classifier.max_epochs") {
      cfg.classifier.max_epochs =
          static_cast<int>(config_number(value, line_no));
    } else if (key == "classifier.tol") {
      cfg.classifier.tol = config_number(value, line_no);
    } else {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    }
  }
  if (!saw_version) throw ConfigError("config must declare 'version = 1'");
  return cfg;
}

namespace {

double score_one(Measure measure, const Distribution& truth,
                 const Distribution& estimate) {
  return measure == Measure::nmd ? nmd(truth, estimate)
                                 : rnod(truth, estimate);
}

std::string hyperparams_text(const Hyperparams& h) {
  if (h.empty()) return "-";
  std::string out;
  for (const auto& [key, value] : h) {
    if (!out.empty()) out += " ";
    out += key + "=" + format_double(value);
  }
  return out;
}

// Per-method grid state: scores are computed lazily over the full draw and
// shared between protocols, which only differ by the subset they read.
struct GridEntry {
  Hyperparams assignment;
  FittedQuantifier fitted;
  std::optional<std::vector<double>> val_scores;
  std::optional<std::vector<double>> test_scores;
};

std::vector<double> score_samples(const FittedQuantifier& fq,
                                  const LabeledDataset& pool,
                                  const std::vector<DrawnSample>& samples,
                                  Measure measure) {
  std::vector<double> scores;
  scores.reserve(samples.size());
  for (const DrawnSample& s : samples) {
    const Distribution estimate =
        quantify(fq, pool.subset(s.indices).features);
    scores.push_back(score_one(measure, s.realized_prevalence, estimate));
  }
  return scores;
}

double mean_of(const std::vector<double>& values,
               const std::vector<int>& subset) {
  double total = 0.0;
  for (int i : subset) total += values[static_cast<std::size_t>(i)];
  return total / static_cast<double>(subset.size());
}

std::vector<int> filtered_ids(const std::vector<DrawnSample>& samples,
                              std::optional<double> percent) {
  std::vector<int> ids(samples.size());
  std::iota(ids.begin(), ids.end(), 0);
  if (!percent) return ids;
  std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
    return jaggedness(samples[static_cast<std::size_t>(a)].realized_prevalence,
                      1) <
           jaggedness(samples[static_cast<std::size_t>(b)].realized_prevalence,
                      1);
  });
  const auto keep = static_cast<std::size_t>(std::ceil(
      *percent / 100.0 * static_cast<double>(samples.size())));
  ids.resize(std::min(keep, ids.size()));
  std::sort(ids.begin(), ids.end());
  return ids;
}

double mean_xi1_of(const std::vector<DrawnSample>& samples,
                   const std::vector<int>& ids) {
  double total = 0.0;
  for (int i : ids) {
    total += jaggedness(samples[static_cast<std::size_t>(i)].realized_prevalence, 1);
  }
  return total / static_cast<double>(ids.size());
}

}  // namespace

EvaluationReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::uint64_t seed = *cfg.seed;

  LabeledDataset data;
  if (cfg.dataset_path.empty()) {
    const Distribution prevalence =
        cfg.synth.prevalence
            ? Distribution(Eigen::Map<const Vector>(
                  cfg.synth.prevalence->data(),
                  static_cast<Index>(cfg.synth.prevalence->size())))
            : Distribution::uniform(cfg.synth.classes);
    data = synth_ordinal(cfg.synth.classes, cfg.synth.features, cfg.synth.size,
                         cfg.synth.overlap, prevalence,
                         detail::splitmix64(seed ^ 0x73796e7468ULL));
  } else {
    data = read_dataset_csv(cfg.dataset_path);
  }

  const SplitIndices split =
      stratified_split(data, cfg.train_size, cfg.val_pool_size,
                       cfg.test_pool_size, detail::splitmix64(seed ^ 0x73706c6974ULL));
  const LabeledDataset train_set = data.subset(split.train);
  const LabeledDataset val_pool = data.subset(split.validation);
  const LabeledDataset test_pool = data.subset(split.test);

  ProtocolConfig val_protocol{cfg.val_samples, cfg.sample_size,
                              cfg.retain_percent,
                              detail::splitmix64(seed ^ 0x76616cULL)};
  ProtocolConfig test_protocol{cfg.test_samples, cfg.sample_size,
                               cfg.retain_percent,
                               detail::splitmix64(seed ^ 0x74657374ULL)};
  const AppDraw val_draw = draw_app(val_pool, val_protocol);
  const AppDraw test_draw = draw_app(test_pool, test_protocol);

  const FitContext context = make_fit_context(
      train_set, cfg.classifier, cfg.cv_folds,
      detail::splitmix64(seed ^ 0x666974ULL));

  // Grid fits per method; scores fill in lazily as protocols request them.
  std::vector<std::vector<GridEntry>> grids;
  grids.reserve(cfg.methods.size());
  for (Method method : cfg.methods) {
    std::vector<GridEntry> entries;
    for (const Hyperparams& assignment : default_grid(method)) {
      MethodSpec spec{method, assignment, cfg.classifier};
      entries.push_back(GridEntry{assignment,
                                  fit_with_context(spec, train_set, context),
                                  std::nullopt, std::nullopt});
    }
    grids.push_back(std::move(entries));
  }

  struct ProtocolPlan {
    std::string name;
    std::vector<int> val_ids;
    std::vector<int> test_ids;
  };
  std::vector<ProtocolPlan> plans;
  plans.push_back(ProtocolPlan{"APP", filtered_ids(val_draw.samples, std::nullopt),
                               filtered_ids(test_draw.samples, std::nullopt)});
  if (cfg.retain_percent) {
    std::string name = "APP-OQ(" + format_double(*cfg.retain_percent) + "%)";
    plans.push_back(
        ProtocolPlan{std::move(name),
                     filtered_ids(val_draw.samples, cfg.retain_percent),
                     filtered_ids(test_draw.samples, cfg.retain_percent)});
  }

  EvaluationReport report;
  report.val_rejections = val_draw.rejections;
  report.test_rejections = test_draw.rejections;

  for (const ProtocolPlan& plan : plans) {
    ProtocolReport protocol;
    protocol.protocol = plan.name;
    protocol.sample_ids = plan.test_ids;
    protocol.mean_xi1 = mean_xi1_of(test_draw.samples, plan.test_ids);

    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
      auto& grid = grids[m];
      // Model selection: mean validation score over this protocol's
      // samples; ties keep the earlier grid assignment.
      std::size_t chosen = 0;
      double chosen_mean = std::numeric_limits<double>::infinity();
      for (std::size_t g = 0; g < grid.size(); ++g) {
        if (!grid[g].val_scores) {
          grid[g].val_scores = score_samples(grid[g].fitted, val_pool,
                                             val_draw.samples, cfg.measure);
        }
        const double mean = mean_of(*grid[g].val_scores, plan.val_ids);
        if (mean < chosen_mean) {
          chosen_mean = mean;
          chosen = g;
        }
      }
      auto& entry = grid[chosen];
      if (!entry.test_scores) {
        entry.test_scores = score_samples(entry.fitted, test_pool,
                                          test_draw.samples, cfg.measure);
      }
      MethodResult result{cfg.methods[m], entry.assignment, ScoreSeries{},
                          Summary{0.0, 0.0}, 1.0, false};
      result.scores.method = method_name(cfg.methods[m]);
      result.scores.measure = cfg.measure;
      for (int i : plan.test_ids) {
        result.scores.scores.push_back(
            (*entry.test_scores)[static_cast<std::size_t>(i)]);
      }
      result.summary = summarize(result.scores);
      protocol.methods.push_back(std::move(result));
    }

    // Best method by mean; ties keep config order. Wilcoxon of every other
    // method against it; elementwise-identical series count as p = 1.
    std::size_t best = 0;
    for (std::size_t m = 1; m < protocol.methods.size(); ++m) {
      if (protocol.methods[m].summary.mean <
          protocol.methods[best].summary.mean) {
        best = m;
      }
    }
    protocol.methods[best].is_best = true;
    for (std::size_t m = 0; m < protocol.methods.size(); ++m) {
      if (m == best) {
        protocol.methods[m].p_vs_best = 1.0;
        continue;
      }
      try {
        protocol.methods[m].p_vs_best = wilcoxon_signed_rank(
            protocol.methods[m].scores, protocol.methods[best].scores);
      } catch (const TooFewPairs&) {
        protocol.methods[m].p_vs_best = 1.0;
      }
    }
    report.protocols.push_back(std::move(protocol));
  }

  // Report files.
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + cfg.output_dir);
  const auto path = [&](const char* name) {
    return (fs::path(cfg.output_dir) / name).string();
  };

  {
    std::string csv = "protocol,method,sample,score\n";
    for (const ProtocolReport& protocol : report.protocols) {
      for (const MethodResult& method : protocol.methods) {
        for (std::size_t i = 0; i < method.scores.scores.size(); ++i) {
          csv += protocol.protocol + "," + method.scores.method + "," +
                 std::to_string(protocol.sample_ids[i]) + "," +
                 format_double(method.scores.scores[i]) + "\n";
        }
      }
    }
    write_text_file(path("scores.csv"), csv);
  }
  {
    std::string csv = "method,protocol,mean,std,best,p_value_vs_best\n";
    for (const ProtocolReport& protocol : report.protocols) {
      for (const MethodResult& method : protocol.methods) {
        csv += method.scores.method + "," + protocol.protocol + "," +
               format_double(method.summary.mean) + "," +
               format_double(method.summary.stddev) + "," +
               (method.is_best ? "1" : "0") + "," +
               format_double(method.p_vs_best) + "\n";
      }
    }
    write_text_file(path("summary.csv"), csv);
  }
  {
    std::ostringstream table;
    table << "measure: " << measure_name(cfg.measure)
          << " (mean over samples; population std)\n";
    for (const ProtocolReport& protocol : report.protocols) {
      table << "\n" << protocol.protocol
            << "  [samples=" << protocol.sample_ids.size()
            << " mean_xi1=" << format_double(protocol.mean_xi1) << "]\n";
      for (const MethodResult& method : protocol.methods) {
        char line[160];
        std::snprintf(line, sizeof(line),
                      "  %-8s %.6f +- %.6f  %s  p=%.6f  [%s]\n",
                      method.scores.method.c_str(), method.summary.mean,
                      method.summary.stddev, method.is_best ? "*" : " ",
                      method.p_vs_best, hyperparams_text(method.chosen).c_str());
        table << line;
      }
    }
    write_text_file(path("summary.txt"), table.str());
  }
  {
    std::string csv = "protocol,method,best_method,p_value,significant_at_0.01\n";
    for (const ProtocolReport& protocol : report.protocols) {
      std::string best_name;
      for (const MethodResult& method : protocol.methods) {
        if (method.is_best) best_name = method.scores.method;
      }
      for (const MethodResult& method : protocol.methods) {
        csv += protocol.protocol + "," + method.scores.method + "," +
               best_name + "," + format_double(method.p_vs_best) + "," +
               (!method.is_best && method.p_vs_best < 0.01 ? "1" : "0") + "\n";
      }
    }
    write_text_file(path("significance.csv"), csv);
  }
  {
    std::string csv = "protocol,method,hyperparams\n";
    for (const ProtocolReport& protocol : report.protocols) {
      for (const MethodResult& method : protocol.methods) {
        csv += protocol.protocol + "," + method.scores.method + "," +
               hyperparams_text(method.chosen) + "\n";
      }
    }
    write_text_file(path("selected.csv"), csv);
  }
  {
    std::string csv = "protocol,samples,mean_xi1,pool_rejections\n";
    for (const ProtocolReport& protocol : report.protocols) {
      csv += protocol.protocol + "," +
             std::to_string(protocol.sample_ids.size()) + "," +
             format_double(protocol.mean_xi1) + "," +
             std::to_string(report.test_rejections) + "\n";
    }
    write_text_file(path("protocol_stats.csv"), csv);
  }

  return report;
}

std::string protocol_stats_table(int n_classes, int n_draws,
                                 const std::vector<double>& percents,
                                 std::uint64_t seed) {
  if (n_classes < 3) throw ConfigError("protocol stats require n >= 3");
  if (n_draws < 1) throw ConfigError("need at least one draw");
  Rng rng(seed);
  std::vector<double> draws(static_cast<std::size_t>(n_draws));
  for (auto& x : draws) x = jaggedness(sample_uniform(n_classes, rng), 1);
  std::vector<double> sorted = draws;
  std::sort(sorted.begin(), sorted.end());

  std::ostringstream out;
  out << "protocol        mean_xi1   (n=" << n_classes << ", draws=" << n_draws
      << ")\n";
  char line[80];
  const double app_mean =
      std::accumulate(draws.begin(), draws.end(), 0.0) /
      static_cast<double>(draws.size());
  std::snprintf(line, sizeof(line), "APP             %.4f\n", app_mean);
  out << line;
  for (double percent : percents) {
    if (percent <= 0.0 || percent > 100.0) {
      throw ConfigError("percent must be in (0, 100]");
    }
    const auto keep = static_cast<std::size_t>(
        std::ceil(percent / 100.0 * static_cast<double>(sorted.size())));
    const double mean =
        std::accumulate(sorted.begin(),
                        sorted.begin() + static_cast<std::ptrdiff_t>(keep),
                        0.0) /
        static_cast<double>(keep);
    std::snprintf(line, sizeof(line), "APP-OQ(%g%%)%*s%.4f\n", percent,
                  static_cast<int>(percent >= 10 ? 5 : 6), "", mean);
    out << line;
  }
  return out.str();
}

}  // namespace ordq
