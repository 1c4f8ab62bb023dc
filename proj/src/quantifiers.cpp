#include "ordq/quantifiers.hpp"

#include <algorithm>

#include <json.hpp>

#include "ordq/error.hpp"
#include "ordq/rng.hpp"

namespace ordq {

namespace {

struct MethodInfo {
  Method method;
  const char* name;
};

constexpr MethodInfo kMethods[] = {
    {Method::cc, "CC"},       {Method::pcc, "PCC"},
    {Method::acc, "ACC"},     {Method::pacc, "PACC"},
    {Method::hdx, "HDx"},     {Method::hdy, "HDy"},
    {Method::sld_em, "SLD"},  {Method::ibu_em, "IBU"},
    {Method::run, "RUN"},     {Method::edy, "EDy"},
    {Method::pdf, "PDF"},     {Method::o_acc, "o-ACC"},
    {Method::o_pacc, "o-PACC"}, {Method::o_hdx, "o-HDx"},
    {Method::o_hdy, "o-HDy"}, {Method::o_sld, "o-SLD"},
    {Method::o_edy, "o-EDy"}, {Method::o_pdf, "o-PDF"},
};

}  // namespace

std::string method_name(Method m) {
  for (const auto& info : kMethods) {
    if (info.method == m) return info.name;
  }
  throw UnknownMethod("unreachable method");
}

Method parse_method(const std::string& name) {
  for (const auto& info : kMethods) {
    if (name == info.name) return info.method;
  }
  throw UnknownMethod("unknown method: " + name);
}

std::vector<Method> all_methods() {
  std::vector<Method> out;
  for (const auto& info : kMethods) out.push_back(info.method);
  return out;
}

bool is_ordinal_variant(Method m) {
  switch (m) {
    case Method::o_acc:
    case Method::o_pacc:
    case Method::o_hdx:
    case Method::o_hdy:
    case Method::o_sld:
    case Method::o_edy:
    case Method::o_pdf:
      return true;
    default:
      return false;
  }
}

Method base_method(Method m) {
  switch (m) {
    case Method::o_acc: return Method::acc;
    case Method::o_pacc: return Method::pacc;
    case Method::o_hdx: return Method::hdx;
    case Method::o_hdy: return Method::hdy;
    case Method::o_sld: return Method::sld_em;
    case Method::o_edy: return Method::edy;
    case Method::o_pdf: return Method::pdf;
    default: return m;
  }
}

std::vector<std::string> legal_hyperparams(Method m) {
  switch (m) {
    case Method::cc:
    case Method::pcc:
    case Method::acc:
    case Method::pacc:
    case Method::sld_em:
      return {};
    case Method::hdx:
    case Method::hdy:
      return {"bins"};
    case Method::ibu_em:
    case Method::o_sld:
      return {"poly_order", "interp_factor"};
    case Method::run:
      return {"tau"};
    case Method::edy:
      return {"cap"};
    case Method::pdf:
      return {"B"};
    case Method::o_acc:
    case Method::o_pacc:
      return {"tau"};
    case Method::o_hdx:
    case Method::o_hdy:
      return {"bins", "tau"};
    case Method::o_edy:
      return {"cap", "tau"};
    case Method::o_pdf:
      return {"B", "tau"};
  }
  throw UnknownMethod("unreachable method");
}

namespace {

const std::vector<double> kTauGrid = {1e-5, 1e-3, 1e-1};

std::vector<Hyperparams> cross_with_tau(std::vector<Hyperparams> base) {
  std::vector<Hyperparams> out;
  for (const auto& assignment : base) {
    for (double tau : kTauGrid) {
      Hyperparams h = assignment;
      h["tau"] = tau;
      out.push_back(std::move(h));
    }
  }
  return out;
}

std::vector<Hyperparams> smoothing_grid() {
  std::vector<Hyperparams> out;
  for (double order : {0.0, 1.0}) {
    for (double interp : {1e-2, 1e-1}) {
      out.push_back({{"poly_order", order}, {"interp_factor", interp}});
    }
  }
  return out;
}

}  // namespace

std::vector<Hyperparams> default_grid(Method m) {
  switch (m) {
    case Method::cc:
    case Method::pcc:
    case Method::acc:
    case Method::pacc:
    case Method::sld_em:
    case Method::edy:
      return {{}};
    case Method::hdx:
      return {{{"bins", 2.0}}, {{"bins", 3.0}}, {{"bins", 4.0}}};
    case Method::hdy:
      return {{{"bins", 2.0}}, {{"bins", 4.0}}};
    case Method::ibu_em:
    case Method::o_sld:
      return smoothing_grid();
    case Method::run:
      return {{{"tau", 1e-3}}, {{"tau", 1e-1}}, {{"tau", 1e1}}};
    case Method::pdf:
      return {{{"B", 5.0}}, {{"B", 10.0}}};
    case Method::o_acc:
    case Method::o_pacc:
    case Method::o_edy:
      return cross_with_tau(default_grid(base_method(m)));
    case Method::o_hdx:
    case Method::o_hdy:
    case Method::o_pdf:
      return cross_with_tau(default_grid(base_method(m)));
  }
  throw UnknownMethod("unreachable method");
}

namespace {

void check_hyperparams(const MethodSpec& spec) {
  const auto legal = legal_hyperparams(spec.method);
  for (const auto& [key, value] : spec.hyperparams) {
    if (std::find(legal.begin(), legal.end(), key) == legal.end()) {
      throw ConfigError("hyperparameter '" + key + "' is not legal for " +
                        method_name(spec.method));
    }
  }
}

double param(const Hyperparams& h, const std::string& key, double fallback) {
  const auto it = h.find(key);
  return it == h.end() ? fallback : it->second;
}

std::vector<int> argmax_rows(const Matrix& proba) {
  std::vector<int> out(static_cast<std::size_t>(proba.rows()));
  for (Index i = 0; i < proba.rows(); ++i) {
    int best = 0;
    for (Index c = 1; c < proba.cols(); ++c) {
      if (proba(i, c) > proba(i, best)) best = static_cast<int>(c);
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

}  // namespace

FitContext make_fit_context(const LabeledDataset& data, const TrainConfig& cfg,
                            int cv_folds, std::uint64_t seed) {
  data.validate();
  return FitContext{train(data, cfg),
                    cross_val_proba(data, cv_folds, seed, cfg),
                    data.prevalence(), seed};
}

FittedQuantifier fit(const MethodSpec& spec, const LabeledDataset& data,
                     int cv_folds, std::uint64_t seed) {
  return fit_with_context(spec, data,
                          make_fit_context(data, spec.classifier, cv_folds, seed));
}

FittedQuantifier fit_with_context(const MethodSpec& spec,
                                  const LabeledDataset& data,
                                  const FitContext& context) {
  check_hyperparams(spec);
  const int n = data.n_classes;
  const Hyperparams& h = spec.hyperparams;

  TransferModel tm;
  switch (base_method(spec.method)) {
    case Method::cc: {
      tm.representation = Representation::hard;
      tm.n_classes = n;
      tm.M = Matrix::Identity(n, n);
      break;
    }
    case Method::pcc:
    case Method::sld_em: {
      tm = soft_means(context.oof_proba, context.oof_proba, data.labels, n);
      if (spec.method == Method::pcc) tm.M = Matrix::Identity(n, n);
      break;
    }
    case Method::acc:
    case Method::ibu_em:
    case Method::run: {
      const auto preds = argmax_rows(context.oof_proba);
      tm = hard_counts(preds, preds, data.labels, n);
      break;
    }
    case Method::pacc: {
      tm = soft_means(context.oof_proba, context.oof_proba, data.labels, n);
      break;
    }
    case Method::hdx: {
      const int bins = static_cast<int>(param(h, "bins", 4.0));
      tm = feature_histograms(data.features, data.features, data.labels, n,
                              bins, feature_ranges(data.features));
      break;
    }
    case Method::hdy: {
      const int bins = static_cast<int>(param(h, "bins", 4.0));
      tm = posterior_histograms(context.oof_proba, context.oof_proba,
                                data.labels, n, bins);
      break;
    }
    case Method::edy: {
      std::optional<int> cap;
      if (h.count("cap")) cap = static_cast<int>(h.at("cap"));
      tm = energy_features(context.oof_proba, context.oof_proba, data.labels,
                           n, cap, context.seed);
      break;
    }
    case Method::pdf: {
      const int bins = static_cast<int>(param(h, "B", 10.0));
      tm = ranking_histogram(context.oof_proba, context.oof_proba,
                             data.labels, n, bins);
      break;
    }
    default:
      throw UnknownMethod("unreachable base method");
  }
  tm.q = Vector();  // sample side is embedded at quantify time

  SolverConfig solver;
  solver.restarts = 2;
  solver.seed = detail::splitmix64(context.seed ^ 0x6f72647175616e74ULL);

  return FittedQuantifier{spec,
                          context.classifier,
                          std::move(tm),
                          context.train_prevalence,
                          n,
                          data.dim(),
                          solver};
}

namespace {

SmoothingConfig smoothing_from(const Hyperparams& h) {
  SmoothingConfig cfg;
  cfg.poly_order = static_cast<int>(param(h, "poly_order", 0.0));
  cfg.interp_factor = param(h, "interp_factor", 0.0);
  return cfg;
}

}  // namespace

Distribution quantify(const FittedQuantifier& fq, const Matrix& sample) {
  if (sample.cols() != fq.feature_dim) {
    throw DimensionError("sample feature dimension does not match the model");
  }
  if (sample.rows() == 0) throw EmptyInput("empty sample");

  TransferModel tm = fq.transfer;
  const Method method = fq.spec.method;
  const Method base = base_method(method);
  const double tau = param(fq.spec.hyperparams, "tau", 0.0);

  // Sample-side embedding with the fitted metadata.
  switch (tm.representation) {
    case Representation::hard:
    case Representation::partition:
      tm.q = tm.embed_predictions(fq.classifier.predict_all(sample));
      break;
    case Representation::feature_hist:
      tm.q = tm.embed_features(sample);
      break;
    default:
      tm.q = tm.embed_posteriors(fq.classifier.predict_proba_all(sample));
      break;
  }

  LossSpec loss;
  loss.tau = tau;
  if (tau > 0.0) loss.tikhonov = TikhonovMatrix(fq.n_classes, 1);

  switch (base) {
    case Method::cc:
    case Method::pcc:
      return Distribution(tm.q);
    case Method::sld_em: {
      const Matrix proba = fq.classifier.predict_proba_all(sample);
      std::optional<SmoothingConfig> smoothing;
      if (method == Method::o_sld) {
        smoothing = smoothing_from(fq.spec.hyperparams);
      }
      return sld(proba, fq.train_prevalence, smoothing).estimate;
    }
    case Method::ibu_em:
      return ibu(tm, fq.train_prevalence,
                 smoothing_from(fq.spec.hyperparams))
          .estimate;
    case Method::acc:
    case Method::pacc:
      loss.kind = LossKind::least_squares;
      break;
    case Method::hdx:
    case Method::hdy:
      loss.kind = LossKind::hellinger;
      break;
    case Method::run:
      loss.kind = LossKind::poisson_run;
      loss.sample_size = sample.rows();
      break;
    case Method::edy:
      loss.kind = LossKind::energy;
      break;
    case Method::pdf:
      // The regularized variant smooths the match distance into its
      // squared-CDF surrogate; with the regularizer off it reduces to the
      // base match-distance objective.
      loss.kind = tau > 0.0 ? LossKind::cdf_l2 : LossKind::cdf_l1;
      break;
    default:
      throw UnknownMethod("unreachable base method");
  }
  return minimize(loss, tm, fq.solver).estimate;
}

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows) {
  if (rows.empty()) return Matrix();
  Matrix m(static_cast<Index>(rows.size()),
           static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                    .get<double>();
    }
  }
  return m;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const json& arr) {
  Vector v(static_cast<Index>(arr.size()));
  for (Index i = 0; i < v.size(); ++i) {
    v[i] = arr[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

}  // namespace

std::string serialize(const FittedQuantifier& fq) {
  json doc;
  doc["format_version"] = 1;
  doc["method"] = method_name(fq.spec.method);
  doc["hyperparams"] = fq.spec.hyperparams;
  doc["classifier"] = {
      {"l2_strength", fq.spec.classifier.l2_strength},
      {"class_weighting", fq.spec.classifier.class_weighting},
      {"max_epochs", fq.spec.classifier.max_epochs},
      {"tol", fq.spec.classifier.tol},
      {"weights", matrix_to_json(fq.classifier.weights())},
  };
  doc["n_classes"] = fq.n_classes;
  doc["feature_dim"] = static_cast<std::int64_t>(fq.feature_dim);
  doc["train_prevalence"] = vector_to_json(fq.train_prevalence.values());
  doc["solver"] = {
      {"max_iter", fq.solver.max_iter},
      {"grad_tol", fq.solver.grad_tol},
      {"restarts", fq.solver.restarts},
      {"seed", fq.solver.seed},
  };
  json transfer;
  transfer["representation"] = representation_name(fq.transfer.representation);
  transfer["M"] = matrix_to_json(fq.transfer.M);
  transfer["hist_count"] = fq.transfer.hist_count;
  transfer["bins"] = fq.transfer.bins;
  transfer["feature_range"] = matrix_to_json(fq.transfer.feature_range);
  json posteriors = json::array();
  for (const Matrix& rows : fq.transfer.class_posteriors) {
    posteriors.push_back(matrix_to_json(rows));
  }
  transfer["class_posteriors"] = std::move(posteriors);
  doc["transfer"] = std::move(transfer);
  return doc.dump(2) + "\n";
}

FittedQuantifier deserialize(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format_version").get<int>() != 1) {
      throw DataError("unsupported model format version");
    }
    MethodSpec spec;
    spec.method = parse_method(doc.at("method").get<std::string>());
    spec.hyperparams = doc.at("hyperparams").get<Hyperparams>();
    const json& clf = doc.at("classifier");
    spec.classifier.l2_strength = clf.at("l2_strength").get<double>();
    spec.classifier.class_weighting = clf.at("class_weighting").get<bool>();
    spec.classifier.max_epochs = clf.at("max_epochs").get<int>();
    spec.classifier.tol = clf.at("tol").get<double>();

    const int n = doc.at("n_classes").get<int>();
    const Index dim = doc.at("feature_dim").get<std::int64_t>();
    SoftClassifier classifier(matrix_from_json(clf.at("weights")), n, dim);

    SolverConfig solver;
    const json& sol = doc.at("solver");
    solver.max_iter = sol.at("max_iter").get<int>();
    solver.grad_tol = sol.at("grad_tol").get<double>();
    solver.restarts = sol.at("restarts").get<int>();
    solver.seed = sol.at("seed").get<std::uint64_t>();

    const json& tj = doc.at("transfer");
    TransferModel tm;
    tm.representation =
        parse_representation(tj.at("representation").get<std::string>());
    tm.n_classes = n;
    tm.M = matrix_from_json(tj.at("M"));
    tm.hist_count = tj.at("hist_count").get<int>();
    tm.bins = tj.at("bins").get<int>();
    tm.feature_range = matrix_from_json(tj.at("feature_range"));
    for (const json& rows : tj.at("class_posteriors")) {
      tm.class_posteriors.push_back(matrix_from_json(rows));
    }

    return FittedQuantifier{
        std::move(spec),
        std::move(classifier),
        std::move(tm),
        Distribution(vector_from_json(doc.at("train_prevalence"))),
        n,
        dim,
        solver};
  } catch (const json::exception& e) {
    throw DataError(std::string("model file is missing fields: ") + e.what());
  }
}

}  // namespace ordq
