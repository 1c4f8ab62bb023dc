#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ordq/classifier.hpp"
#include "ordq/solvers.hpp"
#include "ordq/transfer.hpp"

namespace ordq {

enum class Method {
  cc, pcc, acc, pacc, hdx, hdy, sld_em, ibu_em, run, edy, pdf,
  o_acc, o_pacc, o_hdx, o_hdy, o_sld, o_edy, o_pdf,
};

// Canonical names ("CC", ..., "o-PDF"). parse_method throws UnknownMethod.
std::string method_name(Method m);
Method parse_method(const std::string& name);
std::vector<Method> all_methods();

// Whether the method carries the ordinal regularization knob, and its
// unregularized counterpart.
bool is_ordinal_variant(Method m);
Method base_method(Method m);

using Hyperparams = std::map<std::string, double>;

struct MethodSpec {
  Method method = Method::cc;
  Hyperparams hyperparams;    // keys restricted per method
  TrainConfig classifier;
};

// The hyperparameter grid the paper searches for each method. The ordinal
// variants cross their base grid with the regularization grid.
std::vector<Hyperparams> default_grid(Method m);

// Legal hyperparameter keys of a method; fit() rejects others.
std::vector<std::string> legal_hyperparams(Method m);

// Everything learned at fit time. Immutable; quantify never mutates it.
struct FittedQuantifier {
  MethodSpec spec;
  SoftClassifier classifier;
  TransferModel transfer;  // validation-estimated M and metadata; q empty
  Distribution train_prevalence;
  int n_classes = 0;
  Index feature_dim = 0;
  SolverConfig solver;
};

// Classifier plus out-of-fold posteriors, shared by several fits on the
// same training set.
struct FitContext {
  SoftClassifier classifier;
  Matrix oof_proba;  // N x n
  Distribution train_prevalence;
  std::uint64_t seed = 0;
};

FitContext make_fit_context(const LabeledDataset& data, const TrainConfig& cfg,
                            int cv_folds, std::uint64_t seed);

FittedQuantifier fit(const MethodSpec& spec, const LabeledDataset& data,
                     int cv_folds, std::uint64_t seed);

FittedQuantifier fit_with_context(const MethodSpec& spec,
                                  const LabeledDataset& data,
                                  const FitContext& context);

// Estimates the class prevalences of an unlabeled sample (rows = items).
Distribution quantify(const FittedQuantifier& fq, const Matrix& sample);

// Lossless self-describing text form (JSON, format_version 1).
std::string serialize(const FittedQuantifier& fq);
FittedQuantifier deserialize(const std::string& text);

}  // namespace ordq
