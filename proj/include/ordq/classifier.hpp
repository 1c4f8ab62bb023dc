#pragma once

#include <cstdint>
#include <vector>

#include "ordq/dataset.hpp"
#include "ordq/simplex.hpp"

namespace ordq {

struct TrainConfig {
  double l2_strength = 1e-3;    // ridge penalty on non-bias weights
  bool class_weighting = false; // inverse-frequency item weights
  int max_epochs = 5000;
  double tol = 1e-6;            // gradient-norm stopping threshold
};

// Multinomial logistic regression. Weights are n x (d + 1) with the bias in
// the last column. Immutable once trained; safe to share across threads.
class SoftClassifier {
 public:
  SoftClassifier(Matrix weights, int n_classes, Index dim);

  Distribution predict_proba(const Vector& x) const;

  // Argmax of the posteriors; ties resolve to the lowest class index.
  int predict(const Vector& x) const;

  Matrix predict_proba_all(const Matrix& X) const;  // N x n
  std::vector<int> predict_all(const Matrix& X) const;

  const Matrix& weights() const { return weights_; }
  int classes() const { return n_classes_; }
  Index dim() const { return dim_; }

 private:
  Matrix weights_;
  int n_classes_;
  Index dim_;
};

// L2-regularized multinomial cross-entropy, minimized by full-batch gradient
// descent with Armijo backtracking. With class_weighting, items are weighted
// by inverse class frequency normalized to mean one.
SoftClassifier train(const LabeledDataset& data, const TrainConfig& cfg);

// Regularized weighted cross-entropy and its gradient at the given weights;
// exposed for optimizer verification.
double training_loss(const LabeledDataset& data, const TrainConfig& cfg,
                     const Matrix& weights);
Matrix training_gradient(const LabeledDataset& data, const TrainConfig& cfg,
                         const Matrix& weights);

// Out-of-fold posteriors from deterministic stratified k-fold CV: row i is
// predicted by the model whose training folds exclude item i. Throws
// TooFewPerClass when a class has fewer than `folds` members.
Matrix cross_val_proba(const LabeledDataset& data, int folds,
                       std::uint64_t seed, const TrainConfig& cfg);

// The fold assignment used by cross_val_proba (exposed for tests).
std::vector<int> stratified_folds(const LabeledDataset& data, int folds,
                                  std::uint64_t seed);

}  // namespace ordq
