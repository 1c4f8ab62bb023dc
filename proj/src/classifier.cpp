#include "ordq/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ordq/error.hpp"
#include "ordq/rng.hpp"

namespace ordq {

void LabeledDataset::validate() const {
  if (features.rows() != static_cast<Index>(labels.size())) {
    throw DataError("feature rows and label count differ");
  }
  if (n_classes < 2) throw DataError("need at least two classes");
  if (!features.allFinite()) throw DataError("non-finite feature value");
  for (int label : labels) {
    if (label < 0 || label >= n_classes) {
      throw DataError("label out of range: " + std::to_string(label));
    }
  }
}

std::vector<Index> LabeledDataset::class_counts() const {
  std::vector<Index> counts(static_cast<std::size_t>(n_classes), 0);
  for (int label : labels) ++counts[static_cast<std::size_t>(label)];
  return counts;
}

Distribution LabeledDataset::prevalence() const {
  const auto counts = class_counts();
  Vector p(n_classes);
  for (int c = 0; c < n_classes; ++c) {
    p[c] = static_cast<double>(counts[static_cast<std::size_t>(c)]) /
           static_cast<double>(labels.size());
  }
  return Distribution(std::move(p));
}

LabeledDataset LabeledDataset::subset(const std::vector<Index>& indices) const {
  LabeledDataset out;
  out.n_classes = n_classes;
  out.features.resize(static_cast<Index>(indices.size()), features.cols());
  out.labels.reserve(indices.size());
  Index row = 0;
  for (Index idx : indices) {
    out.features.row(row++) = features.row(idx);
    out.labels.push_back(labels[static_cast<std::size_t>(idx)]);
  }
  return out;
}

SoftClassifier::SoftClassifier(Matrix weights, int n_classes, Index dim)
    : weights_(std::move(weights)), n_classes_(n_classes), dim_(dim) {
  if (weights_.rows() != n_classes_ || weights_.cols() != dim_ + 1) {
    throw DimensionError("classifier weights must be n x (d + 1)");
  }
}

namespace {

Vector affine_scores(const Matrix& weights, const Vector& x) {
  const Index d = weights.cols() - 1;
  return weights.leftCols(d) * x + weights.col(d);
}

}  // namespace

Distribution SoftClassifier::predict_proba(const Vector& x) const {
  if (x.size() != dim_) throw DimensionError("feature vector length mismatch");
  return Distribution(softmax_values(affine_scores(weights_, x)));
}

int SoftClassifier::predict(const Vector& x) const {
  if (x.size() != dim_) throw DimensionError("feature vector length mismatch");
  const Vector scores = affine_scores(weights_, x);
  int best = 0;
  for (int c = 1; c < n_classes_; ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  return best;
}

Matrix SoftClassifier::predict_proba_all(const Matrix& X) const {
  if (X.cols() != dim_) throw DimensionError("feature matrix width mismatch");
  Matrix scores = X * weights_.leftCols(dim_).transpose();
  scores.rowwise() += weights_.col(dim_).transpose();
  for (Index i = 0; i < scores.rows(); ++i) {
    const double peak = scores.row(i).maxCoeff();
    scores.row(i) = (scores.row(i).array() - peak).exp();
    scores.row(i) /= scores.row(i).sum();
  }
  return scores;
}

std::vector<int> SoftClassifier::predict_all(const Matrix& X) const {
  if (X.cols() != dim_) throw DimensionError("feature matrix width mismatch");
  std::vector<int> out(static_cast<std::size_t>(X.rows()));
  for (Index i = 0; i < X.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = predict(X.row(i).transpose());
  }
  return out;
}

namespace {

// Item weights: 1 everywhere, or inverse class frequency normalized so the
// item-weight mean is one.
Vector item_weights(const LabeledDataset& data, bool balanced) {
  const Index N = data.size();
  Vector w = Vector::Ones(N);
  if (!balanced) return w;
  const auto counts = data.class_counts();
  for (Index i = 0; i < N; ++i) {
    const auto c = static_cast<std::size_t>(data.labels[static_cast<std::size_t>(i)]);
    w[i] = static_cast<double>(N) /
           (static_cast<double>(data.n_classes) * static_cast<double>(counts[c]));
  }
  return w;
}

struct LossParts {
  double value;
  Matrix gradient;
};

LossParts loss_and_gradient(const LabeledDataset& data, const TrainConfig& cfg,
                            const Matrix& weights, const Vector& item_w) {
  const Index N = data.size();
  const Index d = data.dim();
  const int n = data.n_classes;

  Matrix scores = data.features * weights.leftCols(d).transpose();
  scores.rowwise() += weights.col(d).transpose();

  double loss = 0.0;
  Matrix grad = Matrix::Zero(n, d + 1);
  for (Index i = 0; i < N; ++i) {
    const double peak = scores.row(i).maxCoeff();
    Eigen::RowVectorXd probs = (scores.row(i).array() - peak).exp();
    const double norm = probs.sum();
    probs /= norm;
    const int label = data.labels[static_cast<std::size_t>(i)];
    const double w = item_w[i];
    loss -= w * (scores(i, label) - peak - std::log(norm));
    Eigen::RowVectorXd residual = probs;
    residual[label] -= 1.0;
    residual *= w;
    grad.leftCols(d).noalias() += residual.transpose() * data.features.row(i);
    grad.col(d) += residual.transpose();
  }
  loss /= static_cast<double>(N);
  grad /= static_cast<double>(N);

  if (cfg.l2_strength > 0.0) {
    loss += 0.5 * cfg.l2_strength * weights.leftCols(d).squaredNorm();
    grad.leftCols(d) += cfg.l2_strength * weights.leftCols(d);
  }
  return {loss, std::move(grad)};
}

}  // namespace

double training_loss(const LabeledDataset& data, const TrainConfig& cfg,
                     const Matrix& weights) {
  return loss_and_gradient(data, cfg, weights,
                           item_weights(data, cfg.class_weighting))
      .value;
}

Matrix training_gradient(const LabeledDataset& data, const TrainConfig& cfg,
                         const Matrix& weights) {
  return loss_and_gradient(data, cfg, weights,
                           item_weights(data, cfg.class_weighting))
      .gradient;
}

SoftClassifier train(const LabeledDataset& data, const TrainConfig& cfg) {
  data.validate();
  const auto counts = data.class_counts();
  for (int c = 0; c < data.n_classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) {
      throw DegenerateData("class " + std::to_string(c) +
                           " absent from training data");
    }
  }
  const Index d = data.dim();
  const int n = data.n_classes;
  const Vector item_w = item_weights(data, cfg.class_weighting);

  Matrix weights = Matrix::Zero(n, d + 1);
  auto parts = loss_and_gradient(data, cfg, weights, item_w);
  double step = 1.0;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double grad_norm = parts.gradient.norm();
    if (grad_norm <= cfg.tol) break;

    // Armijo backtracking; the accepted step seeds the next epoch, doubled
    // so the search can recover after a cautious stretch.
    const double slope = parts.gradient.squaredNorm();
    bool accepted = false;
    for (int shrink = 0; shrink < 60; ++shrink) {
      const Matrix candidate = weights - step * parts.gradient;
      const auto trial = loss_and_gradient(data, cfg, candidate, item_w);
      if (trial.value <= parts.value - 1e-4 * step * slope) {
        weights = candidate;
        parts = trial;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    step *= 2.0;
  }
  return SoftClassifier(std::move(weights), n, d);
}

std::vector<int> stratified_folds(const LabeledDataset& data, int folds,
                                  std::uint64_t seed) {
  if (folds < 2) throw ConfigError("cross-validation requires >= 2 folds");
  if (folds > data.size()) {
    throw TooFewPerClass("more folds than data items");
  }
  const auto counts = data.class_counts();
  for (int c = 0; c < data.n_classes; ++c) {
    // Two members guarantee that every fold complement still contains the
    // class, which train() requires.
    if (counts[static_cast<std::size_t>(c)] < 2) {
      throw TooFewPerClass("class " + std::to_string(c) +
                           " has too few members for cross-validation");
    }
  }
  std::vector<int> assignment(data.labels.size(), -1);
  Rng rng(seed);
  for (int c = 0; c < data.n_classes; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.labels.size(); ++i) {
      if (data.labels[i] == c) members.push_back(i);
    }
    // Fisher-Yates, then round-robin over folds keeps per-fold class counts
    // within one of each other.
    for (std::size_t i = members.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.integer(i));
      std::swap(members[i - 1], members[j]);
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
      assignment[members[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
    }
  }
  return assignment;
}

Matrix cross_val_proba(const LabeledDataset& data, int folds,
                       std::uint64_t seed, const TrainConfig& cfg) {
  data.validate();
  const std::vector<int> assignment = stratified_folds(data, folds, seed);
  Matrix out(data.size(), data.n_classes);
  for (int fold = 0; fold < folds; ++fold) {
    std::vector<Index> train_idx;
    std::vector<Index> held_idx;
    for (Index i = 0; i < data.size(); ++i) {
      if (assignment[static_cast<std::size_t>(i)] == fold) {
        held_idx.push_back(i);
      } else {
        train_idx.push_back(i);
      }
    }
    if (held_idx.empty()) continue;
    const SoftClassifier model = train(data.subset(train_idx), cfg);
    for (Index i : held_idx) {
      out.row(i) =
          model.predict_proba(data.features.row(i).transpose()).values();
    }
  }
  return out;
}

}  // namespace ordq
