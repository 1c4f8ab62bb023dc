#include "ordq/transfer.hpp"

#include <algorithm>
#include <cmath>

#include "ordq/error.hpp"
#include "ordq/rng.hpp"

namespace ordq {

std::string representation_name(Representation r) {
  switch (r) {
    case Representation::hard: return "hard";
    case Representation::soft: return "soft";
    case Representation::feature_hist: return "feature_hist";
    case Representation::posterior_hist: return "posterior_hist";
    case Representation::energy: return "energy";
    case Representation::ranking_hist: return "ranking_hist";
    case Representation::partition: return "partition";
  }
  throw ConfigError("unreachable representation");
}

Representation parse_representation(const std::string& name) {
  for (Representation r :
       {Representation::hard, Representation::soft, Representation::feature_hist,
        Representation::posterior_hist, Representation::energy,
        Representation::ranking_hist, Representation::partition}) {
    if (representation_name(r) == name) return r;
  }
  throw ConfigError("unknown representation: " + name);
}

namespace {

std::vector<std::vector<Index>> members_by_class(
    const std::vector<int>& labels, int n_classes) {
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int c = labels[i];
    if (c < 0 || c >= n_classes) {
      throw DataError("label out of range: " + std::to_string(c));
    }
    members[static_cast<std::size_t>(c)].push_back(static_cast<Index>(i));
  }
  for (int c = 0; c < n_classes; ++c) {
    if (members[static_cast<std::size_t>(c)].empty()) {
      throw MissingClass("class " + std::to_string(c) +
                         " absent from validation labels");
    }
  }
  return members;
}

// Bin of `value` among `bins` equal-width bins over [lo, hi]; out-of-range
// values land in the boundary bins. Bins are half-open, the last closed.
int bin_of(double value, double lo, double hi, int bins) {
  const double width = (hi - lo) / static_cast<double>(bins);
  const int raw = static_cast<int>(std::floor((value - lo) / width));
  return std::clamp(raw, 0, bins - 1);
}

// Match distance between two rows of the simplex (unit class distances).
double row_match_distance(const Eigen::RowVectorXd& a,
                          const Eigen::RowVectorXd& b) {
  double cum = 0.0;
  double total = 0.0;
  for (Index i = 0; i + 1 < a.size(); ++i) {
    cum += a[i] - b[i];
    total += std::abs(cum);
  }
  return total;
}

}  // namespace

Vector TransferModel::embed_predictions(const std::vector<int>& predictions) const {
  if (representation != Representation::hard &&
      representation != Representation::partition) {
    throw DimensionError("model does not embed hard predictions");
  }
  if (predictions.empty()) throw EmptyInput("empty sample");
  Vector q = Vector::Zero(embedding_dim());
  for (int p : predictions) {
    if (p < 0 || p >= embedding_dim()) {
      throw DataError("prediction out of range");
    }
    q[p] += 1.0;
  }
  return q / static_cast<double>(predictions.size());
}

Vector TransferModel::embed_posteriors(const Matrix& posteriors) const {
  if (posteriors.rows() == 0) throw EmptyInput("empty sample");
  if (posteriors.cols() != n_classes) {
    throw DimensionError("posterior width does not match class count");
  }
  const Index count = posteriors.rows();
  switch (representation) {
    case Representation::soft:
      return posteriors.colwise().mean().transpose();
    case Representation::posterior_hist: {
      Vector q = Vector::Zero(embedding_dim());
      for (Index i = 0; i < count; ++i) {
        for (int f = 0; f < hist_count; ++f) {
          q[static_cast<Index>(f) * bins +
            bin_of(posteriors(i, f), 0.0, 1.0, bins)] += 1.0;
        }
      }
      // Normalized to total mass one (1/n per coordinate histogram), so the
      // embedding is itself a distribution over (coordinate, bin) pairs.
      return q / (static_cast<double>(count) *
                  static_cast<double>(hist_count));
    }
    case Representation::energy: {
      Vector q = Vector::Zero(n_classes);
      for (int c = 0; c < n_classes; ++c) {
        const Matrix& reference = class_posteriors[static_cast<std::size_t>(c)];
        double total = 0.0;
        for (Index i = 0; i < count; ++i) {
          for (Index j = 0; j < reference.rows(); ++j) {
            total += row_match_distance(posteriors.row(i), reference.row(j));
          }
        }
        q[c] = total / (static_cast<double>(count) *
                        static_cast<double>(reference.rows()));
      }
      return q;
    }
    case Representation::ranking_hist: {
      Vector q = Vector::Zero(bins);
      for (Index i = 0; i < count; ++i) {
        q[bin_of(ranking_score(posteriors.row(i).transpose()), 1.0,
                 static_cast<double>(n_classes), bins)] += 1.0;
      }
      return q / static_cast<double>(count);
    }
    default:
      throw DimensionError("model does not embed posteriors");
  }
}

Vector TransferModel::embed_features(const Matrix& features) const {
  if (representation != Representation::feature_hist) {
    throw DimensionError("model does not embed raw features");
  }
  if (features.rows() == 0) throw EmptyInput("empty sample");
  if (features.cols() != hist_count) {
    throw DimensionError("feature width does not match fitted histograms");
  }
  Vector q = Vector::Zero(embedding_dim());
  for (Index i = 0; i < features.rows(); ++i) {
    for (int f = 0; f < hist_count; ++f) {
      q[static_cast<Index>(f) * bins +
        bin_of(features(i, f), feature_range(f, 0), feature_range(f, 1),
               bins)] += 1.0;
    }
  }
  return q / static_cast<double>(features.rows());
}

TransferModel hard_counts(const std::vector<int>& pred_sample,
                          const std::vector<int>& pred_val,
                          const std::vector<int>& labels_val, int n_classes) {
  if (pred_val.size() != labels_val.size()) {
    throw DimensionError("validation predictions and labels differ in length");
  }
  const auto members = members_by_class(labels_val, n_classes);
  TransferModel tm;
  tm.representation = Representation::hard;
  tm.n_classes = n_classes;
  tm.M = Matrix::Zero(n_classes, n_classes);
  for (int c = 0; c < n_classes; ++c) {
    const auto& idx = members[static_cast<std::size_t>(c)];
    for (Index i : idx) {
      const int predicted = pred_val[static_cast<std::size_t>(i)];
      if (predicted < 0 || predicted >= n_classes) {
        throw DataError("prediction out of range");
      }
      tm.M(predicted, c) += 1.0;
    }
    tm.M.col(c) /= static_cast<double>(idx.size());
  }
  tm.q = tm.embed_predictions(pred_sample);
  return tm;
}

TransferModel soft_means(const Matrix& proba_sample, const Matrix& proba_val,
                         const std::vector<int>& labels_val, int n_classes) {
  if (proba_val.rows() != static_cast<Index>(labels_val.size())) {
    throw DimensionError("validation posteriors and labels differ in length");
  }
  if (proba_val.cols() != n_classes) {
    throw DimensionError("posterior width does not match class count");
  }
  const auto members = members_by_class(labels_val, n_classes);
  TransferModel tm;
  tm.representation = Representation::soft;
  tm.n_classes = n_classes;
  tm.M = Matrix::Zero(n_classes, n_classes);
  for (int c = 0; c < n_classes; ++c) {
    const auto& idx = members[static_cast<std::size_t>(c)];
    for (Index i : idx) tm.M.col(c) += proba_val.row(i).transpose();
    tm.M.col(c) /= static_cast<double>(idx.size());
  }
  tm.q = tm.embed_posteriors(proba_sample);
  return tm;
}

Matrix feature_ranges(const Matrix& training_features) {
  Matrix range(training_features.cols(), 2);
  for (Index f = 0; f < training_features.cols(); ++f) {
    range(f, 0) = training_features.col(f).minCoeff();
    range(f, 1) = training_features.col(f).maxCoeff();
  }
  return range;
}

TransferModel feature_histograms(const Matrix& features_sample,
                                 const Matrix& features_val,
                                 const std::vector<int>& labels_val,
                                 int n_classes, int bins,
                                 const Matrix& training_range) {
  if (bins < 2) throw ConfigError("feature histograms require >= 2 bins");
  const Index d = features_val.cols();
  if (d < 1) throw DimensionError("feature histograms require >= 1 feature");
  if (training_range.rows() != d || training_range.cols() != 2) {
    throw DimensionError("training range must be d x 2");
  }
  for (Index f = 0; f < d; ++f) {
    if (!(training_range(f, 1) > training_range(f, 0))) {
      throw DegenerateFeature("feature " + std::to_string(f) +
                              " is constant over the training range");
    }
  }
  if (features_val.rows() != static_cast<Index>(labels_val.size())) {
    throw DimensionError("validation features and labels differ in length");
  }
  const auto members = members_by_class(labels_val, n_classes);

  TransferModel tm;
  tm.representation = Representation::feature_hist;
  tm.n_classes = n_classes;
  tm.hist_count = static_cast<int>(d);
  tm.bins = bins;
  tm.feature_range = training_range;
  tm.M = Matrix::Zero(d * bins, n_classes);
  for (int c = 0; c < n_classes; ++c) {
    const auto& idx = members[static_cast<std::size_t>(c)];
    for (Index i : idx) {
      for (Index f = 0; f < d; ++f) {
        tm.M(f * bins + bin_of(features_val(i, f), training_range(f, 0),
                               training_range(f, 1), bins),
             c) += 1.0;
      }
    }
    tm.M.col(c) /= static_cast<double>(idx.size());
  }
  tm.q = tm.embed_features(features_sample);
  return tm;
}

TransferModel posterior_histograms(const Matrix& proba_sample,
                                   const Matrix& proba_val,
                                   const std::vector<int>& labels_val,
                                   int n_classes, int bins) {
  if (bins < 2) throw ConfigError("posterior histograms require >= 2 bins");
  if (proba_val.cols() != n_classes) {
    throw DimensionError("posterior width does not match class count");
  }
  if (proba_val.rows() != static_cast<Index>(labels_val.size())) {
    throw DimensionError("validation posteriors and labels differ in length");
  }
  const auto members = members_by_class(labels_val, n_classes);

  TransferModel tm;
  tm.representation = Representation::posterior_hist;
  tm.n_classes = n_classes;
  tm.hist_count = n_classes;
  tm.bins = bins;
  tm.M = Matrix::Zero(static_cast<Index>(n_classes) * bins, n_classes);
  for (int c = 0; c < n_classes; ++c) {
    const auto& idx = members[static_cast<std::size_t>(c)];
    for (Index i : idx) {
      for (int f = 0; f < n_classes; ++f) {
        tm.M(static_cast<Index>(f) * bins +
                 bin_of(proba_val(i, f), 0.0, 1.0, bins),
             c) += 1.0;
      }
    }
    // Columns normalized to one, matching the sample-side embedding.
    tm.M.col(c) /=
        static_cast<double>(idx.size()) * static_cast<double>(n_classes);
  }
  tm.q = tm.embed_posteriors(proba_sample);
  return tm;
}

TransferModel energy_features(const Matrix& proba_sample,
                              const Matrix& proba_val,
                              const std::vector<int>& labels_val,
                              int n_classes, std::optional<int> cap,
                              std::uint64_t seed) {
  if (proba_val.cols() != n_classes) {
    throw DimensionError("posterior width does not match class count");
  }
  if (proba_val.rows() != static_cast<Index>(labels_val.size())) {
    throw DimensionError("validation posteriors and labels differ in length");
  }
  const auto members = members_by_class(labels_val, n_classes);

  TransferModel tm;
  tm.representation = Representation::energy;
  tm.n_classes = n_classes;
  tm.class_posteriors.resize(static_cast<std::size_t>(n_classes));
  for (int c = 0; c < n_classes; ++c) {
    auto idx = members[static_cast<std::size_t>(c)];
    if (cap && static_cast<Index>(*cap) < static_cast<Index>(idx.size())) {
      Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(c));
      for (std::size_t i = idx.size(); i > 1; --i) {
        std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.integer(i))]);
      }
      idx.resize(static_cast<std::size_t>(*cap));
      std::sort(idx.begin(), idx.end());
    }
    Matrix rows(static_cast<Index>(idx.size()), n_classes);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      rows.row(static_cast<Index>(i)) = proba_val.row(idx[i]);
    }
    tm.class_posteriors[static_cast<std::size_t>(c)] = std::move(rows);
  }

  tm.M = Matrix::Zero(n_classes, n_classes);
  for (int a = 0; a < n_classes; ++a) {
    const Matrix& ra = tm.class_posteriors[static_cast<std::size_t>(a)];
    for (int b = a; b < n_classes; ++b) {
      const Matrix& rb = tm.class_posteriors[static_cast<std::size_t>(b)];
      double total = 0.0;
      for (Index i = 0; i < ra.rows(); ++i) {
        for (Index j = 0; j < rb.rows(); ++j) {
          total += row_match_distance(ra.row(i), rb.row(j));
        }
      }
      const double mean =
          total / (static_cast<double>(ra.rows()) * static_cast<double>(rb.rows()));
      tm.M(a, b) = mean;
      tm.M(b, a) = mean;
    }
  }
  tm.q = tm.embed_posteriors(proba_sample);
  return tm;
}

double ranking_score(const Vector& posterior) {
  double r = 0.0;
  for (Index i = 0; i < posterior.size(); ++i) {
    r += static_cast<double>(i + 1) * posterior[i];
  }
  return r;
}

TransferModel ranking_histogram(const Matrix& proba_sample,
                                const Matrix& proba_val,
                                const std::vector<int>& labels_val,
                                int n_classes, int bins) {
  if (bins < 2) throw ConfigError("ranking histogram requires >= 2 bins");
  if (proba_val.cols() != n_classes) {
    throw DimensionError("posterior width does not match class count");
  }
  if (proba_val.rows() != static_cast<Index>(labels_val.size())) {
    throw DimensionError("validation posteriors and labels differ in length");
  }
  const auto members = members_by_class(labels_val, n_classes);

  TransferModel tm;
  tm.representation = Representation::ranking_hist;
  tm.n_classes = n_classes;
  tm.hist_count = 1;
  tm.bins = bins;
  tm.M = Matrix::Zero(bins, n_classes);
  for (int c = 0; c < n_classes; ++c) {
    const auto& idx = members[static_cast<std::size_t>(c)];
    for (Index i : idx) {
      tm.M(bin_of(ranking_score(proba_val.row(i).transpose()), 1.0,
                  static_cast<double>(n_classes), bins),
           c) += 1.0;
    }
    tm.M.col(c) /= static_cast<double>(idx.size());
  }
  tm.q = tm.embed_posteriors(proba_sample);
  return tm;
}

}  // namespace ordq
