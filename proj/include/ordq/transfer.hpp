#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ordq/simplex.hpp"
#include "ordq/types.hpp"

namespace ordq {

enum class Representation {
  hard,            // one-hot encoded hard predictions
  soft,            // posterior probabilities
  feature_hist,    // per-feature histograms of raw features
  posterior_hist,  // per-class histograms of posterior coordinates
  energy,          // mean pairwise match distances between posteriors
  ranking_hist,    // histogram of the expected-class ranking score
  partition,       // counts of an arbitrary feature-space partition
};

std::string representation_name(Representation r);
Representation parse_representation(const std::string& name);

// The pair (q, M) of the linear system q = M p for one feature
// representation: q is the mean embedding of the unlabeled sample and the
// columns of M are the class-conditional mean embeddings estimated from
// validation predictions. Metadata records whatever the representation
// needs to embed future samples with the same transformation.
struct TransferModel {
  Representation representation = Representation::hard;
  Vector q;       // length D; empty until a sample is embedded
  Matrix M;       // D x n
  int n_classes = 0;

  int hist_count = 0;     // number of histograms d (feature/posterior kinds)
  int bins = 0;           // bins per histogram, or B for ranking_hist
  Matrix feature_range;   // d x 2 [min, max] per feature (feature_hist only)
  std::vector<Matrix> class_posteriors;  // energy only: per-class rows

  Index embedding_dim() const { return M.rows(); }

  // Sample-side embeddings under this model's transformation/metadata.
  Vector embed_predictions(const std::vector<int>& predictions) const;
  Vector embed_posteriors(const Matrix& posteriors) const;
  Vector embed_features(const Matrix& features) const;
};

// Counts of hard predictions: q_i is the fraction of sample predictions for
// class i and M_ij the rate at which validation items of class j are
// predicted as class i.
TransferModel hard_counts(const std::vector<int>& pred_sample,
                          const std::vector<int>& pred_val,
                          const std::vector<int>& labels_val, int n_classes);

// Mean posteriors: q is the sample's mean posterior; column j of M the mean
// posterior over validation items of class j.
TransferModel soft_means(const Matrix& proba_sample, const Matrix& proba_val,
                         const std::vector<int>& labels_val, int n_classes);

// Per-feature equal-width histograms over the given training ranges
// (d x 2 [min, max]); out-of-range values clamp to the boundary bins. The
// (feature, bin) tensor is flattened row-major, so q and every column of M
// sum to d.
TransferModel feature_histograms(const Matrix& features_sample,
                                 const Matrix& features_val,
                                 const std::vector<int>& labels_val,
                                 int n_classes, int bins,
                                 const Matrix& training_range);

// Equal-width range covering each training feature, for feature_histograms.
Matrix feature_ranges(const Matrix& training_features);

// Histograms of posterior coordinates over fixed [0, 1] ranges.
TransferModel posterior_histograms(const Matrix& proba_sample,
                                   const Matrix& proba_val,
                                   const std::vector<int>& labels_val,
                                   int n_classes, int bins);

// Mean pairwise match distances between posteriors: q_i against validation
// class i, M_ij between validation classes i and j (symmetric). `cap`
// bounds the retained validation posteriors per class via a seeded uniform
// subsample.
TransferModel energy_features(const Matrix& proba_sample,
                              const Matrix& proba_val,
                              const std::vector<int>& labels_val,
                              int n_classes, std::optional<int> cap,
                              std::uint64_t seed);

// Histogram of the ranking score r(x) = sum_i i * s_i(x) over equal-width
// bins spanning [1, n]; columns of M are class-conditional histograms.
TransferModel ranking_histogram(const Matrix& proba_sample,
                                const Matrix& proba_val,
                                const std::vector<int>& labels_val,
                                int n_classes, int bins);

// Ranking score of one posterior row, in [1, n].
double ranking_score(const Vector& posterior);

}  // namespace ordq
