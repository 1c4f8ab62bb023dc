#pragma once

#include <vector>

#include "ordq/simplex.hpp"
#include "ordq/types.hpp"

namespace ordq {

// Feature matrix plus class labels on an ordered codeframe. Labels are
// 0-based indices into the n_classes ordered classes.
struct LabeledDataset {
  Matrix features;          // N x d
  std::vector<int> labels;  // length N, values in [0, n_classes)
  int n_classes = 0;

  Index size() const { return features.rows(); }
  Index dim() const { return features.cols(); }

  // Checks finiteness, label range, and shape; throws DataError.
  void validate() const;

  std::vector<Index> class_counts() const;
  Distribution prevalence() const;

  LabeledDataset subset(const std::vector<Index>& indices) const;
};

}  // namespace ordq
