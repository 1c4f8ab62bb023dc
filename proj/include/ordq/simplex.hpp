#pragma once

#include <vector>

#include "ordq/rng.hpp"
#include "ordq/types.hpp"

namespace ordq {

// A prevalence vector: an element of the probability simplex. Components
// are nonnegative and sum to one within 1e-9. Immutable after construction.
class Distribution {
 public:
  // Validates the invariants; throws DimensionError on a violation.
  explicit Distribution(Vector values);

  static Distribution uniform(Index n);

  // Normalizes a vector of nonnegative weights; throws ZeroComponent when
  // the weights sum to zero.
  static Distribution normalized(Vector weights);

  Index size() const { return values_.size(); }
  double operator[](Index i) const { return values_[i]; }
  const Vector& values() const { return values_; }

  bool operator==(const Distribution& other) const {
    return values_ == other.values_;
  }

 private:
  Vector values_;
};

// Latent parameterization of a distribution: softmax(l) with the first
// component pinned to exactly zero so the parameterization is unique.
class LatentVector {
 public:
  explicit LatentVector(Vector values);

  static LatentVector zeros(Index n) { return LatentVector(Vector::Zero(n)); }

  Index size() const { return values_.size(); }
  double operator[](Index i) const { return values_[i]; }
  const Vector& values() const { return values_; }

 private:
  Vector values_;
};

// Stabilized softmax of an unconstrained vector. Total on finite input.
Vector softmax_values(const Vector& l);

Distribution softmax(const LatentVector& l);

// Inverse of softmax under the first-component-pinned convention:
// l_i = ln p_i - ln p_1. Throws ZeroComponent if any p_i = 0.
LatentVector latent_of(const Distribution& p);

// Uniform draw from the probability simplex (Kraemer algorithm: sorted
// uniform gaps).
Distribution sample_uniform(Index n, Rng& rng);

// Jaggedness of order k in {0, 1, 2}: normalized squared deviation from a
// degree-k polynomial of the class index. Ranges in [0, 1] on the simplex.
double jaggedness(const Distribution& p, int order);

// Same formula on an arbitrary real vector (the measure is defined by a
// difference stencil and does not need normalized input).
double jaggedness_raw(const Vector& values, int order);

// Difference matrix C_k penalizing deviation from a degree-k polynomial.
// Rows are shifts of the alternating-sign binomial pattern of order k+1;
// every row sums to zero.
class TikhonovMatrix {
 public:
  // Requires n >= order + 2; throws DimensionError otherwise.
  TikhonovMatrix(Index n, int order);

  int order() const { return order_; }
  Index classes() const { return n_; }
  const Matrix& rows() const { return rows_; }

 private:
  int order_;
  Index n_;
  Matrix rows_;  // (n - 1 - order) x n
};

inline TikhonovMatrix tikhonov(Index n, int order) {
  return TikhonovMatrix(n, order);
}

// Tikhonov penalty (tau / 2) * ||C p||^2.
double regularizer(const Distribution& p, const TikhonovMatrix& C, double tau);

}  // namespace ordq
