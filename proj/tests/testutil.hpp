#pragma once

#include <vector>

#include "ordq/rng.hpp"
#include "ordq/simplex.hpp"
#include "ordq/types.hpp"

namespace ordq::test {

inline Distribution make_distribution(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v[i++] = x;
  return Distribution(std::move(v));
}

// Strictly positive random distribution (interior of the simplex).
inline Distribution random_interior(Index n, Rng& rng, double floor = 0.05) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = floor + rng.uniform();
  return Distribution(v / v.sum());
}

// Random row-stochastic posterior matrix (rows on the simplex).
inline Matrix random_posteriors(Index rows, Index n, Rng& rng) {
  Matrix m(rows, n);
  for (Index i = 0; i < rows; ++i) {
    double total = 0.0;
    for (Index j = 0; j < n; ++j) {
      m(i, j) = 0.01 + rng.uniform();
      total += m(i, j);
    }
    m.row(i) /= total;
  }
  return m;
}

// Random column-stochastic transfer matrix.
inline Matrix random_column_stochastic(Index rows, Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    double total = 0.0;
    for (Index i = 0; i < rows; ++i) {
      m(i, j) = 0.05 + rng.uniform();
      total += m(i, j);
    }
    m.col(j) /= total;
  }
  return m;
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace ordq::test
