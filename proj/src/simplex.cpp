#include "ordq/simplex.hpp"

#include <algorithm>
#include <cmath>

#include "ordq/error.hpp"

namespace ordq {

namespace {

constexpr double kSumTolerance = 1e-9;
constexpr double kNegativeSlack = 1e-12;

}  // namespace

Distribution::Distribution(Vector values) : values_(std::move(values)) {
  if (values_.size() < 1) {
    throw DimensionError("Distribution requires at least one component");
  }
  for (Index i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!std::isfinite(v) || v < -kNegativeSlack) {
      throw DimensionError("Distribution component " + std::to_string(i) +
                           " is negative or not finite");
    }
    if (v < 0.0) values_[i] = 0.0;  // absorb representable -0 noise
  }
  if (std::abs(values_.sum() - 1.0) > kSumTolerance) {
    throw DimensionError("Distribution components sum to " +
                         std::to_string(values_.sum()) + ", expected 1");
  }
}

Distribution Distribution::uniform(Index n) {
  return Distribution(Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

Distribution Distribution::normalized(Vector weights) {
  double total = 0.0;
  for (Index i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0) weights[i] = 0.0;
    total += weights[i];
  }
  if (total <= 0.0) {
    throw ZeroComponent("cannot normalize weights that sum to zero");
  }
  return Distribution(weights / total);
}

LatentVector::LatentVector(Vector values) : values_(std::move(values)) {
  if (values_.size() < 1) {
    throw DimensionError("LatentVector requires at least one component");
  }
  if (values_[0] != 0.0) {
    throw DimensionError("LatentVector first component must be exactly zero");
  }
}

Vector softmax_values(const Vector& l) {
  const double peak = l.maxCoeff();
  Vector e = (l.array() - peak).exp();
  return e / e.sum();
}

Distribution softmax(const LatentVector& l) {
  return Distribution(softmax_values(l.values()));
}

LatentVector latent_of(const Distribution& p) {
  Vector l(p.size());
  for (Index i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) {
      throw ZeroComponent("latent_of requires strictly positive components");
    }
    l[i] = std::log(p[i]) - std::log(p[0]);
  }
  l[0] = 0.0;
  return LatentVector(std::move(l));
}

Distribution sample_uniform(Index n, Rng& rng) {
  if (n < 2) throw DimensionError("sample_uniform requires n >= 2");
  std::vector<double> cuts(static_cast<std::size_t>(n) - 1);
  for (auto& c : cuts) c = rng.uniform();
  std::sort(cuts.begin(), cuts.end());
  Vector gaps(n);
  double prev = 0.0;
  for (Index i = 0; i + 1 < n; ++i) {
    gaps[i] = cuts[static_cast<std::size_t>(i)] - prev;
    prev = cuts[static_cast<std::size_t>(i)];
  }
  gaps[n - 1] = 1.0 - prev;
  return Distribution(std::move(gaps));
}

double jaggedness_raw(const Vector& p, int order) {
  const Index n = p.size();
  if (order < 0 || order > 2) {
    throw UnsupportedOrder("jaggedness order must be 0, 1, or 2");
  }
  if (n < order + 2) {
    throw DimensionError("jaggedness requires n >= order + 2");
  }
  double sum = 0.0;
  switch (order) {
    case 0:
      for (Index i = 0; i + 1 < n; ++i) {
        const double d = p[i] - p[i + 1];
        sum += d * d;
      }
      return sum / 2.0;
    case 1:
      for (Index i = 1; i + 1 < n; ++i) {
        const double d = -p[i - 1] + 2.0 * p[i] - p[i + 1];
        sum += d * d;
      }
      return sum / std::min<double>(6.0, static_cast<double>(n) + 1.0);
    default:
      for (Index i = 0; i + 3 < n; ++i) {
        const double d =
            3.0 * p[i + 1] - 3.0 * p[i + 2] + p[i + 3] - p[i];
        sum += d * d;
      }
      return sum / 8.0;
  }
}

double jaggedness(const Distribution& p, int order) {
  return jaggedness_raw(p.values(), order);
}

// Square upper-bidiagonal difference matrix: ones on the diagonal, minus
// ones on the superdiagonal.
static Matrix square_difference_matrix(Index n) {
  Matrix c = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    c(i, i) = 1.0;
    if (i + 1 < n) c(i, i + 1) = -1.0;
  }
  return c;
}

TikhonovMatrix::TikhonovMatrix(Index n, int order) : order_(order), n_(n) {
  if (order < 0) throw UnsupportedOrder("Tikhonov order must be nonnegative");
  if (n < order + 2) {
    throw DimensionError("Tikhonov matrix requires n >= order + 2");
  }
  const Matrix base = square_difference_matrix(n);
  Matrix product = base;
  for (int step = 0; step < order; ++step) {
    product = product.transpose() * base;
  }
  // Interior rows carry the full alternating binomial stencil; the outermost
  // order+1 rows are truncated boundary variants and are omitted.
  const Index drop_top = (order + 1) / 2;
  const Index drop_bottom = (order + 2) / 2;
  Matrix trimmed = product.middleRows(drop_top, n - drop_top - drop_bottom);
  // The iterated products reproduce the canonical patterns with a unit
  // factor; normalizing by the leading entry magnitude pins the row scale
  // for any order.
  double lead_mag = 0.0;
  for (Index j = 0; j < n && lead_mag == 0.0; ++j) {
    lead_mag = std::abs(trimmed(0, j));
  }
  if (lead_mag != 1.0 && lead_mag > 0.0) trimmed /= lead_mag;
  rows_ = std::move(trimmed);
}

double regularizer(const Distribution& p, const TikhonovMatrix& C,
                   double tau) {
  if (C.classes() != p.size()) {
    throw DimensionError("Tikhonov matrix classes do not match distribution");
  }
  if (tau == 0.0) return 0.0;
  const Vector cp = C.rows() * p.values();
  return 0.5 * tau * cp.squaredNorm();
}

}  // namespace ordq
