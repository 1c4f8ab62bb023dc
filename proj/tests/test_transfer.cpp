#include "ordq/transfer.hpp"

#include <cmath>

#include <doctest.h>

#include "ordq/error.hpp"
#include "ordq/metrics.hpp"
#include "testutil.hpp"

using namespace ordq;

namespace {

Matrix one_hot_rows(const std::vector<int>& labels, int n) {
  Matrix m = Matrix::Zero(static_cast<Index>(labels.size()), n);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    m(static_cast<Index>(i), labels[i]) = 1.0;
  }
  return m;
}

}  // namespace

TEST_CASE("hard_counts with perfect predictions gives the identity") {
  const std::vector<int> labels = {0, 0, 1, 1, 2, 2};
  const TransferModel tm = hard_counts(labels, labels, labels, 3);
  CHECK((tm.M - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hard_counts sample side counts predictions") {
  const std::vector<int> labels = {0, 1, 2};
  const std::vector<int> sample_preds = {1, 1, 1, 1};
  const TransferModel tm = hard_counts(sample_preds, labels, labels, 3);
  CHECK(tm.q[0] == 0.0);
  CHECK(tm.q[1] == 1.0);
  CHECK(tm.q[2] == 0.0);
}

TEST_CASE("hard_counts matches a hand tally") {
  const std::vector<int> labels = {0, 0, 0, 1, 1, 2};
  const std::vector<int> preds = {0, 1, 0, 1, 2, 2};
  const std::vector<int> sample_preds = {0, 2, 2};
  const TransferModel tm = hard_counts(sample_preds, preds, labels, 3);
  CHECK(tm.M(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(tm.M(1, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(tm.M(2, 0) == 0.0);
  CHECK(tm.M(1, 1) == doctest::Approx(0.5));
  CHECK(tm.M(2, 1) == doctest::Approx(0.5));
  CHECK(tm.M(2, 2) == doctest::Approx(1.0));
  CHECK(tm.q[0] == doctest::Approx(1.0 / 3.0));
  CHECK(tm.q[2] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("hard_counts requires every class") {
  const std::vector<int> labels = {0, 0, 1};
  CHECK_THROWS_AS(hard_counts(labels, labels, labels, 3), MissingClass);
}

TEST_CASE("soft_means equals hard_counts on one-hot posteriors") {
  Rng rng(2);
  const int n = 4;
  std::vector<int> labels;
  std::vector<int> preds;
  for (int i = 0; i < 4; ++i) labels.push_back(i);  // every class present
  for (int i = 0; i < 56; ++i) labels.push_back(static_cast<int>(rng.integer(n)));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    preds.push_back(static_cast<int>(rng.integer(n)));
  }
  std::vector<int> sample_preds;
  for (int i = 0; i < 25; ++i) {
    sample_preds.push_back(static_cast<int>(rng.integer(n)));
  }
  const TransferModel hard = hard_counts(sample_preds, preds, labels, n);
  const TransferModel soft = soft_means(one_hot_rows(sample_preds, n),
                                        one_hot_rows(preds, n), labels, n);
  CHECK((hard.M - soft.M).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(test::max_abs_diff(hard.q, soft.q) < 1e-15);
}

TEST_CASE("soft_means with uniform posteriors is uniform") {
  const std::vector<int> labels = {0, 1, 2};
  const Matrix uniform = Matrix::Constant(3, 3, 1.0 / 3.0);
  const TransferModel tm = soft_means(uniform, uniform, labels, 3);
  CHECK((tm.M - Matrix::Constant(3, 3, 1.0 / 3.0)).cwiseAbs().maxCoeff() <
        1e-15);
  CHECK(test::max_abs_diff(tm.q, Vector::Constant(3, 1.0 / 3.0)) < 1e-15);
}

TEST_CASE("soft_means matches hand averages") {
  Matrix val(4, 2);
  val << 0.9, 0.1,
         0.7, 0.3,
         0.2, 0.8,
         0.4, 0.6;
  const std::vector<int> labels = {0, 0, 1, 1};
  Matrix sample(2, 2);
  sample << 0.6, 0.4,
            0.5, 0.5;
  const TransferModel tm = soft_means(sample, val, labels, 2);
  CHECK(tm.M(0, 0) == doctest::Approx(0.8));
  CHECK(tm.M(1, 0) == doctest::Approx(0.2));
  CHECK(tm.M(0, 1) == doctest::Approx(0.3));
  CHECK(tm.M(1, 1) == doctest::Approx(0.7));
  CHECK(tm.q[0] == doctest::Approx(0.55));
  CHECK(tm.q[1] == doctest::Approx(0.45));
}

TEST_CASE("feature_histograms bin around the midpoint") {
  Matrix val(4, 1);
  val << 0.0, 1.0, 2.0, 10.0;
  const std::vector<int> labels = {0, 0, 1, 1};
  Matrix sample(4, 1);
  sample << 1.0, 2.0, 6.0, 9.0;
  const TransferModel tm =
      feature_histograms(sample, val, labels, 2, 2, feature_ranges(val));
  // Bins split [0, 10] at 5.
  CHECK(tm.q[0] == doctest::Approx(0.5));
  CHECK(tm.q[1] == doctest::Approx(0.5));
}

TEST_CASE("feature_histogram q equals the column of a single-class sample") {
  Rng rng(3);
  Matrix val(30, 3);
  for (Index i = 0; i < val.size(); ++i) val.data()[i] = rng.uniform();
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) labels.push_back(i < 15 ? 0 : 1);

  const Matrix class1 = val.bottomRows(15);
  const TransferModel tm =
      feature_histograms(class1, val, labels, 2, 3, feature_ranges(val));
  CHECK(test::max_abs_diff(tm.q, tm.M.col(1)) < 1e-12);
}

TEST_CASE("feature_histograms match hand binning and sum to d") {
  Matrix val(4, 3);
  val << 0.0, 0.0, 0.0,
         1.0, 3.0, 6.0,
         2.0, 6.0, 3.0,
         3.0, 9.0, 9.0;
  const std::vector<int> labels = {0, 0, 1, 1};
  const TransferModel tm =
      feature_histograms(val, val, labels, 2, 3, feature_ranges(val));
  // Feature 0 range [0,3], bins [0,1) [1,2) [2,3]: values 0,1,2,3 land in
  // bins 0, 1, 2, 2.
  CHECK(tm.q[0] == doctest::Approx(0.25));
  CHECK(tm.q[1] == doctest::Approx(0.25));
  CHECK(tm.q[2] == doctest::Approx(0.5));
  CHECK(tm.q.sum() == doctest::Approx(3.0).epsilon(1e-12));
  for (Index c = 0; c < 2; ++c) {
    CHECK(tm.M.col(c).sum() == doctest::Approx(3.0).epsilon(1e-12));
  }
}

TEST_CASE("feature_histograms clamp out-of-range values") {
  Matrix val(2, 1);
  val << 0.0, 1.0;
  const std::vector<int> labels = {0, 1};
  Matrix sample(2, 1);
  sample << -5.0, 7.0;
  const TransferModel tm =
      feature_histograms(sample, val, labels, 2, 2, feature_ranges(val));
  CHECK(tm.q[0] == doctest::Approx(0.5));
  CHECK(tm.q[1] == doctest::Approx(0.5));
}

TEST_CASE("feature_histograms reject constant features") {
  Matrix val(3, 1);
  val << 2.0, 2.0, 2.0;
  const std::vector<int> labels = {0, 1, 0};
  CHECK_THROWS_AS(
      feature_histograms(val, val, labels, 2, 2, feature_ranges(val)),
      DegenerateFeature);
}

TEST_CASE("posterior_histograms put one-hot mass in extreme bins") {
  const std::vector<int> labels = {0, 1};
  const Matrix val = one_hot_rows(labels, 2);
  const TransferModel tm = posterior_histograms(val, val, labels, 2, 2);
  // Class 0 one-hot: coordinate 0 = 1 (upper bin), coordinate 1 = 0 (lower);
  // each coordinate histogram carries mass 1/n = 1/2.
  CHECK(tm.M(1, 0) == doctest::Approx(0.5));
  CHECK(tm.M(2, 0) == doctest::Approx(0.5));
  CHECK(tm.M(0, 0) == 0.0);
  CHECK(tm.M.col(0).sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("posterior_histograms concentrate uniform posteriors") {
  const std::vector<int> labels = {0, 1, 2};
  const Matrix uniform = Matrix::Constant(3, 3, 1.0 / 3.0);
  for (int bins : {2, 4, 5}) {
    const TransferModel tm =
        posterior_histograms(uniform, uniform, labels, 3, bins);
    const int expected_bin =
        std::min(static_cast<int>((1.0 / 3.0) * bins), bins - 1);
    for (int f = 0; f < 3; ++f) {
      CHECK(tm.q[f * bins + expected_bin] == doctest::Approx(1.0 / 3.0));
    }
    CHECK(tm.q.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("posterior_histograms match hand binning") {
  Matrix val(3, 2);
  val << 0.9, 0.1,
         0.4, 0.6,
         0.2, 0.8;
  const std::vector<int> labels = {0, 1, 1};
  const TransferModel tm = posterior_histograms(val, val, labels, 2, 2);
  // Coordinate 0 of class 1: values 0.4, 0.2 -> both lower bin (mass 1/2).
  CHECK(tm.M(0, 1) == doctest::Approx(0.5));
  // Coordinate 1 of class 1: values 0.6, 0.8 -> both upper bin.
  CHECK(tm.M(3, 1) == doctest::Approx(0.5));
  CHECK(tm.M(1, 0) == doctest::Approx(0.5));
}

TEST_CASE("energy_features vanish on identical posteriors") {
  const std::vector<int> labels = {0, 1, 0, 1};
  const Matrix same = Matrix::Constant(4, 2, 0.5);
  const TransferModel tm =
      energy_features(same, same, labels, 2, std::nullopt, 0);
  CHECK(tm.q.cwiseAbs().maxCoeff() == 0.0);
  CHECK(tm.M.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("energy_features of opposite extreme one-hots give distance 2") {
  Matrix val(3, 3);
  val << 1.0, 0.0, 0.0,   // class 0 posterior at the low extreme
         0.0, 0.0, 1.0,   // class 1 posterior at the high extreme
         0.0, 1.0, 0.0;   // class 2 in the middle
  const std::vector<int> labels = {0, 1, 2};
  const TransferModel tm =
      energy_features(val, val, labels, 3, std::nullopt, 0);
  CHECK(tm.M(0, 1) == doctest::Approx(2.0));
  CHECK(tm.M(1, 0) == doctest::Approx(2.0));
}

TEST_CASE("energy_features match a brute-force double loop") {
  Rng rng(7);
  const Matrix val = test::random_posteriors(6, 3, rng);
  const std::vector<int> labels = {0, 0, 1, 1, 2, 2};
  const Matrix sample = test::random_posteriors(4, 3, rng);
  const TransferModel tm =
      energy_features(sample, val, labels, 3, std::nullopt, 0);

  const auto md = [](const Vector& a, const Vector& b) {
    return match_distance(Distribution(a), Distribution(b));
  };
  for (int c = 0; c < 3; ++c) {
    double total = 0.0;
    for (Index i = 0; i < 4; ++i) {
      for (Index j = 0; j < 2; ++j) {
        total += md(sample.row(i).transpose(), val.row(2 * c + j).transpose());
      }
    }
    CHECK(tm.q[c] == doctest::Approx(total / 8.0).epsilon(1e-12));
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      double total = 0.0;
      for (Index i = 0; i < 2; ++i) {
        for (Index j = 0; j < 2; ++j) {
          total += md(val.row(2 * a + i).transpose(),
                      val.row(2 * b + j).transpose());
        }
      }
      CHECK(tm.M(a, b) == doctest::Approx(total / 4.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("energy_features M is symmetric") {
  Rng rng(8);
  const Matrix val = test::random_posteriors(40, 4, rng);
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) labels.push_back(i % 4);
  const TransferModel tm =
      energy_features(val, val, labels, 4, std::nullopt, 0);
  CHECK((tm.M - tm.M.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("energy cap subsamples deterministically") {
  Rng rng(9);
  const Matrix val = test::random_posteriors(60, 3, rng);
  std::vector<int> labels;
  for (int i = 0; i < 60; ++i) labels.push_back(i % 3);
  const TransferModel a = energy_features(val, val, labels, 3, 5, 123);
  const TransferModel b = energy_features(val, val, labels, 3, 5, 123);
  CHECK((a.M - b.M).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.class_posteriors[0].rows() == 5);
}

TEST_CASE("ranking_score maps one-hot and uniform posteriors") {
  Vector one_hot = Vector::Zero(5);
  one_hot[2] = 1.0;
  CHECK(ranking_score(one_hot) == doctest::Approx(3.0));
  CHECK(ranking_score(Vector::Constant(5, 0.2)) == doctest::Approx(3.0));
  CHECK(ranking_score(Vector::Constant(4, 0.25)) == doctest::Approx(2.5));
}

TEST_CASE("ranking_histogram matches hand binning") {
  Matrix sample(4, 5);
  sample.setZero();
  sample(0, 0) = 1.0;                     // r = 1
  sample(1, 4) = 1.0;                     // r = 5
  sample.row(2) << 0.5, 0.5, 0, 0, 0;     // r = 1.5
  sample.row(3) << 0, 0, 0, 0.5, 0.5;     // r = 4.5
  Matrix val = Matrix::Identity(5, 5);    // class c has r = c + 1 exactly
  const std::vector<int> labels = {0, 1, 2, 3, 4};
  const TransferModel tm = ranking_histogram(sample, val, labels, 5, 5);
  // Bins over [1, 5], width 0.8: r=1, 1.5 -> bin 0; r=4.5, 5 -> bin 4.
  CHECK(tm.q[0] == doctest::Approx(0.5));
  CHECK(tm.q[4] == doctest::Approx(0.5));
  CHECK(tm.M(0, 0) == doctest::Approx(1.0));
  CHECK(tm.M(1, 1) == doctest::Approx(1.0));  // r=2 -> bin floor(1/0.8)=1
  CHECK(tm.M(2, 2) == doctest::Approx(1.0));
  CHECK(tm.M(3, 3) == doctest::Approx(1.0));
  CHECK(tm.M(4, 4) == doctest::Approx(1.0));
}

TEST_CASE("column-normalized representations keep M p on the simplex") {
  Rng rng(10);
  const Matrix val = test::random_posteriors(50, 4, rng);
  std::vector<int> labels;
  for (int i = 0; i < 50; ++i) labels.push_back(i % 4);
  std::vector<int> preds;
  for (int i = 0; i < 50; ++i) preds.push_back(static_cast<int>(rng.integer(4)));

  const TransferModel models[] = {
      hard_counts(preds, preds, labels, 4),
      soft_means(val, val, labels, 4),
      posterior_histograms(val, val, labels, 4, 3),
      ranking_histogram(val, val, labels, 4, 6),
  };
  for (const TransferModel& tm : models) {
    for (int trial = 0; trial < 50; ++trial) {
      const Distribution p = test::random_interior(4, rng, 0.0);
      const Vector image = tm.M * p.values();
      CHECK(image.minCoeff() >= -1e-12);
      CHECK(image.sum() == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("sample embedding converges to M p on matched draws") {
  // sigma drawn from the validation class-conditionals with prevalence p
  // gives q near M p; 3-sigma binomial bound per component.
  Rng rng(11);
  const int n = 3;
  const Index val_per_class = 200;
  Matrix val(val_per_class * n, n);
  std::vector<int> labels;
  for (int c = 0; c < n; ++c) {
    for (Index i = 0; i < val_per_class; ++i) {
      Vector row(n);
      for (Index j = 0; j < n; ++j) {
        row[j] = 0.2 + rng.uniform() + (j == c ? 1.0 : 0.0);
      }
      row /= row.sum();
      val.row(c * val_per_class + i) = row;
      labels.push_back(c);
    }
  }
  const Vector p_true = (Vector(3) << 0.5, 0.3, 0.2).finished();
  const Index draw_count = 20000;
  Matrix sample(draw_count, n);
  for (Index i = 0; i < draw_count; ++i) {
    const double u = rng.uniform();
    const int c = u < 0.5 ? 0 : (u < 0.8 ? 1 : 2);
    sample.row(i) = val.row(
        c * val_per_class + static_cast<Index>(rng.integer(val_per_class)));
  }
  const TransferModel tm = soft_means(sample, val, labels, n);
  const Vector expected = tm.M * p_true;
  const double bound = 3.0 * std::sqrt(0.25 / static_cast<double>(draw_count));
  for (Index j = 0; j < n; ++j) {
    CHECK(std::abs(tm.q[j] - expected[j]) < bound + 1e-6);
  }
}
