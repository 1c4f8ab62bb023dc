#include "ordq/simplex.hpp"

#include <cmath>

#include <doctest.h>

#include "ordq/error.hpp"
#include "testutil.hpp"

using namespace ordq;
using test::make_distribution;

TEST_CASE("softmax of zeros is uniform") {
  const Distribution p = softmax(LatentVector::zeros(5));
  for (Index i = 0; i < 5; ++i) CHECK(p[i] == doctest::Approx(0.2));
}

TEST_CASE("softmax maps (0, ln 2, 0) to (0.25, 0.5, 0.25)") {
  Vector l(3);
  l << 0.0, std::log(2.0), 0.0;
  const Distribution p = softmax(LatentVector(l));
  CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p[2] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("softmax is stabilized against overflow") {
  Vector l(3);
  l << 0.0, 700.0, 0.0;
  const Distribution p = softmax(LatentVector(l));
  CHECK(std::isfinite(p[0]));
  CHECK(p[1] == doctest::Approx(1.0));
}

TEST_CASE("softmax output is a valid distribution for extreme latents") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Vector l(6);
    l[0] = 0.0;
    for (Index i = 1; i < 6; ++i) l[i] = rng.uniform(-800.0, 800.0);
    CHECK_NOTHROW(softmax(LatentVector(l)));  // ctor enforces the invariants
  }
}

TEST_CASE("latent_of inverts softmax") {
  const LatentVector l = latent_of(Distribution::uniform(4));
  for (Index i = 0; i < 4; ++i) CHECK(l[i] == 0.0);

  const Distribution p = make_distribution({0.25, 0.5, 0.25});
  const LatentVector lp = latent_of(p);
  CHECK(lp[0] == 0.0);
  CHECK(lp[1] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(lp[2] == doctest::Approx(0.0));

  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Distribution q = test::random_interior(5, rng);
    const Distribution round_trip = softmax(latent_of(q));
    CHECK(test::max_abs_diff(round_trip.values(), q.values()) < 1e-12);
  }
}

TEST_CASE("latent_of rejects zero components") {
  CHECK_THROWS_AS(latent_of(make_distribution({0.5, 0.0, 0.5})), ZeroComponent);
}

TEST_CASE("LatentVector pins the first component") {
  Vector l(3);
  l << 0.1, 0.0, 0.0;
  CHECK_THROWS_AS(LatentVector(std::move(l)), DimensionError);
}

TEST_CASE("sample_uniform with n=2 returns (u, 1-u)") {
  Rng rng(42);
  Rng replay(42);
  const Distribution p = sample_uniform(2, rng);
  const double u = replay.uniform();
  CHECK(p[0] == doctest::Approx(u).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(1.0 - u).epsilon(1e-15));
}

TEST_CASE("sample_uniform component means approach 1/n") {
  Rng rng(7);
  Vector mean = Vector::Zero(5);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) mean += sample_uniform(5, rng).values();
  mean /= draws;
  for (Index i = 0; i < 5; ++i) {
    CHECK(std::abs(mean[i] - 0.2) < 0.005);
  }
}

TEST_CASE("sample_uniform mean jaggedness matches the reported APP level") {
  Rng rng(19);
  double total = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) total += jaggedness(sample_uniform(5, rng), 1);
  CHECK(std::abs(total / draws - 0.0995) < 0.004);
}

TEST_CASE("jaggedness reproduces the worked values") {
  const Distribution smooth = make_distribution({0.20, 0.10, 0.05, 0.20, 0.45});
  const Distribution jagged = make_distribution({0.02, 0.47, 0.02, 0.47, 0.02});
  CHECK(jaggedness(smooth, 1) == doctest::Approx(0.00875).epsilon(1e-9));
  CHECK(jaggedness(jagged, 1) == doctest::Approx(0.405).epsilon(1e-9));
  CHECK(jaggedness(jagged, 0) == doctest::Approx(0.405).epsilon(1e-9));

  const Distribution smooth_v2 =
      make_distribution({0.20, 0.10, 0.05, 0.25, 0.40});
  CHECK(jaggedness(smooth_v2, 0) == doctest::Approx(0.0375).epsilon(1e-9));

  // The printed parabola example sums to 0.985, so it is evaluated through
  // the raw-vector form of the same stencil.
  Vector parabola(5);
  parabola << 0.129, 0.093, 0.127, 0.231, 0.405;
  CHECK(jaggedness_raw(parabola, 2) < 1e-12);
}

TEST_CASE("jaggedness vanishes on degree-k polynomials") {
  CHECK(jaggedness(Distribution::uniform(7), 0) < 1e-15);
  const Distribution line = make_distribution({0.0, 0.1, 0.2, 0.3, 0.4});
  CHECK(jaggedness(line, 1) < 1e-15);
}

TEST_CASE("jaggedness rejects unsupported orders") {
  CHECK_THROWS_AS(jaggedness(Distribution::uniform(6), 3), UnsupportedOrder);
  CHECK_THROWS_AS(jaggedness(Distribution::uniform(6), -1), UnsupportedOrder);
}

TEST_CASE("tikhonov reproduces the printed matrices") {
  const TikhonovMatrix c1 = tikhonov(5, 1);
  REQUIRE(c1.rows().rows() == 3);
  REQUIRE(c1.rows().cols() == 5);
  Matrix expected1(3, 5);
  expected1 << -1, 2, -1, 0, 0,
                0, -1, 2, -1, 0,
                0, 0, -1, 2, -1;
  CHECK((c1.rows() - expected1).cwiseAbs().maxCoeff() == 0.0);

  const TikhonovMatrix c0 = tikhonov(4, 0);
  REQUIRE(c0.rows().rows() == 3);
  Matrix expected0(3, 4);
  expected0 << 1, -1, 0, 0,
               0, 1, -1, 0,
               0, 0, 1, -1;
  CHECK((c0.rows() - expected0).cwiseAbs().maxCoeff() == 0.0);

  const TikhonovMatrix c2 = tikhonov(6, 2);
  REQUIRE(c2.rows().rows() == 3);
  Matrix expected2(3, 6);
  expected2 << -1, 3, -3, 1, 0, 0,
                0, -1, 3, -3, 1, 0,
                0, 0, -1, 3, -3, 1;
  CHECK((c2.rows() - expected2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tikhonov generalizes beyond order 2") {
  const TikhonovMatrix c3 = tikhonov(8, 3);
  REQUIRE(c3.rows().rows() == 4);
  // Alternating binomials of order 4 on each row.
  const double pattern[] = {1, -4, 6, -4, 1};
  for (Index r = 0; r < 4; ++r) {
    for (Index j = 0; j < 8; ++j) {
      const Index offset = j - r;
      const double expected =
          (offset >= 0 && offset < 5) ? pattern[offset] : 0.0;
      CHECK(c3.rows()(r, j) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("tikhonov rows sum to zero") {
  for (int k = 0; k <= 4; ++k) {
    for (Index n = k + 2; n <= 10; ++n) {
      const TikhonovMatrix c = tikhonov(n, k);
      REQUIRE(c.rows().rows() == n - 1 - k);
      for (Index r = 0; r < c.rows().rows(); ++r) {
        CHECK(std::abs(c.rows().row(r).sum()) < 1e-9);
      }
    }
  }
}

TEST_CASE("tikhonov rejects too few classes") {
  CHECK_THROWS_AS(tikhonov(3, 2), DimensionError);
  CHECK_THROWS_AS(tikhonov(2, 1), DimensionError);
}

TEST_CASE("matrix and scalar jaggedness agree") {
  Rng rng(23);
  for (Index n = 3; n <= 12; ++n) {
    const TikhonovMatrix c1 = tikhonov(n, 1);
    const double factor = std::min<double>(6.0, static_cast<double>(n) + 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      const Distribution p = test::random_interior(n, rng, 0.0);
      const double via_matrix =
          (c1.rows() * p.values()).squaredNorm() / factor;
      CHECK(std::abs(via_matrix - jaggedness(p, 1)) < 1e-12);
    }
  }
}

TEST_CASE("regularizer values") {
  const TikhonovMatrix c1 = tikhonov(5, 1);
  const Distribution jagged = make_distribution({0.02, 0.47, 0.02, 0.47, 0.02});
  CHECK(regularizer(jagged, c1, 0.0) == 0.0);
  // (min(6, n+1) / 2) * xi_1 = 3 * 0.405
  CHECK(regularizer(jagged, c1, 1.0) == doctest::Approx(1.215).epsilon(1e-9));

  const Distribution line = make_distribution({0.0, 0.1, 0.2, 0.3, 0.4});
  CHECK(regularizer(line, c1, 5.0) == doctest::Approx(0.0));

  CHECK_THROWS_AS(regularizer(Distribution::uniform(4), c1, 1.0),
                  DimensionError);
}

TEST_CASE("regularizer is invariant under constant shifts") {
  Rng rng(31);
  for (int k = 0; k <= 3; ++k) {
    const TikhonovMatrix c = tikhonov(8, k);
    for (int trial = 0; trial < 20; ++trial) {
      Vector v(8);
      for (Index i = 0; i < 8; ++i) v[i] = rng.uniform(-2.0, 2.0);
      const double shift = rng.uniform(-5.0, 5.0);
      const Vector shifted = v.array() + shift;
      CHECK((c.rows() * v).squaredNorm() ==
            doctest::Approx((c.rows() * shifted).squaredNorm()).epsilon(1e-9));
    }
  }
}

TEST_CASE("distribution invariants are enforced") {
  Vector bad(3);
  bad << 0.5, 0.6, 0.2;
  CHECK_THROWS_AS(Distribution(std::move(bad)), DimensionError);
  Vector negative(3);
  negative << 0.7, 0.5, -0.2;
  CHECK_THROWS_AS(Distribution(std::move(negative)), DimensionError);
}
