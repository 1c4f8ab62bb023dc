#include "ordq/metrics.hpp"

#include <cmath>

#include <doctest.h>

#include "ordq/error.hpp"
#include "testutil.hpp"

using namespace ordq;
using test::make_distribution;

namespace {

// Direct transcription of the order-aware divergence for cross-checking the
// production implementation through an independent code path.
double rnod_reference(const Distribution& p, const Distribution& estimate) {
  const Index n = p.size();
  double outer = 0.0;
  Index support = 0;
  for (Index i = 0; i < n; ++i) {
    if (!(p[i] > 0.0)) continue;
    ++support;
    for (Index j = 0; j < n; ++j) {
      outer += std::abs(static_cast<double>(j - i)) *
               std::pow(p[j] - estimate[j], 2.0);
    }
  }
  return std::sqrt(outer / (static_cast<double>(support) *
                            static_cast<double>(n - 1)));
}

}  // namespace

TEST_CASE("match distance basics") {
  const Distribution a = make_distribution({0.2, 0.3, 0.5});
  CHECK(match_distance(a, a) == 0.0);

  const Distribution lo = make_distribution({1.0, 0.0, 0.0});
  const Distribution hi = make_distribution({0.0, 0.0, 1.0});
  CHECK(match_distance(lo, hi) == doctest::Approx(2.0));

  const Distribution smooth = make_distribution({0.20, 0.10, 0.05, 0.20, 0.45});
  const Distribution jagged = make_distribution({0.02, 0.47, 0.02, 0.47, 0.02});
  // Cumulative gaps 0.18 + 0.19 + 0.16 + 0.43.
  CHECK(match_distance(smooth, jagged) == doctest::Approx(0.96).epsilon(1e-12));

  CHECK_THROWS_AS(match_distance(a, smooth), DimensionError);
}

TEST_CASE("nmd normalizes to [0, 1]") {
  const Distribution lo = make_distribution({1.0, 0.0, 0.0, 0.0, 0.0});
  const Distribution hi = make_distribution({0.0, 0.0, 0.0, 0.0, 1.0});
  CHECK(nmd(lo, lo) == 0.0);
  CHECK(nmd(lo, hi) == doctest::Approx(1.0));

  const Distribution smooth = make_distribution({0.20, 0.10, 0.05, 0.20, 0.45});
  const Distribution jagged = make_distribution({0.02, 0.47, 0.02, 0.47, 0.02});
  CHECK(nmd(smooth, jagged) == doctest::Approx(0.24).epsilon(1e-12));
}

TEST_CASE("nmd is symmetric and satisfies the triangle inequality") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Distribution a = test::random_interior(5, rng, 0.0);
    const Distribution b = test::random_interior(5, rng, 0.0);
    const Distribution c = test::random_interior(5, rng, 0.0);
    CHECK(nmd(a, b) == doctest::Approx(nmd(b, a)).epsilon(1e-12));
    CHECK(nmd(a, c) <= nmd(a, b) + nmd(b, c) + 1e-12);
    CHECK(nmd(a, b) >= 0.0);
    CHECK(nmd(a, b) <= 1.0);
  }
}

TEST_CASE("rnod known values") {
  const Distribution p = make_distribution({1.0, 0.0, 0.0});
  const Distribution est = make_distribution({0.0, 0.0, 1.0});
  CHECK(rnod(p, p) == 0.0);
  // Support {y1}: |1-1|(1-0)^2 + |2-1| 0 + |3-1|(0-1)^2 = 2; sqrt(2/(1*2)) = 1.
  CHECK(rnod(p, est) == doctest::Approx(1.0).epsilon(1e-12));

  // Frozen random pair, brute-forced offline from the defining equation.
  const Distribution pr = make_distribution(
      {0.22140060404634638, 0.3177813412562256, 0.2747376782010006,
       0.07976542702292367, 0.10631494947350381});
  const Distribution qr = make_distribution(
      {0.2946166097838131, 0.0017757905231038306, 0.2769693584850819,
       0.26882144275876267, 0.15781679844923947});
  CHECK(rnod(pr, qr) == doctest::Approx(0.2268669123379095).epsilon(1e-10));
}

TEST_CASE("rnod matches an independent transcription") {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const Distribution p = test::random_interior(5, rng, 0.0);
    const Distribution est = test::random_interior(5, rng, 0.0);
    CHECK(rnod(p, est) ==
          doctest::Approx(rnod_reference(p, est)).epsilon(1e-12));
    CHECK(rnod(p, est) >= 0.0);
  }
}

TEST_CASE("wilcoxon requires enough nonzero pairs") {
  ScoreSeries a{"a", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}, Measure::nmd};
  CHECK_THROWS_AS(wilcoxon_signed_rank(a, a), TooFewPairs);
}

TEST_CASE("wilcoxon detects a one-sided shift") {
  ScoreSeries a{"a", {}, Measure::nmd};
  ScoreSeries b{"b", {}, Measure::nmd};
  for (int i = 0; i < 30; ++i) {
    const double base = 0.1 + 0.01 * i;
    a.scores.push_back(base + 1.0);
    b.scores.push_back(base);
  }
  CHECK(wilcoxon_signed_rank(a, b) < 0.001);
}

TEST_CASE("wilcoxon matches the reference implementation on a fixture") {
  // 12 paired scores with tied difference magnitudes; expected p-value from
  // scipy.stats.wilcoxon(zero_method='wilcox', correction=False,
  // mode='approx'), computed offline.
  ScoreSeries a{"a",
                {0.12, 0.31, 0.25, 0.41, 0.09, 0.33, 0.22, 0.18, 0.27, 0.35,
                 0.15, 0.29},
                Measure::nmd};
  ScoreSeries b{"b",
                {0.10, 0.28, 0.26, 0.35, 0.05, 0.30, 0.21, 0.11, 0.24, 0.30,
                 0.17, 0.22},
                Measure::nmd};
  CHECK(std::abs(wilcoxon_signed_rank(a, b) - 0.008538987871587798) < 1e-3);
}

TEST_CASE("wilcoxon is rank-based") {
  Rng rng(29);
  ScoreSeries a{"a", {}, Measure::nmd};
  ScoreSeries b{"b", {}, Measure::nmd};
  for (int i = 0; i < 40; ++i) {
    a.scores.push_back(rng.uniform());
    b.scores.push_back(rng.uniform());
  }
  const double p_raw = wilcoxon_signed_rank(a, b);

  // A strictly increasing odd transform of the differences preserves signs
  // and magnitude order, hence the statistic.
  ScoreSeries at{"a", {}, Measure::nmd};
  ScoreSeries bt{"b", {}, Measure::nmd};
  for (std::size_t i = 0; i < a.scores.size(); ++i) {
    const double d = a.scores[i] - b.scores[i];
    at.scores.push_back(std::sinh(3.0 * d));
    bt.scores.push_back(0.0);
  }
  CHECK(wilcoxon_signed_rank(at, bt) == doctest::Approx(p_raw).epsilon(1e-12));
}

TEST_CASE("summarize computes mean and population deviation") {
  ScoreSeries flat{"m", {0.1, 0.1, 0.1}, Measure::nmd};
  const Summary s1 = summarize(flat);
  CHECK(s1.mean == doctest::Approx(0.1));
  CHECK(s1.stddev == doctest::Approx(0.0));

  ScoreSeries pair{"m", {0.0, 1.0}, Measure::nmd};
  const Summary s2 = summarize(pair);
  CHECK(s2.mean == doctest::Approx(0.5));
  CHECK(s2.stddev == doctest::Approx(0.5));

  ScoreSeries empty{"m", {}, Measure::nmd};
  CHECK_THROWS_AS(summarize(empty), EmptyInput);
}

TEST_CASE("summarize matches naive summation on a large series") {
  Rng rng(41);
  ScoreSeries series{"m", {}, Measure::nmd};
  long double naive = 0.0L;
  for (int i = 0; i < 5000; ++i) {
    const double x = rng.uniform();
    series.scores.push_back(x);
    naive += x;
  }
  const Summary s = summarize(series);
  CHECK(std::abs(s.mean - static_cast<double>(naive / 5000.0L)) < 1e-12);
}
