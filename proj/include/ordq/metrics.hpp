#pragma once

#include <string>
#include <vector>

#include "ordq/simplex.hpp"

namespace ordq {

enum class Measure { nmd, rnod };

std::string measure_name(Measure m);
Measure parse_measure(const std::string& name);

// Per-sample error scores of one method under one measure.
struct ScoreSeries {
  std::string method;
  std::vector<double> scores;
  Measure measure = Measure::nmd;
};

// Match Distance with unit inter-class distances: the L1 norm between the
// cumulative distributions.
double match_distance(const Distribution& p, const Distribution& estimate);

// Normalized Match Distance: MD / (n - 1), in [0, 1].
double nmd(const Distribution& p, const Distribution& estimate);

// Root Normalized Order-aware Divergence with d(y_j, y_i) = |j - i|.
double rnod(const Distribution& p, const Distribution& estimate);

// Two-sided paired Wilcoxon signed-rank test p-value. Zero differences are
// dropped; ranks of tied magnitudes are averaged; the normal approximation
// uses the tie-corrected variance and no continuity correction. Throws
// TooFewPairs when fewer than 10 nonzero differences remain.
double wilcoxon_signed_rank(const ScoreSeries& a, const ScoreSeries& b);

struct Summary {
  double mean;
  double stddev;  // population standard deviation
};

Summary summarize(const ScoreSeries& series);

}  // namespace ordq
