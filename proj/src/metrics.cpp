#include "ordq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "ordq/error.hpp"

namespace ordq {

std::string measure_name(Measure m) {
  return m == Measure::nmd ? "NMD" : "RNOD";
}

Measure parse_measure(const std::string& name) {
  if (name == "NMD" || name == "nmd") return Measure::nmd;
  if (name == "RNOD" || name == "rnod") return Measure::rnod;
  throw ConfigError("unknown measure: " + name);
}

double match_distance(const Distribution& p, const Distribution& estimate) {
  if (p.size() != estimate.size()) {
    throw DimensionError("match_distance requires equal lengths");
  }
  double cum_true = 0.0;
  double cum_est = 0.0;
  double total = 0.0;
  for (Index i = 0; i + 1 < p.size(); ++i) {
    cum_true += p[i];
    cum_est += estimate[i];
    total += std::abs(cum_est - cum_true);
  }
  return total;
}

double nmd(const Distribution& p, const Distribution& estimate) {
  const Index n = p.size();
  if (n < 2) throw DimensionError("nmd requires n >= 2");
  return match_distance(p, estimate) / static_cast<double>(n - 1);
}

double rnod(const Distribution& p, const Distribution& estimate) {
  const Index n = p.size();
  if (n != estimate.size()) {
    throw DimensionError("rnod requires equal lengths");
  }
  Index support = 0;
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (p[i] <= 0.0) continue;
    ++support;
    for (Index j = 0; j < n; ++j) {
      const double diff = p[j] - estimate[j];
      total += static_cast<double>(std::abs(j - i)) * diff * diff;
    }
  }
  if (support == 0) {
    throw DimensionError("rnod requires a distribution with support");
  }
  return std::sqrt(total /
                   (static_cast<double>(support) * static_cast<double>(n - 1)));
}

namespace {

// Midpoint ranks of |values|, averaging over tied magnitudes.
std::vector<double> midrank(const std::vector<double>& magnitudes) {
  const std::size_t m = magnitudes.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return magnitudes[a] < magnitudes[b];
  });
  std::vector<double> ranks(m);
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    while (j + 1 < m &&
           magnitudes[order[j + 1]] == magnitudes[order[i]]) {
      ++j;
    }
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

double wilcoxon_signed_rank(const ScoreSeries& a, const ScoreSeries& b) {
  if (a.scores.size() != b.scores.size()) {
    throw DimensionError("wilcoxon_signed_rank requires equal lengths");
  }
  std::vector<double> diffs;
  diffs.reserve(a.scores.size());
  for (std::size_t i = 0; i < a.scores.size(); ++i) {
    const double d = a.scores[i] - b.scores[i];
    if (d != 0.0) diffs.push_back(d);
  }
  const std::size_t m = diffs.size();
  if (m < 10) {
    throw TooFewPairs("wilcoxon_signed_rank requires >= 10 nonzero pairs");
  }
  std::vector<double> magnitudes(m);
  for (std::size_t i = 0; i < m; ++i) magnitudes[i] = std::abs(diffs[i]);
  const std::vector<double> ranks = midrank(magnitudes);

  double w_plus = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (diffs[i] > 0.0) w_plus += ranks[i];
  }
  const double dm = static_cast<double>(m);
  const double mean = dm * (dm + 1.0) / 4.0;
  double variance = dm * (dm + 1.0) * (2.0 * dm + 1.0) / 24.0;
  std::map<double, double> tie_counts;
  for (double mag : magnitudes) tie_counts[mag] += 1.0;
  for (const auto& [mag, count] : tie_counts) {
    variance -= (count * count * count - count) / 48.0;
  }
  const double z = (w_plus - mean) / std::sqrt(variance);
  return std::min(1.0, 2.0 * normal_sf(std::abs(z)));
}

Summary summarize(const ScoreSeries& series) {
  if (series.scores.empty()) {
    throw EmptyInput("summarize requires a nonempty series");
  }
  const double count = static_cast<double>(series.scores.size());
  const double mean =
      std::accumulate(series.scores.begin(), series.scores.end(), 0.0) / count;
  double ss = 0.0;
  for (double s : series.scores) ss += (s - mean) * (s - mean);
  return Summary{mean, std::sqrt(ss / count)};
}

}  // namespace ordq
