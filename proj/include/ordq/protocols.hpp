#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ordq/dataset.hpp"
#include "ordq/simplex.hpp"

namespace ordq {

// One evaluation sample drawn from a pool: the items, the prevalence vector
// that was targeted, and the prevalence actually realized after integer
// rounding.
struct DrawnSample {
  std::vector<Index> indices;  // into the pool, no duplicates
  Distribution target_prevalence;
  Distribution realized_prevalence;
  Index size = 0;
};

struct ProtocolConfig {
  int n_samples = 1;
  Index sample_size = 1000;
  std::optional<double> retain_percent;  // APP-OQ filter, in (0, 100]
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::vector<Index> train;
  std::vector<Index> validation;
  std::vector<Index> test;
};

// Disjoint stratified splits with per-class largest-remainder allocation.
SplitIndices stratified_split(const LabeledDataset& data, Index train_size,
                              Index val_pool_size, Index test_pool_size,
                              std::uint64_t seed);

// Integer class counts for a prevalence vector at a given total (largest
// remainder / Hamilton rounding).
std::vector<Index> largest_remainder_counts(const Distribution& p, Index total);

struct AppDraw {
  std::vector<DrawnSample> samples;
  long rejections = 0;  // prevalence vectors redrawn against the pool
};

// Artificial prevalence protocol: per sample, a uniform simplex draw is
// rounded to class counts and matched by drawing items per class without
// replacement; the pool is fully replaced between samples. Infeasible
// targets are rejected and redrawn; 1000 consecutive rejections throw
// Unsatisfiable. Sample i derives its generator from (seed, i).
AppDraw draw_app(const LabeledDataset& pool, const ProtocolConfig& cfg);

// Keeps the ceil(percent/100 * count) samples of smallest realized-
// prevalence jaggedness, ties broken by draw order.
std::vector<DrawnSample> filter_smoothest(const std::vector<DrawnSample>& samples,
                                          double percent);

// Synthetic ordinal dataset: per-class isotropic Gaussian clouds whose
// means sit at consecutive positions along the first feature axis, so
// adjacent classes are the most confusable. `overlap` is the shared
// standard deviation.
LabeledDataset synth_ordinal(int n_classes, Index dim, Index size,
                             double overlap, const Distribution& prevalence,
                             std::uint64_t seed);

// Grid percent from {66, 50, 33, 20, 5} whose Monte-Carlo mean jaggedness
// under APP-OQ is closest to a reference value.
double pick_retain_percent(double reference_mean_xi1, int n_classes,
                           int mc_draws, std::uint64_t seed);

}  // namespace ordq
