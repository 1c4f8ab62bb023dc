#include "ordq/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ordq/error.hpp"
#include "ordq/rng.hpp"

namespace ordq {

std::vector<Index> largest_remainder_counts(const Distribution& p,
                                            Index total) {
  const Index n = p.size();
  std::vector<Index> counts(static_cast<std::size_t>(n));
  std::vector<std::pair<double, Index>> remainders;
  Index assigned = 0;
  for (Index i = 0; i < n; ++i) {
    const double exact = p[i] * static_cast<double>(total);
    const double floored = std::floor(exact);
    counts[static_cast<std::size_t>(i)] = static_cast<Index>(floored);
    assigned += static_cast<Index>(floored);
    remainders.emplace_back(exact - floored, i);
  }
  // Largest fractional part first; ties go to the lower class index.
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (Index extra = 0; extra < total - assigned; ++extra) {
    ++counts[static_cast<std::size_t>(
        remainders[static_cast<std::size_t>(extra)].second)];
  }
  return counts;
}

namespace {

std::vector<std::vector<Index>> members_by_class(const LabeledDataset& data) {
  std::vector<std::vector<Index>> members(
      static_cast<std::size_t>(data.n_classes));
  for (Index i = 0; i < data.size(); ++i) {
    members[static_cast<std::size_t>(data.labels[static_cast<std::size_t>(i)])]
        .push_back(i);
  }
  return members;
}

void shuffle_indices(std::vector<Index>& indices, Rng& rng) {
  for (std::size_t i = indices.size(); i > 1; --i) {
    std::swap(indices[i - 1], indices[static_cast<std::size_t>(rng.integer(i))]);
  }
}

}  // namespace

SplitIndices stratified_split(const LabeledDataset& data, Index train_size,
                              Index val_pool_size, Index test_pool_size,
                              std::uint64_t seed) {
  data.validate();
  if (train_size + val_pool_size + test_pool_size > data.size()) {
    throw InsufficientData("split sizes exceed the dataset");
  }
  const Distribution prevalence = data.prevalence();
  const std::vector<Index> train_counts =
      largest_remainder_counts(prevalence, train_size);
  const std::vector<Index> val_counts =
      largest_remainder_counts(prevalence, val_pool_size);
  const std::vector<Index> test_counts =
      largest_remainder_counts(prevalence, test_pool_size);

  auto members = members_by_class(data);
  Rng rng(seed);
  SplitIndices split;
  for (int c = 0; c < data.n_classes; ++c) {
    auto& pool = members[static_cast<std::size_t>(c)];
    const Index need = train_counts[static_cast<std::size_t>(c)] +
                       val_counts[static_cast<std::size_t>(c)] +
                       test_counts[static_cast<std::size_t>(c)];
    if (need > static_cast<Index>(pool.size())) {
      throw InsufficientData("class " + std::to_string(c) +
                             " too small for the requested split");
    }
    shuffle_indices(pool, rng);
    std::size_t cursor = 0;
    for (Index i = 0; i < train_counts[static_cast<std::size_t>(c)]; ++i) {
      split.train.push_back(pool[cursor++]);
    }
    for (Index i = 0; i < val_counts[static_cast<std::size_t>(c)]; ++i) {
      split.validation.push_back(pool[cursor++]);
    }
    for (Index i = 0; i < test_counts[static_cast<std::size_t>(c)]; ++i) {
      split.test.push_back(pool[cursor++]);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

AppDraw draw_app(const LabeledDataset& pool, const ProtocolConfig& cfg) {
  pool.validate();
  const int n = pool.n_classes;
  if (cfg.sample_size < n) {
    throw ConfigError("sample_size must be at least the class count");
  }
  if (cfg.n_samples < 1) throw ConfigError("n_samples must be positive");
  const auto members = members_by_class(pool);
  for (int c = 0; c < n; ++c) {
    if (members[static_cast<std::size_t>(c)].empty()) {
      throw MissingClass("pool lacks class " + std::to_string(c));
    }
  }

  AppDraw out;
  out.samples.reserve(static_cast<std::size_t>(cfg.n_samples));
  for (int s = 0; s < cfg.n_samples; ++s) {
    Rng rng = Rng::derive(cfg.seed, static_cast<std::uint64_t>(s));
    Distribution target = Distribution::uniform(n);
    std::vector<Index> counts;
    bool feasible = false;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      target = sample_uniform(n, rng);
      counts = largest_remainder_counts(target, cfg.sample_size);
      feasible = true;
      for (int c = 0; c < n; ++c) {
        if (counts[static_cast<std::size_t>(c)] >
            static_cast<Index>(members[static_cast<std::size_t>(c)].size())) {
          feasible = false;
          break;
        }
      }
      if (feasible) break;
      ++out.rejections;
    }
    if (!feasible) {
      throw Unsatisfiable("1000 consecutive prevalence draws infeasible");
    }

    std::vector<Index> drawn;
    drawn.reserve(static_cast<std::size_t>(cfg.sample_size));
    Vector realized(n);
    for (int c = 0; c < n; ++c) {
      // Partial Fisher-Yates: the first `count` entries of a fresh shuffle,
      // leaving the pool untouched for the next sample.
      std::vector<Index> candidates = members[static_cast<std::size_t>(c)];
      const Index count = counts[static_cast<std::size_t>(c)];
      for (Index i = 0; i < count; ++i) {
        const std::size_t j =
            static_cast<std::size_t>(i) +
            static_cast<std::size_t>(rng.integer(candidates.size() -
                                                 static_cast<std::size_t>(i)));
        std::swap(candidates[static_cast<std::size_t>(i)], candidates[j]);
        drawn.push_back(candidates[static_cast<std::size_t>(i)]);
      }
      realized[c] =
          static_cast<double>(count) / static_cast<double>(cfg.sample_size);
    }
    out.samples.push_back(DrawnSample{std::move(drawn), target,
                                      Distribution(std::move(realized)),
                                      cfg.sample_size});
  }
  return out;
}

std::vector<DrawnSample> filter_smoothest(const std::vector<DrawnSample>& samples,
                                          double percent) {
  if (percent <= 0.0 || percent > 100.0) {
    throw ConfigError("retain percent must be in (0, 100]");
  }
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return jaggedness(samples[a].realized_prevalence, 1) <
           jaggedness(samples[b].realized_prevalence, 1);
  });
  const auto keep = static_cast<std::size_t>(
      std::ceil(percent / 100.0 * static_cast<double>(samples.size())));
  std::vector<std::size_t> kept(order.begin(),
                                order.begin() + static_cast<std::ptrdiff_t>(
                                                    std::min(keep, order.size())));
  std::sort(kept.begin(), kept.end());  // back to draw order
  std::vector<DrawnSample> out;
  out.reserve(kept.size());
  for (std::size_t i : kept) out.push_back(samples[i]);
  return out;
}

LabeledDataset synth_ordinal(int n_classes, Index dim, Index size,
                             double overlap, const Distribution& prevalence,
                             std::uint64_t seed) {
  if (n_classes < 3) throw ConfigError("synthetic data requires n >= 3");
  if (dim < 1) throw ConfigError("synthetic data requires d >= 1");
  if (overlap <= 0.0) throw ConfigError("overlap must be positive");
  if (prevalence.size() != n_classes) {
    throw DimensionError("prevalence length does not match class count");
  }
  const std::vector<Index> counts = largest_remainder_counts(prevalence, size);

  LabeledDataset data;
  data.n_classes = n_classes;
  data.features.resize(size, dim);
  data.labels.reserve(static_cast<std::size_t>(size));
  Rng rng(seed);
  Index row = 0;
  for (int c = 0; c < n_classes; ++c) {
    for (Index i = 0; i < counts[static_cast<std::size_t>(c)]; ++i) {
      data.features(row, 0) =
          static_cast<double>(c + 1) + overlap * rng.normal();
      for (Index f = 1; f < dim; ++f) {
        data.features(row, f) = overlap * rng.normal();
      }
      data.labels.push_back(c);
      ++row;
    }
  }
  return data;
}

double pick_retain_percent(double reference_mean_xi1, int n_classes,
                           int mc_draws, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> draws(static_cast<std::size_t>(mc_draws));
  for (auto& x : draws) x = jaggedness(sample_uniform(n_classes, rng), 1);
  std::sort(draws.begin(), draws.end());

  double best_percent = 66.0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (double percent : {66.0, 50.0, 33.0, 20.0, 5.0}) {
    const auto keep = static_cast<std::size_t>(
        std::ceil(percent / 100.0 * static_cast<double>(draws.size())));
    const double mean =
        std::accumulate(draws.begin(),
                        draws.begin() + static_cast<std::ptrdiff_t>(keep), 0.0) /
        static_cast<double>(keep);
    const double gap = std::abs(mean - reference_mean_xi1);
    if (gap < best_gap) {
      best_gap = gap;
      best_percent = percent;
    }
  }
  return best_percent;
}

}  // namespace ordq
