#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ordq/simplex.hpp"
#include "ordq/transfer.hpp"

namespace ordq {

enum class LossKind {
  least_squares,  // || q - M p ||^2
  hellinger,      // mean per-histogram Hellinger distance
  poisson_run,    // Poisson negative log-likelihood over counts
  energy,         // 2 p'q - p'Mp with pairwise-distance q, M
  cdf_l2,         // squared L2 norm between cumulative histograms
  cdf_l1,         // match distance between histograms (L1 of cumulatives)
};

std::string loss_kind_name(LossKind k);

struct LossSpec {
  LossKind kind = LossKind::least_squares;
  double tau = 0.0;
  std::optional<TikhonovMatrix> tikhonov;  // required when tau > 0
  Index sample_size = 0;                   // poisson_run count scale |sigma|
};

struct SolverConfig {
  int max_iter = 10000;
  double grad_tol = 1e-8;
  int restarts = 0;  // seeded random restarts beyond the uniform init
  std::uint64_t seed = 0;
  std::optional<Distribution> warm_start;
};

// Prior smoothing between EM iterations: interpolate the iterate with its
// low-order polynomial fit. interp_factor 0 disables smoothing.
struct SmoothingConfig {
  int poly_order = 0;          // 0 or 1
  double interp_factor = 0.0;  // in [0, 1]
};

struct SolveResult {
  Distribution estimate;
  double loss_value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Base loss of `spec` at p, plus (tau / 2)||C p||^2 when tau > 0.
double evaluate_loss(const LossSpec& spec, const Distribution& p,
                     const TransferModel& tm);

// Analytic gradient of evaluate_loss(softmax(latent)) with respect to the
// latent vector; the pinned first component is reported as zero. For cdf_l1
// this is a subgradient with sign(0) = 0.
Vector loss_gradient(const LossSpec& spec, const Vector& latent,
                     const TransferModel& tm);

// Minimizes the loss over the simplex through the pinned-softmax latent
// parameterization: gradient descent with Armijo backtracking from the
// uniform initializer, plus cfg.restarts seeded standard-normal restarts;
// returns the best-loss run. cdf_l1 falls back to subgradient descent with
// diminishing steps and best-iterate tracking.
SolveResult minimize(const LossSpec& spec, const TransferModel& tm,
                     const SolverConfig& cfg);

// Expectation-maximization prior adjustment over per-item posteriors,
// started from the training prevalence. With smoothing, each iterate is
// interpolated with its polynomial fit before becoming the next prior.
SolveResult sld(const Matrix& proba_sample, const Distribution& train_prevalence,
                const std::optional<SmoothingConfig>& smoothing,
                int max_iter = 1000, double tol = 1e-6);

// Iterative Bayesian unfolding over a column-normalized count transfer
// model whose q is filled, with the same inter-iteration smoothing.
SolveResult ibu(const TransferModel& tm, const Distribution& prior,
                const SmoothingConfig& smoothing, int max_iter = 1000,
                double tol = 1e-6);

// Least-squares polynomial (order 0 or 1) fit to (i, p_i), clipped at zero
// and renormalized.
Distribution polyfit_smooth(const Distribution& p, int order);

}  // namespace ordq
