#include "ordq/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "ordq/error.hpp"
#include "ordq/rng.hpp"

namespace ordq {

namespace {

constexpr double kRateFloor = 1e-12;    // Poisson rate clamp before ln
constexpr double kHistFloor = 1e-12;    // Hellinger sqrt clamp

void check_spec(const LossSpec& spec, const TransferModel& tm) {
  if (tm.q.size() != tm.M.rows()) {
    throw DimensionError("transfer model has no embedded sample");
  }
  if (tm.M.cols() != tm.n_classes) {
    throw DimensionError("transfer matrix columns must equal class count");
  }
  if (spec.tau > 0.0) {
    if (!spec.tikhonov) {
      throw DimensionError("tau > 0 requires a Tikhonov matrix");
    }
    if (spec.tikhonov->classes() != tm.n_classes) {
      throw DimensionError("Tikhonov matrix does not match class count");
    }
  }
  if (spec.kind == LossKind::hellinger) {
    if (tm.hist_count < 1 || tm.bins < 1 ||
        static_cast<Index>(tm.hist_count) * tm.bins != tm.M.rows()) {
      throw DimensionError("hellinger loss requires histogram metadata");
    }
  }
  if (spec.kind == LossKind::poisson_run && spec.sample_size < 1) {
    throw DimensionError("poisson_run requires a positive sample size");
  }
}

// Base loss and its gradient with respect to p. Wherever the exact loss has
// a removable singularity (zero rates, empty histogram bins), both the value
// and the gradient use the same clamped surrogate.
double base_loss(const LossSpec& spec, const TransferModel& tm,
                 const Vector& p, Vector* grad_p) {
  const Matrix& M = tm.M;
  const Vector& q = tm.q;
  switch (spec.kind) {
    case LossKind::least_squares: {
      const Vector residual = q - M * p;
      if (grad_p) *grad_p = -2.0 * (M.transpose() * residual);
      return residual.squaredNorm();
    }
    case LossKind::hellinger: {
      const Vector mp = M * p;
      const int d = tm.hist_count;
      const int b = tm.bins;
      double total = 0.0;
      Vector dmp;
      if (grad_p) dmp = Vector::Zero(mp.size());
      for (int h = 0; h < d; ++h) {
        double ss = 0.0;
        for (int j = 0; j < b; ++j) {
          const Index k = static_cast<Index>(h) * b + j;
          const double diff = std::sqrt(std::max(q[k], 0.0)) -
                              std::sqrt(std::max(mp[k], 0.0));
          ss += diff * diff;
        }
        const double hd = std::sqrt(ss);
        total += hd;
        if (grad_p && hd > 0.0) {
          for (int j = 0; j < b; ++j) {
            const Index k = static_cast<Index>(h) * b + j;
            const double mk = std::max(mp[k], kHistFloor);
            dmp[k] = (std::sqrt(mk) - std::sqrt(std::max(q[k], 0.0))) /
                     (2.0 * hd * std::sqrt(mk));
          }
        }
      }
      if (grad_p) *grad_p = M.transpose() * dmp / static_cast<double>(d);
      return total / static_cast<double>(d);
    }
    case LossKind::poisson_run: {
      const double scale = static_cast<double>(spec.sample_size);
      const Vector rates = scale * (M * p);
      double total = 0.0;
      Vector drates;
      if (grad_p) drates = Vector::Zero(rates.size());
      for (Index i = 0; i < rates.size(); ++i) {
        const double rate = std::max(rates[i], kRateFloor);
        const double count = scale * q[i];
        total += rate - count * std::log(rate);
        if (grad_p) drates[i] = scale * (1.0 - count / rate);
      }
      if (grad_p) *grad_p = M.transpose() * drates;
      return total;
    }
    case LossKind::energy: {
      if (grad_p) *grad_p = 2.0 * q - (M + M.transpose()) * p;
      return 2.0 * p.dot(q) - p.dot(M * p);
    }
    case LossKind::cdf_l2: {
      const Vector residual = q - M * p;
      Vector cum(residual.size());
      double running = 0.0;
      for (Index i = 0; i < residual.size(); ++i) {
        running += residual[i];
        cum[i] = running;
      }
      if (grad_p) {
        Vector adjoint(cum.size());
        running = 0.0;
        for (Index i = cum.size() - 1; i >= 0; --i) {
          running += cum[i];
          adjoint[i] = running;
        }
        *grad_p = -2.0 * (M.transpose() * adjoint);
      }
      return cum.squaredNorm();
    }
    case LossKind::cdf_l1: {
      const Vector residual = q - M * p;
      double running = 0.0;
      double total = 0.0;
      Vector sign = Vector::Zero(residual.size());
      for (Index i = 0; i + 1 < residual.size(); ++i) {
        running += residual[i];
        total += std::abs(running);
        sign[i] = running > 0.0 ? 1.0 : (running < 0.0 ? -1.0 : 0.0);
      }
      if (grad_p) {
        Vector adjoint(sign.size());
        running = 0.0;
        for (Index i = sign.size() - 1; i >= 0; --i) {
          running += sign[i];
          adjoint[i] = running;
        }
        *grad_p = -(M.transpose() * adjoint);
      }
      return total;
    }
  }
  throw ConfigError("unreachable loss kind");
}

double full_loss(const LossSpec& spec, const TransferModel& tm,
                 const Vector& p, Vector* grad_p) {
  double value = base_loss(spec, tm, p, grad_p);
  if (spec.tau > 0.0) {
    const Matrix& C = spec.tikhonov->rows();
    const Vector cp = C * p;
    value += 0.5 * spec.tau * cp.squaredNorm();
    if (grad_p) *grad_p += spec.tau * (C.transpose() * cp);
  }
  return value;
}

// Pull a gradient in p back through the softmax Jacobian diag(p) - p p',
// pinning the first latent component.
Vector to_latent_gradient(const Vector& p, const Vector& grad_p) {
  const double mean = p.dot(grad_p);
  Vector g = p.array() * (grad_p.array() - mean);
  g[0] = 0.0;
  return g;
}

struct RunResult {
  Vector latent;
  double loss;
  int iterations;
  bool converged;
};

// Armijo-backtracked gradient descent for the smooth loss kinds. The
// accepted step seeds the next iteration, doubled so the search recovers
// after a cautious stretch.
RunResult descend(const LossSpec& spec, const TransferModel& tm,
                  Vector latent, const SolverConfig& cfg) {
  Vector grad_p;
  Vector p = softmax_values(latent);
  double value = full_loss(spec, tm, p, &grad_p);
  Vector grad = to_latent_gradient(p, grad_p);

  int iter = 0;
  bool converged = false;
  double step = 1.0;
  for (; iter < cfg.max_iter; ++iter) {
    if (grad.norm() <= cfg.grad_tol) {
      converged = true;
      break;
    }
    const double slope = grad.squaredNorm();
    bool accepted = false;
    for (int shrink = 0; shrink < 60; ++shrink) {
      Vector candidate = latent - step * grad;
      Vector cand_p = softmax_values(candidate);
      Vector cand_grad_p;
      const double cand_value = full_loss(spec, tm, cand_p, &cand_grad_p);
      if (cand_value <= value - 1e-4 * step * slope) {
        latent = std::move(candidate);
        p = std::move(cand_p);
        value = cand_value;
        grad = to_latent_gradient(p, cand_grad_p);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent direction at fp resolution
    step *= 2.0;
  }
  return {std::move(latent), value, iter, converged};
}

RunResult descend_tracked(const LossSpec& spec, const TransferModel& tm,
                          Vector latent, const SolverConfig& cfg) {
  if (spec.kind != LossKind::cdf_l1) return descend(spec, tm, latent, cfg);
  // Subgradient iterations are not monotone; keep the best iterate seen.
  Vector grad_p;
  Vector best_latent = latent;
  Vector p = softmax_values(latent);
  double best = full_loss(spec, tm, p, nullptr);
  int iter = 0;
  bool converged = false;
  for (; iter < cfg.max_iter; ++iter) {
    const double value = full_loss(spec, tm, p, &grad_p);
    if (value < best) {
      best = value;
      best_latent = latent;
    }
    const Vector grad = to_latent_gradient(p, grad_p);
    const double norm = grad.norm();
    if (norm <= cfg.grad_tol) {
      converged = true;
      break;
    }
    const double step = 0.5 / std::sqrt(static_cast<double>(iter) + 1.0);
    latent -= (step / norm) * grad;
    latent[0] = 0.0;
    p = softmax_values(latent);
  }
  return {std::move(best_latent), best, iter, converged};
}

}  // namespace

std::string loss_kind_name(LossKind k) {
  switch (k) {
    case LossKind::least_squares: return "least_squares";
    case LossKind::hellinger: return "hellinger";
    case LossKind::poisson_run: return "poisson_run";
    case LossKind::energy: return "energy";
    case LossKind::cdf_l2: return "cdf_l2";
    case LossKind::cdf_l1: return "cdf_l1";
  }
  throw ConfigError("unreachable loss kind");
}

double evaluate_loss(const LossSpec& spec, const Distribution& p,
                     const TransferModel& tm) {
  check_spec(spec, tm);
  if (p.size() != tm.n_classes) {
    throw DimensionError("distribution length does not match class count");
  }
  return full_loss(spec, tm, p.values(), nullptr);
}

Vector loss_gradient(const LossSpec& spec, const Vector& latent,
                     const TransferModel& tm) {
  check_spec(spec, tm);
  if (latent.size() != tm.n_classes) {
    throw DimensionError("latent length does not match class count");
  }
  const Vector p = softmax_values(latent);
  Vector grad_p;
  full_loss(spec, tm, p, &grad_p);
  return to_latent_gradient(p, grad_p);
}

SolveResult minimize(const LossSpec& spec, const TransferModel& tm,
                     const SolverConfig& cfg) {
  check_spec(spec, tm);
  if (cfg.max_iter < 1 || cfg.grad_tol <= 0.0) {
    throw ConfigError("solver requires max_iter >= 1 and grad_tol > 0");
  }
  const Index n = tm.n_classes;

  Vector init = Vector::Zero(n);
  if (cfg.warm_start) {
    if (cfg.warm_start->size() != n) {
      throw DimensionError("warm start length does not match class count");
    }
    init = latent_of(*cfg.warm_start).values();
  }

  RunResult best = descend_tracked(spec, tm, init, cfg);
  for (int restart = 0; restart < cfg.restarts; ++restart) {
    Rng rng = Rng::derive(cfg.seed, static_cast<std::uint64_t>(restart));
    Vector start(n);
    for (Index i = 0; i < n; ++i) start[i] = rng.normal();
    start[0] = 0.0;
    RunResult run = descend_tracked(spec, tm, std::move(start), cfg);
    if (run.loss < best.loss) best = std::move(run);
  }
  return SolveResult{Distribution(softmax_values(best.latent)), best.loss,
                     best.iterations, best.converged};
}

Distribution polyfit_smooth(const Distribution& p, int order) {
  const Index n = p.size();
  if (order < 0 || order > 1) {
    throw UnsupportedOrder("polyfit_smooth supports orders 0 and 1");
  }
  if (n < order + 1) throw DimensionError("too few classes for the fit");
  Vector fitted(n);
  if (order == 0) {
    fitted.setConstant(p.values().mean());
  } else {
    const double x_mean = static_cast<double>(n - 1) / 2.0;
    const double p_mean = p.values().mean();
    double sxx = 0.0;
    double sxp = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double dx = static_cast<double>(i) - x_mean;
      sxx += dx * dx;
      sxp += dx * (p[i] - p_mean);
    }
    const double slope = sxx > 0.0 ? sxp / sxx : 0.0;
    for (Index i = 0; i < n; ++i) {
      fitted[i] = p_mean + slope * (static_cast<double>(i) - x_mean);
    }
  }
  return Distribution::normalized(std::move(fitted));
}

namespace {

Distribution smooth_prior(const Distribution& estimate,
                          const SmoothingConfig& cfg) {
  if (cfg.interp_factor <= 0.0) return estimate;
  const Distribution fit = polyfit_smooth(estimate, cfg.poly_order);
  Vector mixed = (1.0 - cfg.interp_factor) * estimate.values() +
                 cfg.interp_factor * fit.values();
  return Distribution::normalized(std::move(mixed));
}

void check_strictly_positive(const Distribution& p, const char* who) {
  for (Index i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) {
      throw ZeroPrior(std::string(who) + " requires a strictly positive prior");
    }
  }
}

}  // namespace

SolveResult sld(const Matrix& proba_sample, const Distribution& train_prevalence,
                const std::optional<SmoothingConfig>& smoothing, int max_iter,
                double tol) {
  check_strictly_positive(train_prevalence, "sld");
  const Index n = train_prevalence.size();
  if (proba_sample.cols() != n) {
    throw DimensionError("posterior width does not match prior length");
  }
  if (proba_sample.rows() == 0) throw EmptyInput("empty sample");

  Vector estimate = train_prevalence.values();
  Vector prior = estimate;
  double change = 0.0;
  int iter = 0;
  bool converged = false;
  for (; iter < max_iter; ++iter) {
    const Vector ratio =
        prior.array() / train_prevalence.values().array();
    Vector next = Vector::Zero(n);
    for (Index i = 0; i < proba_sample.rows(); ++i) {
      Vector weighted =
          proba_sample.row(i).transpose().array() * ratio.array();
      const double norm = weighted.sum();
      if (norm > 0.0) next += weighted / norm;
    }
    next /= static_cast<double>(proba_sample.rows());

    change = (next - estimate).lpNorm<1>();
    estimate = next;
    prior = smoothing ? smooth_prior(Distribution(estimate), *smoothing).values()
                      : estimate;
    if (change < tol) {
      ++iter;
      converged = true;
      break;
    }
  }
  return SolveResult{Distribution(estimate), change, iter, converged};
}

SolveResult ibu(const TransferModel& tm, const Distribution& prior,
                const SmoothingConfig& smoothing, int max_iter, double tol) {
  check_strictly_positive(prior, "ibu");
  if (tm.q.size() != tm.M.rows()) {
    throw DimensionError("transfer model has no embedded sample");
  }
  const Index n = tm.n_classes;
  if (prior.size() != n || tm.M.cols() != n) {
    throw DimensionError("prior length does not match transfer model");
  }

  Vector estimate = prior.values();
  Vector current = estimate;
  double change = 0.0;
  int iter = 0;
  bool converged = false;
  for (; iter < max_iter; ++iter) {
    const Vector denom = tm.M * current;
    Vector reweight = Vector::Zero(tm.M.rows());
    for (Index j = 0; j < reweight.size(); ++j) {
      if (tm.q[j] > 0.0) reweight[j] = tm.q[j] / std::max(denom[j], 1e-300);
    }
    Vector next = current.array() * (tm.M.transpose() * reweight).array();
    next = Distribution::normalized(std::move(next)).values();

    change = (next - estimate).lpNorm<1>();
    estimate = next;
    current = smooth_prior(Distribution(estimate), smoothing).values();
    if (change < tol) {
      ++iter;
      converged = true;
      break;
    }
  }
  return SolveResult{Distribution(estimate), change, iter, converged};
}

}  // namespace ordq
