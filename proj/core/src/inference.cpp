#include "coxbo/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "coxbo/error.hpp"

namespace coxbo {

EventSet::EventSet(Eigen::MatrixXd events, std::vector<double> lower, std::vector<double> upper)
    : events_(std::move(events)), lower_(std::move(lower)), upper_(std::move(upper)) {
  require(!lower_.empty() && lower_.size() == upper_.size(), ErrorCategory::kInput, "event domain dimension mismatch");
  for (std::size_t k = 0; k < lower_.size(); ++k) {
    require(lower_[k] < upper_[k], ErrorCategory::kInput, "event domain needs lower < upper");
  }
  if (events_.rows() == 0) events_.resize(0, static_cast<Eigen::Index>(lower_.size()));
  require(events_.cols() == static_cast<Eigen::Index>(lower_.size()), ErrorCategory::kInput,
          "event columns do not match the domain dimension");
  for (Eigen::Index i = 0; i < events_.rows(); ++i) {
    for (Eigen::Index k = 0; k < events_.cols(); ++k) {
      const double v = events_(i, k);
      const auto ku = static_cast<std::size_t>(k);
      require(std::isfinite(v) && v >= lower_[ku] && v <= upper_[ku], ErrorCategory::kInput,
              "event " + std::to_string(i) + " lies outside the domain");
    }
  }
}

EventSet::EventSet(std::vector<double> lower, std::vector<double> upper)
    : EventSet(Eigen::MatrixXd(0, static_cast<Eigen::Index>(lower.size())), std::move(lower), std::move(upper)) {}

std::vector<double> EventSet::point(std::size_t i) const {
  std::vector<double> p(dim());
  for (std::size_t k = 0; k < dim(); ++k) p[k] = events_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
  return p;
}

void FitConfig::validate() const {
  require(std::isfinite(gamma) && gamma > 0.0, ErrorCategory::kInput, "gamma must be positive");
  require(std::isfinite(learning_rate) && learning_rate > 0.0, ErrorCategory::kInput,
          "learning_rate must be positive");
  require(max_iters > 0, ErrorCategory::kInput, "max_iters must be positive");
  require(std::isfinite(grad_tolerance) && grad_tolerance > 0.0, ErrorCategory::kInput,
          "grad_tolerance must be positive");
  require(floor > 0.0 && floor <= 1e-4, ErrorCategory::kInput, "floor must lie in (0, 1e-4]");
}

double objective(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& k_tilde, double floor) {
  require(k_tilde.rows() == alpha.size() && k_tilde.cols() == alpha.size(), ErrorCategory::kInput,
          "objective: K~ and alpha sizes differ");
  const Eigen::VectorXd h = k_tilde * alpha;
  double data = 0.0;
  for (Eigen::Index i = 0; i < h.size(); ++i) data -= std::log(std::max(h(i) * h(i), floor));
  return data + alpha.dot(h);
}

Eigen::VectorXd objective_gradient(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& k_tilde, double floor) {
  require(k_tilde.rows() == alpha.size() && k_tilde.cols() == alpha.size(), ErrorCategory::kInput,
          "objective_gradient: K~ and alpha sizes differ");
  const Eigen::VectorXd h = k_tilde * alpha;
  Eigen::VectorXd inv_h(h.size());
  for (Eigen::Index i = 0; i < h.size(); ++i) inv_h(i) = h(i) * h(i) > floor ? 1.0 / h(i) : 0.0;
  return 2.0 * (k_tilde * (alpha - inv_h));
}

MapFit fit_map(const EventSet& events, const TransformedKernelModel& model, LinkFunction link, const FitConfig& cfg) {
  cfg.validate();
  require(!events.empty(), ErrorCategory::kInput, "fit_map needs at least one event");
  const Grid& grid = model.grid();
  require(events.dim() == grid.dim(), ErrorCategory::kInput, "event and grid dimensions differ");
  for (std::size_t i = 0; i < events.size(); ++i) {
    require(grid.contains(events.point(i)), ErrorCategory::kInput,
            "event " + std::to_string(i) + " lies outside the model grid");
  }

  const TransformedKernelModel penalised = model.gamma() == cfg.gamma ? model : model.with_gamma(cfg.gamma);
  const Eigen::MatrixXd proj_events = penalised.project(events.events());
  Eigen::MatrixXd k_tilde = transformed_gram_projected(proj_events, proj_events, penalised);
  k_tilde = 0.5 * (k_tilde + k_tilde.transpose()).eval();

  const auto n = static_cast<Eigen::Index>(events.size());
  Eigen::VectorXd alpha = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  if (cfg.random_init) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (Eigen::Index i = 0; i < n; ++i) alpha(i) = u(rng) / static_cast<double>(n);
  }

  MapFit fit;
  double value = objective(alpha, k_tilde, cfg.floor);
  if (!std::isfinite(value)) {
    fail(ErrorCategory::kOptimization, "objective is non-finite at iteration 0");
  }
  fit.initial_objective = value;

  double step = cfg.learning_rate;
  std::size_t iter = 0;
  Eigen::VectorXd grad = objective_gradient(alpha, k_tilde, cfg.floor);
  for (; iter < cfg.max_iters; ++iter) {
    const double gnorm = grad.norm();
    if (!std::isfinite(gnorm)) {
      fail(ErrorCategory::kOptimization, "gradient is non-finite at iteration " + std::to_string(iter));
    }
    if (gnorm <= cfg.grad_tolerance) {
      fit.converged = true;
      break;
    }
    // Backtrack by halving until the objective does not increase.
    bool accepted = false;
    while (step > std::numeric_limits<double>::min()) {
      const Eigen::VectorXd trial = alpha - step * grad;
      const double trial_value = objective(trial, k_tilde, cfg.floor);
      if (std::isfinite(trial_value) && trial_value <= value) {
        alpha = trial;
        value = trial_value;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent possible at machine precision
    grad = objective_gradient(alpha, k_tilde, cfg.floor);
  }
  fit.iterations = iter;
  fit.gradient_norm = grad.norm();
  fit.converged = fit.converged || fit.gradient_norm <= cfg.grad_tolerance;
  fit.final_objective = value;
  if (!std::isfinite(value)) {
    fail(ErrorCategory::kOptimization, "objective became non-finite at iteration " + std::to_string(iter));
  }

  fit.h_grid = transformed_gram_projected(penalised.grid_projection(), proj_events, penalised) * alpha;
  fit.intensity = fit.h_grid.array().square().matrix();
  fit.mean_g.resize(fit.h_grid.size());
  for (Eigen::Index j = 0; j < fit.h_grid.size(); ++j) {
    fit.mean_g(j) = link.kappa_inv(link.clamp_to_range(fit.intensity(j), cfg.floor));
  }
  fit.dual.alpha = std::move(alpha);
  return fit;
}

PriorCovariance prior_covariance(const Grid& grid, const KernelSpec& spec, double jitter) {
  require(spec.dim() == grid.dim(), ErrorCategory::kInput, "kernel and grid dimensions differ");
  PriorCovariance prior;
  for (std::size_t k = 0; k < grid.dim(); ++k) {
    const KernelSpec axis_spec(k == 0 ? spec.variance() : 1.0, {spec.lengthscales()[k]});
    const Eigen::VectorXd axis = grid.axis(k);
    Eigen::MatrixXd factor = gram(axis, axis, axis_spec);
    factor.diagonal().array() += jitter;
    prior.per_dim_factors.push_back(std::move(factor));
  }

  Eigen::MatrixXd assembled = Eigen::MatrixXd::Ones(1, 1);
  for (const auto& f : prior.per_dim_factors) {
    Eigen::MatrixXd next(assembled.rows() * f.rows(), assembled.cols() * f.cols());
    for (Eigen::Index i = 0; i < assembled.rows(); ++i) {
      for (Eigen::Index j = 0; j < assembled.cols(); ++j) {
        next.block(i * f.rows(), j * f.cols(), f.rows(), f.cols()) = assembled(i, j) * f;
      }
    }
    assembled = std::move(next);
  }
  prior.assembled = std::move(assembled);
  return prior;
}

Eigen::VectorXd log_likelihood_hessian_diagonal(const Eigen::VectorXd& g_hat, const EventSet& events, const Grid& grid,
                                                LinkFunction link, const Eigen::VectorXd& window) {
  require(g_hat.size() == static_cast<Eigen::Index>(grid.size()), ErrorCategory::kInput,
          "g_hat length differs from grid size");
  require(window.size() == 0 || window.size() == g_hat.size(), ErrorCategory::kInput,
          "window length differs from grid size");
  const double dv = grid.cell_volume();
  Eigen::VectorXd w(g_hat.size());
  for (Eigen::Index j = 0; j < g_hat.size(); ++j) {
    w(j) = -link.kappa_ddot(g_hat(j)) * dv * (window.size() == 0 ? 1.0 : window(j));
  }

  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto j = static_cast<Eigen::Index>(grid.cell_of(events.point(i)));
    const double g = g_hat(j);
    const double k0 = std::max(link.kappa(g), std::numeric_limits<double>::min());
    const double k1 = link.kappa_dot(g);
    const double k2 = link.kappa_ddot(g);
    w(j) += (k2 * k0 - k1 * k1) / (k0 * k0);
  }
  return w;
}

namespace {

void repair_covariance(Eigen::MatrixXd& cov) {
  cov = (0.5 * (cov + cov.transpose())).eval();
  double jitter = 1e-10;
  while (cov.diagonal().minCoeff() < 0.0) {
    cov.diagonal().array() += jitter;
    jitter *= 10.0;
    require(std::isfinite(jitter), ErrorCategory::kConditioning, "covariance diagonal could not be repaired");
  }
}

}  // namespace

Eigen::MatrixXd posterior_covariance(const Eigen::VectorXd& g_hat, const EventSet& events, const Grid& grid,
                                     LinkFunction link, const PriorCovariance& prior, const Eigen::VectorXd& window) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  require(prior.assembled.rows() == m && prior.assembled.cols() == m, ErrorCategory::kInput,
          "prior covariance does not match the grid");
  const Eigen::VectorXd curvature = -log_likelihood_hessian_diagonal(g_hat, events, grid, link, window);

  // (Sigma^-1 + B)^-1 = (I + Sigma B)^-1 Sigma, which never inverts Sigma itself.
  Eigen::MatrixXd sigma = prior.assembled;
  const double scale = std::max(sigma.diagonal().maxCoeff(), 1e-300);
  double jitter = 0.0;
  for (int attempt = 0; attempt < 12; ++attempt) {
    Eigen::MatrixXd system = sigma * curvature.asDiagonal();
    system.diagonal().array() += 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    const double rcond = lu.rcond();
    if (std::isfinite(rcond) && rcond > 1e-13) {
      Eigen::MatrixXd cov = lu.solve(sigma);
      if (cov.allFinite()) {
        repair_covariance(cov);
        return cov;
      }
    }
    const double next = jitter == 0.0 ? 1e-10 * scale : jitter * 10.0;
    sigma.diagonal().array() += next - jitter;
    jitter = next;
  }
  fail(ErrorCategory::kConditioning, "Sigma^-1 - W stays singular after jitter escalation");
}

Posterior posterior_from_fit(MapFit fit, const EventSet& events, const Grid& grid, LinkFunction link,
                             const PriorCovariance& prior, const Eigen::VectorXd& window) {
  Eigen::MatrixXd cov = posterior_covariance(fit.mean_g, events, grid, link, prior, window);
  Eigen::VectorXd std = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return Posterior{grid,           link,           std::move(fit.mean_g), std::move(fit.intensity),
                   std::move(cov), std::move(std), std::move(fit.dual)};
}

Posterior infer_posterior(const EventSet& events, const TransformedKernelModel& model, LinkFunction link,
                          const FitConfig& cfg, const PriorCovariance& prior, const Eigen::VectorXd& window) {
  return posterior_from_fit(fit_map(events, model, link, cfg), events, model.grid(), link, prior, window);
}

Posterior prior_posterior(const Grid& grid, LinkFunction link, const PriorCovariance& prior, double base_intensity) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  require(prior.assembled.rows() == m, ErrorCategory::kInput, "prior covariance does not match the grid");
  const double g0 = link.kappa_inv(link.clamp_to_range(base_intensity, 1e-12));
  Eigen::MatrixXd cov = prior.assembled;
  repair_covariance(cov);
  Eigen::VectorXd std = cov.diagonal().cwiseSqrt();
  return Posterior{grid,
                   link,
                   Eigen::VectorXd::Constant(m, g0),
                   Eigen::VectorXd::Constant(m, link.kappa(g0)),
                   std::move(cov),
                   std::move(std),
                   DualCoefficients{}};
}

double interpolate_on_grid(const Grid& grid, const Eigen::VectorXd& field, std::span<const double> t) {
  require(grid.contains(t), ErrorCategory::kInput, "query point lies outside the domain");
  require(field.size() == static_cast<Eigen::Index>(grid.size()), ErrorCategory::kInput,
          "field length differs from grid size");
  const std::size_t d = grid.dim();
  std::vector<std::size_t> base(d);
  std::vector<double> frac(d);
  for (std::size_t k = 0; k < d; ++k) {
    const std::size_t n = grid.points_per_dim()[k];
    const double pos = std::clamp((t[k] - grid.lower()[k]) / grid.cell_width(k) - 0.5, 0.0,
                                  static_cast<double>(n - 1));
    std::size_t i0 = static_cast<std::size_t>(std::floor(pos));
    if (n >= 2) i0 = std::min(i0, n - 2);
    base[k] = i0;
    frac[k] = n >= 2 ? pos - static_cast<double>(i0) : 0.0;
  }

  double value = 0.0;
  std::vector<std::size_t> corner(d);
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    double weight = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
      const bool up = (mask >> k) & 1U;
      if (up && grid.points_per_dim()[k] < 2) {
        weight = 0.0;
        break;
      }
      corner[k] = base[k] + (up ? 1 : 0);
      weight *= up ? frac[k] : 1.0 - frac[k];
    }
    if (weight != 0.0) value += weight * field(static_cast<Eigen::Index>(grid.flat_index(corner)));
  }
  return value;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> posterior_at(const Posterior& posterior, const Eigen::MatrixXd& query) {
  const Grid& grid = posterior.grid;
  require(query.cols() == static_cast<Eigen::Index>(grid.dim()), ErrorCategory::kInput,
          "posterior_at: dimension mismatch");
  Eigen::VectorXd mean(query.rows());
  Eigen::VectorXd sd(query.rows());
  std::vector<double> t(grid.dim());
  for (Eigen::Index i = 0; i < query.rows(); ++i) {
    for (std::size_t k = 0; k < grid.dim(); ++k) t[k] = query(i, static_cast<Eigen::Index>(k));
    mean(i) = interpolate_on_grid(grid, posterior.mean_g, t);
    sd(i) = interpolate_on_grid(grid, posterior.std, t);
  }
  return {std::move(mean), std::move(sd)};
}

}  // namespace coxbo
