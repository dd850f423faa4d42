#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "coxbo/kernels.hpp"
#include "coxbo/link.hpp"

namespace coxbo {

/// Observed point events, one row per event, plus the observation domain.
class EventSet {
 public:
  EventSet(Eigen::MatrixXd events, std::vector<double> lower, std::vector<double> upper);
  /// Empty set over a domain.
  EventSet(std::vector<double> lower, std::vector<double> upper);

  const Eigen::MatrixXd& events() const noexcept { return events_; }
  const std::vector<double>& lower() const noexcept { return lower_; }
  const std::vector<double>& upper() const noexcept { return upper_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(events_.rows()); }
  std::size_t dim() const noexcept { return lower_.size(); }
  bool empty() const noexcept { return events_.rows() == 0; }
  std::vector<double> point(std::size_t i) const;

 private:
  Eigen::MatrixXd events_;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

struct DualCoefficients {
  Eigen::VectorXd alpha;
};

struct FitConfig {
  double gamma = 1.0;
  double learning_rate = 1e-3;
  std::size_t max_iters = 5000;
  double grad_tolerance = 1e-6;
  double floor = 1e-12;  // lower bound on h^2 inside the log
  std::uint64_t seed = 0;
  bool random_init = false;  // seeded random alpha_0 instead of 1/n

  void validate() const;
};

/// MAP fit without covariance.
struct MapFit {
  DualCoefficients dual;
  Eigen::VectorXd h_grid;     // h-hat on grid points
  Eigen::VectorXd mean_g;     // g-hat = kappa^-1(clamped h^2)
  Eigen::VectorXd intensity;  // h^2
  double initial_objective = 0.0;
  double final_objective = 0.0;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

struct Posterior {
  Grid grid;
  LinkFunction link;
  Eigen::VectorXd mean_g;
  Eigen::VectorXd intensity;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd std;
  DualCoefficients dual;
};

/// GP prior covariance on a product grid as a Kronecker product of per-axis Grams.
struct PriorCovariance {
  std::vector<Eigen::MatrixXd> per_dim_factors;
  Eigen::MatrixXd assembled;
};

double objective(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& k_tilde, double floor);
Eigen::VectorXd objective_gradient(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& k_tilde, double floor);

MapFit fit_map(const EventSet& events, const TransformedKernelModel& model, LinkFunction link, const FitConfig& cfg);

PriorCovariance prior_covariance(const Grid& grid, const KernelSpec& spec, double jitter);

/// Diagonal of the Riemann-sum Hessian of the log-likelihood at g-hat:
/// -kappa''(g_j) dV w_j everywhere, plus (kappa'' kappa - kappa'^2) / kappa^2
/// once per event whose cell is j. `window` holds w_j, the observed fraction
/// of each cell; empty means the whole domain was observed.
Eigen::VectorXd log_likelihood_hessian_diagonal(const Eigen::VectorXd& g_hat, const EventSet& events, const Grid& grid,
                                                LinkFunction link, const Eigen::VectorXd& window = {});

/// Laplace covariance (Sigma^-1 - W)^-1, symmetrized with non-negative diagonal.
Eigen::MatrixXd posterior_covariance(const Eigen::VectorXd& g_hat, const EventSet& events, const Grid& grid,
                                     LinkFunction link, const PriorCovariance& prior,
                                     const Eigen::VectorXd& window = {});

/// Laplace posterior around an existing MAP fit.
Posterior posterior_from_fit(MapFit fit, const EventSet& events, const Grid& grid, LinkFunction link,
                             const PriorCovariance& prior, const Eigen::VectorXd& window = {});
/// fit_map followed by posterior_covariance.
Posterior infer_posterior(const EventSet& events, const TransformedKernelModel& model, LinkFunction link,
                          const FitConfig& cfg, const PriorCovariance& prior, const Eigen::VectorXd& window = {});

/// Posterior with no data: constant intensity `base_intensity`, prior covariance.
Posterior prior_posterior(const Grid& grid, LinkFunction link, const PriorCovariance& prior,
                          double base_intensity = 1e-3);

/// Multilinear interpolation of mean_g and std at each query row.
std::pair<Eigen::VectorXd, Eigen::VectorXd> posterior_at(const Posterior& posterior, const Eigen::MatrixXd& query);

/// Interpolates any grid field at a single point.
double interpolate_on_grid(const Grid& grid, const Eigen::VectorXd& field, std::span<const double> t);

}  // namespace coxbo
