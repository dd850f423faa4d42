#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace coxbo {

struct MetricReport {
  double l2 = 0.0;
  double iql50 = 0.0;
  double iql85 = 0.0;
  std::size_t grid_points_used = 0;
};

/// sqrt(sum (truth - estimate)^2 * cell_volume)
double l2_distance(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate, double cell_volume);

/// Riemann sum of the integrated rho-quantile (pinball) loss
///   2 |l - l^| (rho [l > l^] + (1 - rho) [l <= l^]).
double iql(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate, double rho, double cell_volume);

MetricReport evaluate_metrics(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate, double cell_volume);

}  // namespace coxbo
