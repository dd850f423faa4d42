#include "coxbo/metrics.hpp"

#include <cmath>

#include "coxbo/error.hpp"

namespace coxbo {

namespace {

void check_pair(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate, double cell_volume) {
  require(truth.size() == estimate.size(), ErrorCategory::kInput, "metric inputs differ in length");
  require(std::isfinite(cell_volume) && cell_volume > 0.0, ErrorCategory::kInput, "cell volume must be positive");
}

}  // namespace

double l2_distance(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate, double cell_volume) {
  check_pair(truth, estimate, cell_volume);
  return std::sqrt((truth - estimate).squaredNorm() * cell_volume);
}

double iql(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate, double rho, double cell_volume) {
  check_pair(truth, estimate, cell_volume);
  require(rho > 0.0 && rho < 1.0, ErrorCategory::kInput, "rho must lie in (0, 1)");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    const double gap = truth(i) - estimate(i);
    sum += 2.0 * std::abs(gap) * (gap > 0.0 ? rho : 1.0 - rho);
  }
  return sum * cell_volume;
}

MetricReport evaluate_metrics(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate, double cell_volume) {
  MetricReport r;
  r.l2 = l2_distance(truth, estimate, cell_volume);
  r.iql50 = iql(truth, estimate, 0.5, cell_volume);
  r.iql85 = iql(truth, estimate, 0.85, cell_volume);
  r.grid_points_used = static_cast<std::size_t>(truth.size());
  return r;
}

}  // namespace coxbo
