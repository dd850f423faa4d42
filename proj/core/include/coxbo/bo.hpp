#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "coxbo/acquisition.hpp"
#include "coxbo/inference.hpp"
#include "coxbo/kernels.hpp"
#include "coxbo/link.hpp"

namespace coxbo {

struct BOConfig {
  std::size_t budget = 25;
  std::vector<Region> initial_regions;
  /// Candidate centers; generated on a stride equal to `radius` when empty.
  std::vector<std::vector<double>> candidate_centers;
  double radius = 2.0;
  AcquisitionSpec acquisition;
  FitConfig fit;
  KernelSpec kernel{1.0, {1.0}};
  LinkFunction link{LinkKind::kQuadratic};
  Grid grid{{0.0}, {1.0}, {100}};

  void validate() const;
};

struct BOStep {
  std::size_t candidate = 0;  // index into the candidate list
  Region selected;
  std::size_t events_revealed = 0;  // new events inside `selected`
  std::size_t events_total = 0;     // revealed so far, including this step
  Eigen::VectorXd mean_g;           // posterior the selection was made from
  Eigen::VectorXd std;
  Eigen::VectorXd intensity;
  Eigen::VectorXd scores;  // per candidate; explored ones hold lowest()
  double seconds = 0.0;
};

struct BOTrace {
  std::vector<Region> candidates;
  std::vector<BOStep> steps;
  std::vector<Region> sampled;  // initial regions then selections
  EventSet revealed;            // events known at the end
  Posterior final_posterior;    // fitted on `revealed`
};

/// Stride-`radius` centers per axis, from lower + radius to upper - radius.
std::vector<std::vector<double>> candidate_grid(const Grid& grid, double radius);

/// Events inside the union of the regions (inclusive faces), in dataset order.
EventSet reveal(const EventSet& dataset, const std::vector<Region>& regions);

/// Fraction of each grid cell covered by the regions, estimated from a 4^d
/// lattice of sub-cell points.
Eigen::VectorXd observation_window(const Grid& grid, const std::vector<Region>& regions);

/// Posterior from the revealed events, or the prior when none are revealed.
/// Only the observed window enters the likelihood curvature.
Posterior fit_or_prior(const EventSet& revealed, const TransformedKernelModel& model, LinkFunction link,
                       const FitConfig& cfg, const PriorCovariance& prior, const Eigen::VectorXd& window = {});

/// Sequential loop: fit, score unexplored candidates, take the argmax
/// (lowest index on ties), reveal. Stops early if every candidate is explored.
BOTrace run_bo(const EventSet& dataset, const BOConfig& cfg);

}  // namespace coxbo
