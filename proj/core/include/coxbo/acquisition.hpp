#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "coxbo/inference.hpp"

namespace coxbo {

/// Axis-aligned box of half-width `radius` around `center`.
struct Region {
  std::vector<double> center;
  double radius = 1.0;

  double lower(std::size_t k) const { return center[k] - radius; }
  double upper(std::size_t k) const { return center[k] + radius; }
  /// Inclusive on both faces.
  bool contains(std::span<const double> t) const;
  /// True when this box lies inside `other`.
  bool inside(const Region& other) const;
};

enum class AcquisitionKind { kUcb, kIdle, kCumulative, kChangePoint };

struct AcquisitionSpec {
  AcquisitionKind kind = AcquisitionKind::kUcb;
  double omega = 0.8;
  std::size_t epsilon = 0;  // idle threshold
  std::size_t xi = 1;       // cumulative threshold
  double hazard_rate = 0.1;
  std::size_t quadrature_points = 64;  // per dimension, for region integrals

  /// "ucb" | "idle" | "cumulative" | "cpd"
  static AcquisitionKind kind_from_name(std::string_view name);
  static std::string_view kind_name(AcquisitionKind kind);
  void validate() const;
};

struct RunLengthPosterior {
  Eigen::VectorXd masses = Eigen::VectorXd::Ones(1);  // Pr(r = 0..step)
  std::size_t step = 0;
};

/// How the change branch of the recursion scores the current bin.
enum class ChangeBranch {
  kFreshSegment,  // predictive of a segment that starts at this bin (rate index 0)
  kCarried,       // each run's own predictive, carried into r = 0
};

/// One step of the run-length recursion:
///   growth   Pr(r + 1) ~ Pr(r) pi_r (1 - H)
///   change   Pr(0)     ~ sum_r Pr(r) pi_c H
/// where pi_r is the Poisson pmf of `bin_count` under rate `rates[r]` and pi_c is
/// pi_0 for kFreshSegment or pi_r for kCarried. `rates` has one entry per
/// current run length. Computed in log space.
RunLengthPosterior cpd_step(const RunLengthPosterior& rlp, std::size_t bin_count, std::span<const double> rates,
                            double hazard_rate, ChangeBranch branch = ChangeBranch::kFreshSegment);

/// Change probability per grid bin of a 1D posterior.
struct ChangepointTrace {
  Eigen::VectorXd change_probability;  // Pr(r = 0) after each bin
  Eigen::VectorXd bin_counts;          // observed or imputed counts
};

/// Runs the recursion over the grid cells. Cells whose centers fall in an
/// observed region use the observed event count; the rest use the rounded
/// posterior expected count. The rate of run length r is the mean posterior
/// intensity over the last r cells times the cell width, inflated by
/// (1 + mean std); run length 0 uses the current cell alone.
ChangepointTrace changepoint_trace(const Posterior& posterior, const EventSet& observed,
                                   std::span<const Region> observed_regions, double hazard_rate,
                                   ChangeBranch branch = ChangeBranch::kFreshSegment);

/// max over grid points in the region of mean_g + omega1 * std.
double acq_ucb(const Posterior& posterior, const Region& region, double omega1);
/// Pr(N <= epsilon) with the region mass of kappa(g + omega2 * std).
double acq_idle(const Posterior& posterior, const Region& region, double omega2, std::size_t epsilon,
                std::size_t quadrature_points = 64);
/// Pr(N >= xi) with the region mass of kappa(g + omega3 * std).
double acq_cumulative(const Posterior& posterior, const Region& region, double omega3, std::size_t xi,
                      std::size_t quadrature_points = 64);
/// Largest change probability over the cells in the region.
double acq_changepoint(const Posterior& posterior, const Region& region, const ChangepointTrace& trace);

/// Dispatches on spec.kind. `trace` is required for kChangePoint.
double acquisition_score(const AcquisitionSpec& spec, const Posterior& posterior, const Region& region,
                         const ChangepointTrace* trace = nullptr);

}  // namespace coxbo
