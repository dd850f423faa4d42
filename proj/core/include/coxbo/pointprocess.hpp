#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "coxbo/inference.hpp"

namespace coxbo {

using IntensityEvaluator = std::function<double(std::span<const double>)>;

/// Deterministic intensity over a box, with a dominating constant for thinning.
struct IntensityFunction {
  IntensityEvaluator evaluator;
  double upper_bound = 0.0;
  std::vector<double> lower;
  std::vector<double> upper;

  double operator()(std::span<const double> t) const { return evaluator(t); }
  double domain_volume() const;
  /// Spot-checks evaluator <= upper_bound at random points; throws kBoundViolation.
  void check_bound(std::size_t samples = 10000, std::uint64_t seed = 0) const;
};

/// Midpoint rule over the box [a, b] with `points_per_dim` nodes per axis.
double integrate_midpoint(const IntensityEvaluator& f, std::span<const double> a, std::span<const double> b,
                          std::size_t points_per_dim);

/// exp(-mass) mass^n / n!, evaluated in log space.
double poisson_pmf(std::size_t n, double mass);
/// Pr(N <= k).
double poisson_cdf(std::size_t k, double mass);

/// Pr(N(a, b) = n) with the expected count from midpoint quadrature.
double count_probability(const IntensityEvaluator& intensity, std::span<const double> a, std::span<const double> b,
                         std::size_t n, std::size_t quadrature_points = 512);

/// Intensity curve kappa(g + omega * sigma) of a posterior, interpolated off-grid.
IntensityEvaluator posterior_intensity(const Posterior& posterior, double omega);

/// Lewis-Shedler thinning; identical seeds give identical event sets.
EventSet thinning_sample(const IntensityFunction& intensity, std::uint64_t rng_seed);

/// Benchmark intensities: 1 on [0, 50], 2 on [0, 5], 3 on [0, 100].
double synthetic_intensity(int id, double t);
IntensityFunction synthetic_intensity_function(int id);

/// Constant base plus one Gaussian bump, over any box.
struct BumpSpec {
  std::vector<double> center;
  double width = 2.0;  // standard deviation, same on every axis
  double height = 10.0;
  double base = 0.5;
};
IntensityFunction bump_intensity(const BumpSpec& bump, std::vector<double> lower, std::vector<double> upper);

}  // namespace coxbo
