#include "coxbo/pointprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "coxbo/error.hpp"

namespace coxbo {

double IntensityFunction::domain_volume() const {
  double v = 1.0;
  for (std::size_t k = 0; k < lower.size(); ++k) v *= upper[k] - lower[k];
  return v;
}

void IntensityFunction::check_bound(std::size_t samples, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::vector<double> t(lower.size());
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t k = 0; k < lower.size(); ++k) {
      t[k] = std::uniform_real_distribution<double>(lower[k], upper[k])(rng);
    }
    const double v = evaluator(t);
    require(v <= upper_bound, ErrorCategory::kBoundViolation,
            "intensity " + std::to_string(v) + " exceeds bound " + std::to_string(upper_bound));
  }
}

double integrate_midpoint(const IntensityEvaluator& f, std::span<const double> a, std::span<const double> b,
                          std::size_t points_per_dim) {
  const std::size_t d = a.size();
  require(d > 0 && b.size() == d, ErrorCategory::kInput, "integration bounds dimension mismatch");
  require(points_per_dim > 0, ErrorCategory::kInput, "quadrature needs at least one point");
  std::vector<double> width(d);
  double cell = 1.0;
  for (std::size_t k = 0; k < d; ++k) {
    require(a[k] < b[k], ErrorCategory::kInput, "integration needs a < b in every dimension");
    width[k] = (b[k] - a[k]) / static_cast<double>(points_per_dim);
    cell *= width[k];
  }

  std::vector<std::size_t> idx(d, 0);
  std::vector<double> t(d);
  double sum = 0.0;
  while (true) {
    for (std::size_t k = 0; k < d; ++k) t[k] = a[k] + (static_cast<double>(idx[k]) + 0.5) * width[k];
    sum += f(t);
    std::size_t k = d;
    while (k > 0) {
      --k;
      if (++idx[k] < points_per_dim) break;
      idx[k] = 0;
      if (k == 0) return sum * cell;
    }
  }
}

double poisson_pmf(std::size_t n, double mass) {
  require(std::isfinite(mass) && mass >= 0.0, ErrorCategory::kNumeric, "Poisson mass must be finite and >= 0");
  if (mass == 0.0) return n == 0 ? 1.0 : 0.0;
  const double dn = static_cast<double>(n);
  return std::exp(dn * std::log(mass) - mass - std::lgamma(dn + 1.0));
}

double poisson_cdf(std::size_t k, double mass) {
  double sum = 0.0;
  for (std::size_t n = 0; n <= k; ++n) sum += poisson_pmf(n, mass);
  return std::min(sum, 1.0);
}

double count_probability(const IntensityEvaluator& intensity, std::span<const double> a, std::span<const double> b,
                         std::size_t n, std::size_t quadrature_points) {
  const double mass = integrate_midpoint(intensity, a, b, quadrature_points);
  require(std::isfinite(mass), ErrorCategory::kNumeric, "integrated intensity is not finite");
  return poisson_pmf(n, std::max(mass, 0.0));
}

IntensityEvaluator posterior_intensity(const Posterior& posterior, double omega) {
  return [&posterior, omega](std::span<const double> t) {
    const double g = interpolate_on_grid(posterior.grid, posterior.mean_g, t);
    const double s = interpolate_on_grid(posterior.grid, posterior.std, t);
    return posterior.link.kappa(g + omega * s);
  };
}

EventSet thinning_sample(const IntensityFunction& intensity, std::uint64_t rng_seed) {
  const std::size_t d = intensity.lower.size();
  require(d > 0 && intensity.upper.size() == d, ErrorCategory::kInput, "intensity domain dimension mismatch");
  require(std::isfinite(intensity.upper_bound) && intensity.upper_bound >= 0.0, ErrorCategory::kInput,
          "thinning bound must be finite and non-negative");

  std::mt19937_64 rng(rng_seed);
  const double mean_candidates = intensity.upper_bound * intensity.domain_volume();
  const auto candidates =
      mean_candidates > 0.0 ? std::poisson_distribution<long long>(mean_candidates)(rng) : 0LL;

  std::vector<double> accepted;
  std::vector<double> t(d);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (long long c = 0; c < candidates; ++c) {
    for (std::size_t k = 0; k < d; ++k) {
      t[k] = intensity.lower[k] + unit(rng) * (intensity.upper[k] - intensity.lower[k]);
    }
    const double value = intensity(t);
    require(value <= intensity.upper_bound, ErrorCategory::kBoundViolation,
            "intensity " + std::to_string(value) + " exceeds thinning bound " +
                std::to_string(intensity.upper_bound));
    if (unit(rng) * intensity.upper_bound < value) accepted.insert(accepted.end(), t.begin(), t.end());
  }

  const auto n = static_cast<Eigen::Index>(accepted.size() / d);
  Eigen::MatrixXd events(n, static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      events(i, static_cast<Eigen::Index>(k)) = accepted[static_cast<std::size_t>(i) * d + k];
    }
  }
  return EventSet(std::move(events), intensity.lower, intensity.upper);
}

namespace {

constexpr std::array<std::array<double, 2>, 5> kLambda3Knots{{{0.0, 20.0}, {25.0, 3.0}, {50.0, 1.0}, {75.0, 2.5},
                                                              {100.0, 3.0}}};

}  // namespace

double synthetic_intensity(int id, double t) {
  switch (id) {
    case 1: {
      require(t >= 0.0 && t <= 50.0, ErrorCategory::kInput, "lambda_1 is defined on [0, 50]");
      const double z = (t - 25.0) / 10.0;
      return 2.0 * std::exp(-t / 15.0) + std::exp(-z * z);
    }
    case 2:
      require(t >= 0.0 && t <= 5.0, ErrorCategory::kInput, "lambda_2 is defined on [0, 5]");
      return 5.0 * std::sin(t * t) + 6.0;
    case 3: {
      require(t >= 0.0 && t <= 100.0, ErrorCategory::kInput, "lambda_3 is defined on [0, 100]");
      for (std::size_t i = 1; i < kLambda3Knots.size(); ++i) {
        const auto& [x1, y1] = kLambda3Knots[i];
        if (t <= x1) {
          const auto& [x0, y0] = kLambda3Knots[i - 1];
          return y0 + (y1 - y0) * (t - x0) / (x1 - x0);
        }
      }
      return kLambda3Knots.back()[1];
    }
    default:
      fail(ErrorCategory::kInput, "synthetic intensity id must be 1, 2 or 3");
  }
}

IntensityFunction synthetic_intensity_function(int id) {
  switch (id) {
    case 1: return {[](std::span<const double> t) { return synthetic_intensity(1, t[0]); }, 2.1, {0.0}, {50.0}};
    case 2: return {[](std::span<const double> t) { return synthetic_intensity(2, t[0]); }, 11.0, {0.0}, {5.0}};
    case 3: return {[](std::span<const double> t) { return synthetic_intensity(3, t[0]); }, 20.0, {0.0}, {100.0}};
    default: fail(ErrorCategory::kInput, "synthetic intensity id must be 1, 2 or 3");
  }
}

IntensityFunction bump_intensity(const BumpSpec& bump, std::vector<double> lower, std::vector<double> upper) {
  require(!lower.empty() && lower.size() == upper.size() && bump.center.size() == lower.size(),
          ErrorCategory::kInput, "bump dimension mismatch");
  require(bump.width > 0.0 && bump.height >= 0.0 && bump.base >= 0.0, ErrorCategory::kInput,
          "bump needs width > 0 and non-negative height and base");
  auto eval = [bump](std::span<const double> t) {
    double r2 = 0.0;
    for (std::size_t k = 0; k < bump.center.size(); ++k) {
      const double z = (t[k] - bump.center[k]) / bump.width;
      r2 += z * z;
    }
    return bump.base + bump.height * std::exp(-0.5 * r2);
  };
  return {eval, bump.base + bump.height, std::move(lower), std::move(upper)};
}

}  // namespace coxbo
