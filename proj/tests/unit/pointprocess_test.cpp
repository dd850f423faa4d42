#include "coxbo/pointprocess.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "coxbo/error.hpp"
#include "oracles.hpp"

namespace coxbo {
namespace {

IntensityFunction constant_intensity(double rate, double lo, double hi) {
  return {[rate](std::span<const double>) { return rate; }, rate, {lo}, {hi}};
}

double oracle_integral(int id, double lo, double hi) {
  return oracle::simpson([id](double t) { return synthetic_intensity(id, t); }, lo, hi, 20000);
}

TEST(PoissonPmf, Examples) {
  EXPECT_NEAR(poisson_pmf(0, 1.0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(poisson_pmf(1, 2.0), 2.0 * std::exp(-2.0), 1e-15);
  EXPECT_DOUBLE_EQ(poisson_pmf(0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(poisson_pmf(3, 0.0), 0.0);
}

TEST(PoissonPmf, MatchesProductFormAndSumsToOne) {
  for (double mass : {0.3, 1.0, 7.5, 20.0, 50.0}) {
    double total = 0.0;
    for (int n = 0; n < 200; ++n) {
      const double p = poisson_pmf(static_cast<std::size_t>(n), mass);
      EXPECT_NEAR(p, oracle::poisson_pmf(n, mass), 1e-12 * std::max(p, 1e-300) + 1e-300);
      total += p;
    }
    EXPECT_GE(total, 1.0 - 1e-9);
    EXPECT_LE(total, 1.0 + 1e-9);
  }
}

TEST(PoissonPmf, LargeCountsStayFinite) {
  const double p = poisson_pmf(5000, 5000.0);
  EXPECT_TRUE(std::isfinite(p));
  EXPECT_GT(p, 0.0);
}

TEST(PoissonCdf, MonotoneTowardOne) {
  double prev = 0.0;
  for (std::size_t k = 0; k < 60; ++k) {
    const double c = poisson_cdf(k, 12.0);
    EXPECT_GE(c, prev);
    prev = c;
  }
  EXPECT_NEAR(prev, 1.0, 1e-12);
}

TEST(CountProbability, ConstantIntensityExamples) {
  const auto one = [](std::span<const double>) { return 1.0; };
  const auto two = [](std::span<const double>) { return 2.0; };
  const std::vector<double> a{0.0}, b{1.0};
  EXPECT_NEAR(count_probability(one, a, b, 0), std::exp(-1.0), 1e-14);
  EXPECT_NEAR(count_probability(two, a, b, 1), 2.0 * std::exp(-2.0), 1e-14);
}

TEST(CountProbability, NonFiniteMassIsNumericError) {
  const auto bad = [](std::span<const double>) { return std::numeric_limits<double>::infinity(); };
  const std::vector<double> a{0.0}, b{1.0};
  try {
    count_probability(bad, a, b, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kNumeric);
  }
}

TEST(IntegrateMidpoint, MatchesSimpsonOnSmoothIntensity) {
  const std::vector<double> a{0.0}, b{50.0};
  const double mid = integrate_midpoint([](std::span<const double> t) { return synthetic_intensity(1, t[0]); }, a, b,
                                        4096);
  EXPECT_NEAR(mid, oracle_integral(1, 0.0, 50.0), 1e-6);
}

TEST(IntegrateMidpoint, TwoDimensionalBox) {
  const std::vector<double> a{0.0, 0.0}, b{2.0, 3.0};
  const double v = integrate_midpoint([](std::span<const double> t) { return t[0] * t[1]; }, a, b, 64);
  EXPECT_NEAR(v, 2.0 * 4.5, 1e-10);
}

TEST(SyntheticIntensity, BenchmarkValues) {
  EXPECT_NEAR(synthetic_intensity(1, 0.0), 2.0 + std::exp(-6.25), 1e-12);
  EXPECT_NEAR(synthetic_intensity(1, 0.0), 2.00193, 1e-5);
  EXPECT_DOUBLE_EQ(synthetic_intensity(2, 0.0), 6.0);
  EXPECT_DOUBLE_EQ(synthetic_intensity(3, 25.0), 3.0);
  EXPECT_DOUBLE_EQ(synthetic_intensity(3, 12.5), 11.5);
}

TEST(SyntheticIntensity, OutsideDomainOrUnknownIdIsInputError) {
  EXPECT_THROW(synthetic_intensity(1, 50.5), Error);
  EXPECT_THROW(synthetic_intensity(2, -0.1), Error);
  EXPECT_THROW(synthetic_intensity(4, 1.0), Error);
}

TEST(SyntheticIntensity, NonNegativeAndBoundedOnDomain) {
  for (int id : {1, 2, 3}) {
    const IntensityFunction f = synthetic_intensity_function(id);
    EXPECT_NO_THROW(f.check_bound());
    const double lo = f.lower[0], hi = f.upper[0];
    for (int i = 0; i <= 1000; ++i) {
      const double t = lo + (hi - lo) * i / 1000.0;
      EXPECT_GE(synthetic_intensity(id, t), 0.0);
    }
  }
  // 30 + 5 * sqrt(pi / 2) * FresnelS(5 sqrt(2 / pi))
  EXPECT_NEAR(oracle_integral(2, 0.0, 5.0), 32.63959, 1e-5);
}

TEST(IntensityFunction, CheckBoundDetectsViolation) {
  IntensityFunction f = constant_intensity(3.0, 0.0, 1.0);
  f.upper_bound = 2.0;
  try {
    f.check_bound(100);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kBoundViolation);
  }
}

TEST(Thinning, ZeroIntensityGivesNoEvents) {
  const EventSet e = thinning_sample(constant_intensity(0.0, 0.0, 10.0), 1);
  EXPECT_TRUE(e.empty());
  EXPECT_EQ(e.dim(), 1u);
}

TEST(Thinning, SameSeedSameEventsDifferentSeedDifferentEvents) {
  const IntensityFunction f = synthetic_intensity_function(1);
  const EventSet a = thinning_sample(f, 42);
  const EventSet b = thinning_sample(f, 42);
  const EventSet c = thinning_sample(f, 43);
  EXPECT_EQ(a.events(), b.events());
  EXPECT_FALSE(a.size() == c.size() && a.events() == c.events());
}

TEST(Thinning, EventsInsideDomain) {
  const IntensityFunction f = bump_intensity({{5.0, 5.0}, 1.0, 4.0, 0.5}, {0.0, 0.0}, {10.0, 10.0});
  const EventSet e = thinning_sample(f, 3);
  ASSERT_EQ(e.dim(), 2u);
  for (Eigen::Index i = 0; i < e.events().rows(); ++i) {
    for (Eigen::Index k = 0; k < 2; ++k) {
      EXPECT_GE(e.events()(i, k), 0.0);
      EXPECT_LE(e.events()(i, k), 10.0);
    }
  }
}

TEST(Thinning, BoundViolationIsReported) {
  IntensityFunction f = constant_intensity(5.0, 0.0, 10.0);
  f.upper_bound = 1.0;
  try {
    thinning_sample(f, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kBoundViolation);
  }
}

double mean_count(const IntensityFunction& f, int seeds) {
  double total = 0.0;
  for (int s = 0; s < seeds; ++s) total += static_cast<double>(thinning_sample(f, static_cast<std::uint64_t>(s)).size());
  return total / seeds;
}

TEST(Thinning, MeanCountMatchesIntegralForLambdaOne) {
  const double expected = oracle_integral(1, 0.0, 50.0);
  const double sigma = std::sqrt(expected / 500.0);
  EXPECT_NEAR(mean_count(synthetic_intensity_function(1), 500), expected, 3.0 * sigma);
}

TEST(Thinning, MeanCountMatchesIntegralForConstantRate) {
  const double expected = 1.5 * 20.0;
  const double sigma = std::sqrt(expected / 500.0);
  EXPECT_NEAR(mean_count(constant_intensity(1.5, 0.0, 20.0), 500), expected, 3.0 * sigma);
}

TEST(BumpIntensity, PeakAndBase) {
  const IntensityFunction f = bump_intensity({{30.0}, 2.0, 10.0, 0.5}, {0.0}, {100.0});
  const std::vector<double> peak{30.0}, far{90.0};
  EXPECT_NEAR(f(peak), 10.5, 1e-12);
  EXPECT_NEAR(f(far), 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(f.upper_bound, 10.5);
  EXPECT_DOUBLE_EQ(f.domain_volume(), 100.0);
}

}  // namespace
}  // namespace coxbo
