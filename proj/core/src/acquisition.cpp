#include "coxbo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "coxbo/error.hpp"
#include "coxbo/pointprocess.hpp"

namespace coxbo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;
};

Box clip_to_domain(const Region& region, const Grid& grid) {
  require(region.center.size() == grid.dim(), ErrorCategory::kInput, "region dimension does not match the grid");
  require(std::isfinite(region.radius) && region.radius > 0.0, ErrorCategory::kInput, "region radius must be > 0");
  Box box{std::vector<double>(grid.dim()), std::vector<double>(grid.dim())};
  for (std::size_t k = 0; k < grid.dim(); ++k) {
    box.lower[k] = std::max(region.lower(k), grid.lower()[k]);
    box.upper[k] = std::min(region.upper(k), grid.upper()[k]);
    require(box.lower[k] < box.upper[k], ErrorCategory::kInput, "region lies outside the domain");
  }
  return box;
}

double region_mass(const Posterior& posterior, const Region& region, double omega, std::size_t points) {
  const Box box = clip_to_domain(region, posterior.grid);
  const double mass = integrate_midpoint(posterior_intensity(posterior, omega), box.lower, box.upper, points);
  require(std::isfinite(mass), ErrorCategory::kNumeric, "region intensity mass is not finite");
  return std::max(mass, 0.0);
}

double log_poisson(std::size_t n, double rate) {
  if (rate <= 0.0) return n == 0 ? 0.0 : kNegInf;
  const double dn = static_cast<double>(n);
  return dn * std::log(rate) - rate - std::lgamma(dn + 1.0);
}

double log_sum_exp(const Eigen::VectorXd& v) {
  const double top = v.maxCoeff();
  if (top == kNegInf) return kNegInf;
  return top + std::log((v.array() - top).exp().sum());
}

}  // namespace

bool Region::contains(std::span<const double> t) const {
  for (std::size_t k = 0; k < center.size(); ++k) {
    if (t[k] < lower(k) || t[k] > upper(k)) return false;
  }
  return true;
}

bool Region::inside(const Region& other) const {
  for (std::size_t k = 0; k < center.size(); ++k) {
    if (lower(k) < other.lower(k) || upper(k) > other.upper(k)) return false;
  }
  return true;
}

AcquisitionKind AcquisitionSpec::kind_from_name(std::string_view name) {
  if (name == "ucb") return AcquisitionKind::kUcb;
  if (name == "idle") return AcquisitionKind::kIdle;
  if (name == "cumulative") return AcquisitionKind::kCumulative;
  if (name == "cpd") return AcquisitionKind::kChangePoint;
  fail(ErrorCategory::kInput, "unknown acquisition '" + std::string(name) + "'");
}

std::string_view AcquisitionSpec::kind_name(AcquisitionKind kind) {
  switch (kind) {
    case AcquisitionKind::kUcb: return "ucb";
    case AcquisitionKind::kIdle: return "idle";
    case AcquisitionKind::kCumulative: return "cumulative";
    case AcquisitionKind::kChangePoint: return "cpd";
  }
  return "ucb";
}

void AcquisitionSpec::validate() const {
  require(std::isfinite(omega), ErrorCategory::kInput, "omega must be finite");
  require(hazard_rate > 0.0 && hazard_rate <= 1.0, ErrorCategory::kInput, "hazard_rate must lie in (0, 1]");
  require(quadrature_points > 0, ErrorCategory::kInput, "quadrature_points must be positive");
}

RunLengthPosterior cpd_step(const RunLengthPosterior& rlp, std::size_t bin_count, std::span<const double> rates,
                            double hazard_rate, ChangeBranch branch) {
  const auto runs = rlp.masses.size();
  require(runs > 0 && static_cast<Eigen::Index>(rates.size()) == runs, ErrorCategory::kInput,
          "need one predictive rate per run length");
  require(hazard_rate > 0.0 && hazard_rate <= 1.0, ErrorCategory::kInput, "hazard_rate must lie in (0, 1]");
  require((rlp.masses.array() >= 0.0).all(), ErrorCategory::kInput, "run-length masses must be non-negative");

  const double log_h = std::log(hazard_rate);
  const double log_stay = hazard_rate < 1.0 ? std::log1p(-hazard_rate) : kNegInf;
  const double log_fresh = log_poisson(bin_count, rates[0]);

  Eigen::VectorXd next(runs + 1);
  Eigen::VectorXd change_terms(runs);
  for (Eigen::Index r = 0; r < runs; ++r) {
    const double prior = rlp.masses(r) > 0.0 ? std::log(rlp.masses(r)) : kNegInf;
    const double log_pi = log_poisson(bin_count, rates[static_cast<std::size_t>(r)]);
    next(r + 1) = prior + log_pi + log_stay;
    change_terms(r) = prior + (branch == ChangeBranch::kFreshSegment ? log_fresh : log_pi);
  }
  next(0) = log_sum_exp(change_terms) + log_h;

  const double norm = log_sum_exp(next);
  require(norm > kNegInf && std::isfinite(norm), ErrorCategory::kNumeric, "run-length posterior underflowed");
  RunLengthPosterior out;
  out.masses = (next.array() - norm).exp();
  out.masses /= out.masses.sum();
  out.step = rlp.step + 1;
  return out;
}

ChangepointTrace changepoint_trace(const Posterior& posterior, const EventSet& observed,
                                   std::span<const Region> observed_regions, double hazard_rate,
                                   ChangeBranch branch) {
  const Grid& grid = posterior.grid;
  require(grid.dim() == 1, ErrorCategory::kInput, "change-point detection needs a 1D domain");
  const auto m = static_cast<Eigen::Index>(grid.size());
  const double width = grid.cell_width(0);

  Eigen::VectorXd rate(m);
  for (Eigen::Index j = 0; j < m; ++j) rate(j) = posterior.link.kappa(posterior.mean_g(j));

  Eigen::VectorXd counts = Eigen::VectorXd::Zero(m);
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const auto p = observed.point(i);
    if (grid.contains(p)) counts(static_cast<Eigen::Index>(grid.cell_of(p))) += 1.0;
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    const double c = grid.points()(j, 0);
    const bool seen = std::any_of(observed_regions.begin(), observed_regions.end(),
                                  [c](const Region& r) { return r.contains(std::span<const double>(&c, 1)); });
    if (!seen) counts(j) = std::round(rate(j) * width);
  }

  // prefix sums for window means
  Eigen::VectorXd cum_rate = Eigen::VectorXd::Zero(m + 1);
  Eigen::VectorXd cum_std = Eigen::VectorXd::Zero(m + 1);
  for (Eigen::Index j = 0; j < m; ++j) {
    cum_rate(j + 1) = cum_rate(j) + rate(j);
    cum_std(j + 1) = cum_std(j) + posterior.std(j);
  }

  ChangepointTrace trace{Eigen::VectorXd(m), counts};
  RunLengthPosterior rlp;
  std::vector<double> rates;
  for (Eigen::Index j = 0; j < m; ++j) {
    rates.assign(static_cast<std::size_t>(rlp.masses.size()), 0.0);
    rates[0] = rate(j) * width * (1.0 + posterior.std(j));
    for (Eigen::Index r = 1; r < rlp.masses.size(); ++r) {
      const double mean_rate = (cum_rate(j) - cum_rate(j - r)) / static_cast<double>(r);
      const double mean_std = (cum_std(j) - cum_std(j - r)) / static_cast<double>(r);
      rates[static_cast<std::size_t>(r)] = mean_rate * width * (1.0 + mean_std);
    }
    rlp = cpd_step(rlp, static_cast<std::size_t>(counts(j)), rates, hazard_rate, branch);
    trace.change_probability(j) = rlp.masses(0);
  }
  return trace;
}

double acq_ucb(const Posterior& posterior, const Region& region, double omega1) {
  const Box box = clip_to_domain(region, posterior.grid);
  const Grid& grid = posterior.grid;
  double best = kNegInf;
  for (Eigen::Index j = 0; j < grid.points().rows(); ++j) {
    bool in = true;
    for (std::size_t k = 0; k < grid.dim() && in; ++k) {
      const double x = grid.points()(j, static_cast<Eigen::Index>(k));
      in = x >= box.lower[k] && x <= box.upper[k];
    }
    if (in) best = std::max(best, posterior.mean_g(j) + omega1 * posterior.std(j));
  }
  if (best > kNegInf) return best;
  // region narrower than a cell: score its clipped center
  std::vector<double> c(grid.dim());
  for (std::size_t k = 0; k < grid.dim(); ++k) c[k] = 0.5 * (box.lower[k] + box.upper[k]);
  return interpolate_on_grid(grid, posterior.mean_g, c) + omega1 * interpolate_on_grid(grid, posterior.std, c);
}

double acq_idle(const Posterior& posterior, const Region& region, double omega2, std::size_t epsilon,
                std::size_t quadrature_points) {
  return poisson_cdf(epsilon, region_mass(posterior, region, omega2, quadrature_points));
}

double acq_cumulative(const Posterior& posterior, const Region& region, double omega3, std::size_t xi,
                      std::size_t quadrature_points) {
  const double mass = region_mass(posterior, region, omega3, quadrature_points);
  if (xi == 0) return 1.0;
  return 1.0 - poisson_cdf(xi - 1, mass);
}

double acq_changepoint(const Posterior& posterior, const Region& region, const ChangepointTrace& trace) {
  const Box box = clip_to_domain(region, posterior.grid);
  const Grid& grid = posterior.grid;
  require(trace.change_probability.size() == static_cast<Eigen::Index>(grid.size()), ErrorCategory::kInput,
          "change-point trace does not match the grid");
  double best = -1.0;
  for (Eigen::Index j = 0; j < grid.points().rows(); ++j) {
    const double x = grid.points()(j, 0);
    if (x >= box.lower[0] && x <= box.upper[0]) best = std::max(best, trace.change_probability(j));
  }
  if (best >= 0.0) return best;
  const double c = 0.5 * (box.lower[0] + box.upper[0]);
  return trace.change_probability(static_cast<Eigen::Index>(grid.cell_of(std::span<const double>(&c, 1))));
}

double acquisition_score(const AcquisitionSpec& spec, const Posterior& posterior, const Region& region,
                         const ChangepointTrace* trace) {
  switch (spec.kind) {
    case AcquisitionKind::kUcb: return acq_ucb(posterior, region, spec.omega);
    case AcquisitionKind::kIdle:
      return acq_idle(posterior, region, spec.omega, spec.epsilon, spec.quadrature_points);
    case AcquisitionKind::kCumulative:
      return acq_cumulative(posterior, region, spec.omega, spec.xi, spec.quadrature_points);
    case AcquisitionKind::kChangePoint:
      require(trace != nullptr, ErrorCategory::kInput, "cpd scoring needs a change-point trace");
      return acq_changepoint(posterior, region, *trace);
  }
  fail(ErrorCategory::kInput, "unknown acquisition kind");
}

}  // namespace coxbo
