#include "coxbo/bo.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include "coxbo/error.hpp"

namespace coxbo {

void BOConfig::validate() const {
  require(budget >= 1, ErrorCategory::kInput, "budget must be at least 1");
  require(!initial_regions.empty(), ErrorCategory::kInput, "need at least one initial region");
  require(std::isfinite(radius) && radius > 0.0, ErrorCategory::kInput, "radius must be positive");
  require(kernel.dim() == grid.dim(), ErrorCategory::kInput, "kernel and grid dimensions differ");
  for (const auto& r : initial_regions) {
    require(r.center.size() == grid.dim(), ErrorCategory::kInput, "initial region dimension mismatch");
    require(r.radius > 0.0, ErrorCategory::kInput, "initial region radius must be positive");
  }
  for (const auto& c : candidate_centers) {
    require(c.size() == grid.dim(), ErrorCategory::kInput, "candidate center dimension mismatch");
  }
  acquisition.validate();
  fit.validate();
}

std::vector<std::vector<double>> candidate_grid(const Grid& grid, double radius) {
  require(radius > 0.0, ErrorCategory::kInput, "radius must be positive");
  std::vector<std::vector<double>> per_axis(grid.dim());
  for (std::size_t k = 0; k < grid.dim(); ++k) {
    const double lo = grid.lower()[k];
    const double hi = grid.upper()[k];
    if (hi - lo <= 2.0 * radius) {
      per_axis[k].push_back(0.5 * (lo + hi));
      continue;
    }
    const auto steps = static_cast<std::size_t>(std::floor((hi - lo - 2.0 * radius) / radius + 1e-9));
    for (std::size_t i = 0; i <= steps; ++i) per_axis[k].push_back(lo + radius + static_cast<double>(i) * radius);
  }

  std::vector<std::vector<double>> centers;
  std::vector<std::size_t> idx(grid.dim(), 0);
  while (true) {
    std::vector<double> c(grid.dim());
    for (std::size_t k = 0; k < grid.dim(); ++k) c[k] = per_axis[k][idx[k]];
    centers.push_back(std::move(c));
    std::size_t k = grid.dim();
    while (k > 0) {
      --k;
      if (++idx[k] < per_axis[k].size()) break;
      idx[k] = 0;
      if (k == 0) return centers;
    }
  }
}

namespace {

bool in_any(const std::vector<Region>& regions, std::span<const double> t) {
  for (const auto& r : regions) {
    if (r.contains(t)) return true;
  }
  return false;
}

EventSet subset(const EventSet& dataset, const std::vector<bool>& keep) {
  std::size_t n = 0;
  for (bool b : keep) n += b ? 1 : 0;
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dataset.dim()));
  Eigen::Index out = 0;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) rows.row(out++) = dataset.events().row(static_cast<Eigen::Index>(i));
  }
  return EventSet(std::move(rows), dataset.lower(), dataset.upper());
}

}  // namespace

EventSet reveal(const EventSet& dataset, const std::vector<Region>& regions) {
  std::vector<bool> keep(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) keep[i] = in_any(regions, dataset.point(i));
  return subset(dataset, keep);
}

Eigen::VectorXd observation_window(const Grid& grid, const std::vector<Region>& regions) {
  constexpr std::size_t kSub = 4;
  const std::size_t d = grid.dim();
  std::size_t per_cell = 1;
  for (std::size_t k = 0; k < d; ++k) per_cell *= kSub;

  Eigen::VectorXd window(static_cast<Eigen::Index>(grid.size()));
  std::vector<double> t(d);
  for (Eigen::Index j = 0; j < window.size(); ++j) {
    std::size_t hits = 0;
    for (std::size_t s = 0; s < per_cell; ++s) {
      std::size_t rest = s;
      for (std::size_t k = 0; k < d; ++k) {
        const double offset = (static_cast<double>(rest % kSub) + 0.5) / static_cast<double>(kSub) - 0.5;
        rest /= kSub;
        t[k] = grid.points()(j, static_cast<Eigen::Index>(k)) + offset * grid.cell_width(k);
      }
      hits += in_any(regions, t) ? 1 : 0;
    }
    window(j) = static_cast<double>(hits) / static_cast<double>(per_cell);
  }
  return window;
}

Posterior fit_or_prior(const EventSet& revealed, const TransformedKernelModel& model, LinkFunction link,
                       const FitConfig& cfg, const PriorCovariance& prior, const Eigen::VectorXd& window) {
  if (revealed.empty()) return prior_posterior(model.grid(), link, prior);
  return infer_posterior(revealed, model, link, cfg, prior, window);
}

BOTrace run_bo(const EventSet& dataset, const BOConfig& cfg) {
  cfg.validate();
  const Grid& grid = cfg.grid;
  require(dataset.dim() == grid.dim(), ErrorCategory::kInput, "dataset and grid dimensions differ");
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    require(grid.contains(dataset.point(i)), ErrorCategory::kInput, "dataset event outside the grid domain");
  }

  // grid fixed for the whole run: one eigensystem, one prior
  const TransformedKernelModel model(cfg.kernel, grid, cfg.fit.gamma);
  const PriorCovariance prior = prior_covariance(grid, cfg.kernel, 1e-8 * cfg.kernel.variance());

  std::vector<Region> candidates;
  const auto centers = cfg.candidate_centers.empty() ? candidate_grid(grid, cfg.radius) : cfg.candidate_centers;
  for (const auto& c : centers) candidates.push_back(Region{c, cfg.radius});

  std::vector<Region> sampled = cfg.initial_regions;
  std::vector<bool> explored(candidates.size(), false);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    for (const auto& r : sampled) explored[c] = explored[c] || candidates[c].inside(r);
  }
  std::vector<bool> known(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) known[i] = in_any(sampled, dataset.point(i));

  std::vector<BOStep> steps;
  constexpr double kMasked = std::numeric_limits<double>::lowest();
  for (std::size_t t = 0; t < cfg.budget; ++t) {
    const auto start = std::chrono::steady_clock::now();
    std::size_t open = 0;
    for (bool e : explored) open += e ? 0 : 1;
    if (open == 0) break;

    const EventSet revealed = subset(dataset, known);
    const Posterior post = fit_or_prior(revealed, model, cfg.link, cfg.fit, prior, observation_window(grid, sampled));
    std::optional<ChangepointTrace> cpd;
    if (cfg.acquisition.kind == AcquisitionKind::kChangePoint) {
      cpd = changepoint_trace(post, revealed, sampled, cfg.acquisition.hazard_rate);
    }

    BOStep step;
    step.scores = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(candidates.size()), kMasked);
    bool have = false;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (explored[c]) continue;
      const double s = acquisition_score(cfg.acquisition, post, candidates[c], cpd ? &*cpd : nullptr);
      step.scores(static_cast<Eigen::Index>(c)) = s;
      if (!have || s > step.scores(static_cast<Eigen::Index>(step.candidate))) {
        step.candidate = c;
        have = true;
      }
    }

    step.selected = candidates[step.candidate];
    explored[step.candidate] = true;
    sampled.push_back(step.selected);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      explored[c] = explored[c] || candidates[c].inside(step.selected);
    }
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (!known[i] && step.selected.contains(dataset.point(i))) {
        known[i] = true;
        ++step.events_revealed;
      }
    }
    for (bool k : known) step.events_total += k ? 1 : 0;
    step.mean_g = post.mean_g;
    step.std = post.std;
    step.intensity = post.intensity;
    step.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    steps.push_back(std::move(step));
  }

  EventSet revealed = subset(dataset, known);
  Posterior final_posterior =
      fit_or_prior(revealed, model, cfg.link, cfg.fit, prior, observation_window(grid, sampled));
  return BOTrace{std::move(candidates), std::move(steps), std::move(sampled), std::move(revealed),
                 std::move(final_posterior)};
}

}  // namespace coxbo
