#include "coxbo_cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "coxbo/bo.hpp"
#include "coxbo/error.hpp"
#include "coxbo/metrics.hpp"
#include "coxbo_cli/ingest.hpp"

namespace coxbo::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Json blank_result() {
  return Json{{"config", nullptr},  {"grid", nullptr},  {"mean", nullptr},          {"std", nullptr},
              {"metrics", nullptr}, {"trace", nullptr}, {"timing_seconds", nullptr}};
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Json config_json(const ExperimentConfig& c) {
  Json j;
  j["dataset"] = c.dataset;
  j["truth"] = c.truth ? Json(*c.truth) : Json(nullptr);
  j["lower"] = c.lower;
  j["upper"] = c.upper;
  j["grid_points"] = c.grid_points;
  j["kernel_variance"] = c.kernel_variance;
  j["lengthscale"] = c.make_kernel().lengthscales();
  j["link"] = c.link;
  j["gamma"] = c.fit.gamma;
  j["learning_rate"] = c.fit.learning_rate;
  j["max_iters"] = c.fit.max_iters;
  j["grad_tolerance"] = c.fit.grad_tolerance;
  j["floor"] = c.fit.floor;
  j["random_init"] = c.fit.random_init;
  j["seed"] = c.seed;
  j["replicates"] = c.replicates;
  if (c.truth && *c.truth == "bump") {
    j["bump"] = {{"center", c.bump.center}, {"width", c.bump.width}, {"height", c.bump.height},
                 {"base", c.bump.base}};
  }
  return j;
}

Json bo_config_json(const ExperimentConfig& c) {
  Json j = config_json(c);
  j["budget"] = c.budget;
  j["radius"] = c.radius;
  j["initial_centers"] = c.initial_centers;
  j["acquisition"] = std::string(AcquisitionSpec::kind_name(c.acquisition.kind));
  j["omega"] = c.acquisition.omega;
  j["epsilon"] = c.acquisition.epsilon;
  j["xi"] = c.acquisition.xi;
  j["hazard"] = c.acquisition.hazard_rate;
  j["quadrature_points"] = c.acquisition.quadrature_points;
  return j;
}

Json grid_json(const Grid& grid) {
  std::vector<std::vector<double>> pts;
  for (Eigen::Index i = 0; i < grid.points().rows(); ++i) {
    const Eigen::VectorXd row = grid.points().row(i).transpose();
    pts.push_back(to_std(row));
  }
  return Json{{"lower", grid.lower()},
              {"upper", grid.upper()},
              {"points_per_dim", grid.points_per_dim()},
              {"cell_volume", grid.cell_volume()},
              {"points", pts}};
}

/// Delta-method standard deviation of kappa(g).
Eigen::VectorXd intensity_std(const Posterior& p) {
  Eigen::VectorXd s(p.std.size());
  for (Eigen::Index j = 0; j < s.size(); ++j) s(j) = std::abs(p.link.kappa_dot(p.mean_g(j))) * p.std(j);
  return s;
}

Json report_json(const MetricReport& r) {
  return Json{{"l2", r.l2}, {"iql50", r.iql50}, {"iql85", r.iql85}, {"grid_points_used", r.grid_points_used}};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Json median_json(const std::vector<MetricReport>& reports) {
  std::vector<double> l2, q50, q85;
  for (const auto& r : reports) {
    l2.push_back(r.l2);
    q50.push_back(r.iql50);
    q85.push_back(r.iql85);
  }
  return Json{{"l2", median(l2)}, {"iql50", median(q50)}, {"iql85", median(q85)}};
}

Eigen::VectorXd truth_on_grid(const ExperimentConfig& cfg, const Grid& grid) {
  const IntensityFunction f = cfg.intensity(*cfg.truth);
  Eigen::VectorXd out(static_cast<Eigen::Index>(grid.size()));
  std::vector<double> t(grid.dim());
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    for (std::size_t k = 0; k < grid.dim(); ++k) t[k] = grid.points()(j, static_cast<Eigen::Index>(k));
    out(j) = f(t);
  }
  return out;
}

std::string curve_csv(const Posterior& p) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t k = 0; k < p.grid.dim(); ++k) out << 'x' << k << ',';
  out << "intensity,intensity_std,g_mean,g_std\n";
  const Eigen::VectorXd s = intensity_std(p);
  for (Eigen::Index j = 0; j < p.mean_g.size(); ++j) {
    for (std::size_t k = 0; k < p.grid.dim(); ++k) out << p.grid.points()(j, static_cast<Eigen::Index>(k)) << ',';
    out << p.intensity(j) << ',' << s(j) << ',' << p.mean_g(j) << ',' << p.std(j) << '\n';
  }
  return out.str();
}

/// Loads CSV data once (fixing the domain if unset) and finalizes the config.
std::optional<EventSet> prepare(ExperimentConfig& cfg) {
  std::optional<EventSet> data;
  if (!cfg.dataset.empty() && !cfg.synthetic()) {
    data = ingest_events(cfg.dataset, cfg.lower, cfg.upper);
    if (cfg.lower.empty()) {
      cfg.lower = data->lower();
      cfg.upper = data->upper();
    }
  }
  cfg.finalize();
  return data;
}

EventSet replicate_events(const ExperimentConfig& cfg, const std::optional<EventSet>& data, std::size_t r) {
  if (data) return *data;
  require(cfg.synthetic(), ErrorCategory::kInput, "config needs a dataset");
  const EventSet sample = thinning_sample(cfg.intensity(cfg.synthetic_name()), cfg.seed + r);
  return EventSet(sample.events(), cfg.lower, cfg.upper);
}

void attach_posterior(Json& result, const Posterior& p, const ExperimentConfig& cfg) {
  result["grid"] = grid_json(p.grid);
  result["mean"] = to_std(p.intensity);
  result["std"] = to_std(intensity_std(p));
  if (!cfg.curve_csv.empty()) write_atomic(cfg.curve_csv, curve_csv(p));
}

}  // namespace

std::string replicate_path(const std::string& out, std::size_t r) {
  if (r == 0) return out;
  const std::filesystem::path p(out);
  std::filesystem::path q = p.parent_path() / p.stem();
  q += ".r" + std::to_string(r);
  q += p.extension();
  return q.string();
}

Json cmd_fit(ExperimentConfig cfg) {
  const auto start = Clock::now();
  const auto data = prepare(cfg);
  const Grid grid = cfg.make_grid();
  const KernelSpec kernel = cfg.make_kernel();
  const LinkFunction link = cfg.make_link();
  const TransformedKernelModel model(kernel, grid, cfg.fit.gamma);
  const PriorCovariance prior = prior_covariance(grid, kernel, 1e-8 * kernel.variance());

  Json result = blank_result();
  result["config"] = config_json(cfg);
  Json trace = Json::array();
  Json per_rep = Json::array();
  std::vector<MetricReport> reports;
  std::vector<double> rep_seconds;
  for (std::size_t r = 0; r < cfg.replicates; ++r) {
    const auto rep_start = Clock::now();
    const EventSet events = replicate_events(cfg, data, r);
    FitConfig fit_cfg = cfg.fit;
    fit_cfg.seed = cfg.seed + r;

    Json record{{"replicate", r}, {"seed", cfg.seed + r}, {"events", events.size()}};
    std::optional<Posterior> post;
    if (events.empty()) {
      post = prior_posterior(grid, link, prior);
      record["fit"] = nullptr;
    } else {
      MapFit fit = fit_map(events, model, link, fit_cfg);
      record["fit"] = {{"iterations", fit.iterations},
                       {"converged", fit.converged},
                       {"gradient_norm", fit.gradient_norm},
                       {"initial_objective", fit.initial_objective},
                       {"final_objective", fit.final_objective}};
      post = posterior_from_fit(std::move(fit), events, grid, link, prior);
    }
    trace.push_back(record);
    if (r == 0) attach_posterior(result, *post, cfg);
    if (cfg.truth) {
      reports.push_back(evaluate_metrics(truth_on_grid(cfg, grid), post->intensity, grid.cell_volume()));
      per_rep.push_back(report_json(reports.back()));
    }
    rep_seconds.push_back(seconds_since(rep_start));
  }

  if (cfg.truth) result["metrics"] = {{"replicates", per_rep}, {"median", median_json(reports)}};
  result["trace"] = {{"replicates", trace}};
  result["timing_seconds"] = {{"total", seconds_since(start)}, {"replicates", rep_seconds}};
  return result;
}

Json cmd_bo(ExperimentConfig cfg) {
  const auto start = Clock::now();
  const auto data = prepare(cfg);

  BOConfig bo;
  bo.budget = cfg.budget;
  bo.radius = cfg.radius;
  bo.candidate_centers = cfg.candidate_centers;
  bo.acquisition = cfg.acquisition;
  bo.fit = cfg.fit;
  bo.kernel = cfg.make_kernel();
  bo.link = cfg.make_link();
  bo.grid = cfg.make_grid();
  if (cfg.initial_centers.empty()) {
    std::vector<double> mid;
    for (std::size_t k = 0; k < cfg.lower.size(); ++k) mid.push_back(0.5 * (cfg.lower[k] + cfg.upper[k]));
    cfg.initial_centers.push_back(mid);
  }
  for (const auto& c : cfg.initial_centers) bo.initial_regions.push_back(Region{c, cfg.radius});

  Json result = blank_result();
  result["config"] = bo_config_json(cfg);
  Json per_rep = Json::array();
  Json summaries = Json::array();
  std::vector<MetricReport> reports;
  std::vector<double> rep_seconds;
  std::vector<double> step_seconds;
  for (std::size_t r = 0; r < cfg.replicates; ++r) {
    const auto rep_start = Clock::now();
    const EventSet dataset = replicate_events(cfg, data, r);
    bo.fit.seed = cfg.seed + r;
    const BOTrace trace = run_bo(dataset, bo);

    std::optional<std::size_t> bump_step;
    Json steps = Json::array();
    for (std::size_t s = 0; s < trace.steps.size(); ++s) {
      const BOStep& st = trace.steps[s];
      if (!bump_step && cfg.truth && *cfg.truth == "bump" && st.selected.contains(cfg.bump.center)) bump_step = s + 1;
      if (r != 0) continue;
      Json scores = Json::array();
      for (Eigen::Index c = 0; c < st.scores.size(); ++c) {
        const double v = st.scores(c);
        scores.push_back(v == std::numeric_limits<double>::lowest() ? Json(nullptr) : Json(v));
      }
      steps.push_back({{"step", s + 1},
                       {"candidate", st.candidate},
                       {"center", st.selected.center},
                       {"radius", st.selected.radius},
                       {"events_revealed", st.events_revealed},
                       {"events_total", st.events_total},
                       {"mean_g", to_std(st.mean_g)},
                       {"std_g", to_std(st.std)},
                       {"scores", scores}});
      step_seconds.push_back(st.seconds);
    }

    Json summary{{"replicate", r},
                 {"seed", cfg.seed + r},
                 {"events", dataset.size()},
                 {"events_revealed", trace.revealed.size()},
                 {"steps", trace.steps.size()},
                 {"bump_found_step", bump_step ? Json(*bump_step) : Json(nullptr)}};
    summaries.push_back(summary);
    if (r == 0) {
      std::vector<std::vector<double>> centers;
      for (const auto& c : trace.candidates) centers.push_back(c.center);
      result["trace"] = {{"candidates", centers}, {"steps", steps}};
      attach_posterior(result, trace.final_posterior, cfg);
    }
    if (cfg.truth) {
      reports.push_back(
          evaluate_metrics(truth_on_grid(cfg, bo.grid), trace.final_posterior.intensity, bo.grid.cell_volume()));
      per_rep.push_back(report_json(reports.back()));
    }
    rep_seconds.push_back(seconds_since(rep_start));
  }

  result["trace"]["replicates"] = summaries;
  if (cfg.truth) result["metrics"] = {{"replicates", per_rep}, {"median", median_json(reports)}};
  result["timing_seconds"] = {
      {"total", seconds_since(start)}, {"replicates", rep_seconds}, {"steps", step_seconds}};
  return result;
}

Json cmd_synth(ExperimentConfig cfg, const std::string& out) {
  const auto start = Clock::now();
  require(cfg.synthetic(), ErrorCategory::kInput, "synth needs dataset = synthetic:<name>");
  require(!out.empty(), ErrorCategory::kInput, "synth needs --out");
  prepare(cfg);

  Json result = blank_result();
  result["config"] = config_json(cfg);
  Json reps = Json::array();
  for (std::size_t r = 0; r < cfg.replicates; ++r) {
    const EventSet events = replicate_events(cfg, std::nullopt, r);
    const std::string path = replicate_path(out, r);
    write_atomic(path, format_events(events));
    reps.push_back({{"replicate", r}, {"seed", cfg.seed + r}, {"events", events.size()}, {"path", path}});
  }
  result["trace"] = {{"replicates", reps}};
  result["timing_seconds"] = {{"total", seconds_since(start)}};
  return result;
}

Json cmd_metrics(ExperimentConfig cfg) {
  const auto start = Clock::now();
  require(!cfg.estimate.empty(), ErrorCategory::kInput, "metrics needs estimate = <curve csv>");
  require(cfg.truth.has_value() || cfg.synthetic(), ErrorCategory::kInput, "metrics needs truth = <name>");
  prepare(cfg);
  const Grid grid = cfg.make_grid();

  // the curve file is numeric after its header; reuse the event parser
  std::ifstream in(cfg.estimate);
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot open estimate '" + cfg.estimate + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const EventSet rows = parse_events(buf.str());
  const Eigen::MatrixXd& table = rows.events();
  const auto d = static_cast<Eigen::Index>(grid.dim());
  require(table.rows() == static_cast<Eigen::Index>(grid.size()) && table.cols() > d, ErrorCategory::kInput,
          "estimate rows do not match the configured grid");
  for (Eigen::Index j = 0; j < table.rows(); ++j) {
    for (Eigen::Index k = 0; k < d; ++k) {
      require(std::abs(table(j, k) - grid.points()(j, k)) <= 1e-9 * (1.0 + std::abs(grid.points()(j, k))),
              ErrorCategory::kInput, "estimate row " + std::to_string(j + 1) + " is not on the configured grid");
    }
  }
  const Eigen::VectorXd estimate = table.col(d);
  const MetricReport report = evaluate_metrics(truth_on_grid(cfg, grid), estimate, grid.cell_volume());

  Json result = blank_result();
  result["config"] = config_json(cfg);
  result["grid"] = grid_json(grid);
  result["mean"] = to_std(estimate);
  result["metrics"] = report_json(report);
  result["timing_seconds"] = {{"total", seconds_since(start)}};
  return result;
}

std::string dump_without_timing(const Json& result) {
  Json copy = result;
  copy.erase("timing_seconds");
  return copy.dump();
}

}  // namespace coxbo::cli
