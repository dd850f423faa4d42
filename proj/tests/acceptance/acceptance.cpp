// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coxbo/acquisition.hpp"
#include "coxbo/bo.hpp"
#include "coxbo/inference.hpp"
#include "coxbo/kernels.hpp"
#include "coxbo/metrics.hpp"
#include "coxbo/pointprocess.hpp"
#include "coxbo_cli/commands.hpp"
#include "coxbo_cli/config.hpp"
#include "oracles.hpp"

namespace {

using namespace coxbo;
using coxbo::cli::Json;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void append(Outcome& o, bool ok, const std::string& what) {
  o.pass = o.pass && ok;
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += what + (ok ? "" : " [miss]");
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

constexpr std::array<LinkKind, 4> kLinks{LinkKind::kExponential, LinkKind::kQuadratic, LinkKind::kSigmoidal,
                                         LinkKind::kSoftplus};

// 1. Synthetic benchmark medians over 10 seeded replicates with default settings.
Outcome benchmark_reproduction() {
  Outcome o;
  struct Target {
    int id;
    double l2;
    double iql50;  // negative: not part of the contract
  };
  for (const Target t : {Target{1, 4.5, -1.0}, Target{2, 43.0, -1.0}, Target{3, 4.5, 45.0}}) {
    const Json r = cli::cmd_fit(cli::parse_config(fmt("dataset = synthetic:%d\nreplicates = 10\n", t.id)));
    const double l2 = r["metrics"]["median"]["l2"].get<double>();
    const double q50 = r["metrics"]["median"]["iql50"].get<double>();
    double slowest = 0.0;
    for (const auto& s : r["timing_seconds"]["replicates"]) slowest = std::max(slowest, s.get<double>());
    append(o, l2 <= t.l2, fmt("lambda%d l2 %.3f <= %.1f", t.id, l2, t.l2));
    if (t.iql50 > 0) append(o, q50 <= t.iql50, fmt("lambda%d iql50 %.2f <= %.0f", t.id, q50, t.iql50));
    append(o, slowest < 60.0, fmt("lambda%d slowest replicate %.2fs", t.id, slowest));
  }
  return o;
}

// 2. Representer fit against a Newton solve over grid values of h.
Outcome oracle_equivalence() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> n_dist(1, 5);
  std::uniform_int_distribution<std::size_t> m_dist(6, 12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int total = 0;
  int matched = 0;
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t m = m_dist(rng);
    const int n = n_dist(rng);
    const double ls = 0.15 + 0.15 * u(rng);
    const double gamma = 0.5 + 1.5 * u(rng);
    Eigen::MatrixXd t(n, 1);
    for (int i = 0; i < n; ++i) t(i, 0) = u(rng);
    const Grid grid({0.0}, {1.0}, {m});
    const TransformedKernelModel model(KernelSpec(1.0, {ls}), grid, gamma);

    Eigen::MatrixXd k_xx = oracle::rbf_gram(grid.points(), grid.points(), 1.0, {ls});
    k_xx.diagonal().array() += 1e-8;
    const Eigen::MatrixXd k_tx = oracle::rbf_gram(t, grid.points(), 1.0, {ls});
    const Eigen::VectorXd v = oracle::grid_newton(k_xx, k_tx, grid.cell_volume(), gamma, 1.0, 1e-8);
    const Eigen::VectorXd expected = v.array().square();

    FitConfig cfg;
    cfg.gamma = gamma;
    cfg.learning_rate = 0.2;
    cfg.max_iters = 100000;
    cfg.grad_tolerance = 1e-8;
    for (LinkKind link : kLinks) {
      const MapFit fit = fit_map(EventSet(t, {0.0}, {1.0}), model, LinkFunction(link), cfg);
      const double rel = (fit.intensity - expected).norm() / expected.norm();
      worst = std::max(worst, rel);
      ++total;
      matched += rel <= 0.1;
    }
  }
  const double secs = seconds_since(start);
  append(o, matched == total, fmt("%d/%d instances within 0.1 (worst %.2e)", matched, total, worst));
  append(o, secs < 10.0, fmt("%.2fs", secs));
  return o;
}

// 3. Gradient and Hessian against central differences.
Outcome derivative_checks() {
  Outcome o;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  int grad_ok = 0;
  double grad_worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const Eigen::Index n = 2 + inst % 7;
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = z(rng);
    Eigen::MatrixXd k = a * a.transpose() / static_cast<double>(n);
    k.diagonal().array() += 0.1;
    Eigen::VectorXd alpha(n);
    for (Eigen::Index i = 0; i < n; ++i) alpha(i) = u(rng);
    const auto j = [&](const Eigen::VectorXd& x) { return objective(x, k, 1e-12); };
    const Eigen::VectorXd fd = oracle::central_gradient(j, alpha, 1e-6);
    const Eigen::VectorXd an = objective_gradient(alpha, k, 1e-12);
    const double rel = (fd - an).norm() / an.norm();
    grad_worst = std::max(grad_worst, rel);
    grad_ok += rel <= 1e-4;
  }
  append(o, grad_ok == 50, fmt("gradient %d/50 (worst %.1e)", grad_ok, grad_worst));

  const Grid grid({0.0}, {3.0}, {12});
  std::uniform_real_distribution<double> ut(0.0, 3.0), ug(0.5, 2.0);
  Eigen::MatrixXd t(8, 1);
  for (Eigen::Index i = 0; i < 8; ++i) t(i, 0) = ut(rng);
  const EventSet events(t, {0.0}, {3.0});
  Eigen::VectorXd g(12);
  for (Eigen::Index i = 0; i < 12; ++i) g(i) = ug(rng);
  for (LinkKind kind : kLinks) {
    const LinkFunction link(kind);
    const auto loglik = [&](const Eigen::VectorXd& x) {
      double s = 0.0;
      for (std::size_t i = 0; i < events.size(); ++i) s += std::log(link.kappa(x(grid.cell_of(events.point(i)))));
      for (Eigen::Index j = 0; j < x.size(); ++j) s -= link.kappa(x(j)) * grid.cell_volume();
      return s;
    };
    const Eigen::MatrixXd fd = oracle::central_hessian(loglik, g, 1e-4);
    const Eigen::MatrixXd w = log_likelihood_hessian_diagonal(g, events, grid, link).asDiagonal();
    const double rel = (fd - w).norm() / w.norm();
    append(o, rel <= 1e-3, fmt("W %s rel %.1e", std::string(link.name()).c_str(), rel));
  }
  return o;
}

// 4. Nystrom reconstruction, large-penalty limit and PSD transformed Gram.
Outcome nystrom_properties() {
  Outcome o;
  const Grid grid({0.0}, {10.0}, {40});
  const KernelSpec spec(1.0, {0.8});
  const TransformedKernelModel model(spec, grid, 1e8);
  std::vector<Eigen::Index> rows{0, 3, 7, 19, 20, 33, 39};
  Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), 1);
  for (std::size_t i = 0; i < rows.size(); ++i) sub(static_cast<Eigen::Index>(i), 0) = grid.points()(rows[i], 0);
  const double recon = (nystrom_gram(sub, sub, model) - gram(sub, sub, spec)).cwiseAbs().maxCoeff();
  append(o, recon <= 1e-8, fmt("grid-subset reconstruction %.3e", recon));

  Eigen::MatrixXd off(6, 1);
  off << 0.3, 1.7, 4.45, 5.0, 8.12, 9.9;
  const Eigen::MatrixXd base = nystrom_gram(off, off, model);
  const double limit = (1e8 * transformed_gram(off, off, model) - base).norm() / base.norm();
  append(o, limit <= 1e-4, fmt("gamma=1e8 limit rel %.1e", limit));

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int psd = 0;
  double most_negative = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const Grid g2({0.0, 0.0}, {5.0, 5.0}, {8 + inst % 5, 9});
    const TransformedKernelModel m2(KernelSpec(0.5 + u(rng), {0.3 + u(rng), 0.3 + u(rng)}), g2, 0.1 + 2 * u(rng));
    Eigen::MatrixXd p(15, 2);
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = 5.0 * u(rng);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(transformed_gram(p, p, m2));
    most_negative = std::min(most_negative, es.eigenvalues().minCoeff());
    psd += es.eigenvalues().minCoeff() >= -1e-10;
  }
  append(o, psd == 20, fmt("PSD %d/20 (min eigenvalue %.1e)", psd, most_negative));
  return o;
}

// 5. Poisson normalization, idle/cumulative complementarity, run-length normalization.
Outcome probability_laws() {
  Outcome o;
  double worst_sum = 1.0;
  for (double mass = 0.0; mass <= 50.0; mass += 0.5) {
    double s = 0.0;
    for (std::size_t n = 0; n <= 200; ++n) s += poisson_pmf(n, mass);
    worst_sum = std::min(worst_sum, s);
  }
  append(o, worst_sum >= 1.0 - 1e-9, fmt("min truncated pmf sum %.12f", worst_sum));

  const Grid grid({0.0}, {20.0}, {40});
  Posterior p = prior_posterior(grid, LinkFunction(LinkKind::kQuadratic),
                                prior_covariance(grid, KernelSpec(1.0, {1.0}), 1e-8));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(0.0, 1.0);
  for (Eigen::Index j = 0; j < 40; ++j) {
    p.mean_g(j) = 1.0 + 0.5 * z(rng);
    p.std(j) = std::abs(0.3 * z(rng));
  }
  double worst_gap = 0.0;
  for (double c = 2.0; c <= 18.0; c += 2.0) {
    for (std::size_t eps = 0; eps < 12; ++eps) {
      const Region r{{c}, 2.0};
      worst_gap = std::max(worst_gap, std::abs(acq_idle(p, r, 0.8, eps) + acq_cumulative(p, r, 0.8, eps + 1) - 1.0));
    }
  }
  append(o, worst_gap <= 1e-12, fmt("complementarity gap %.1e", worst_gap));

  std::poisson_distribution<int> counts(4.0);
  std::uniform_real_distribution<double> rate(0.5, 8.0);
  RunLengthPosterior rlp;
  double worst_norm = 0.0;
  for (int k = 0; k < 500; ++k) {
    std::vector<double> rates(static_cast<std::size_t>(rlp.masses.size()));
    for (double& r : rates) r = rate(rng);
    rlp = cpd_step(rlp, static_cast<std::size_t>(counts(rng)), rates, 0.1);
    worst_norm = std::max(worst_norm, std::abs(rlp.masses.sum() - 1.0));
  }
  append(o, worst_norm <= 1e-10, fmt("run-length normalization error %.1e over 500 steps", worst_norm));
  return o;
}

// 6. Mean thinned count against the quadrature integral.
Outcome thinning_correctness() {
  Outcome o;
  const auto check = [&](const IntensityFunction& f, const std::string& name) {
    const double integral =
        oracle::simpson([&](double t) { return f(std::span<const double>(&t, 1)); }, f.lower[0], f.upper[0], 20000);
    double total = 0.0;
    for (std::uint64_t s = 0; s < 500; ++s) total += static_cast<double>(thinning_sample(f, s).size());
    const double mean = total / 500.0;
    const double sigma = std::sqrt(integral / 500.0);
    append(o, std::abs(mean - integral) <= 3.0 * sigma,
           fmt("%s mean %.3f vs %.3f (3 sigma %.3f)", name.c_str(), mean, integral, 3.0 * sigma));
  };
  check({[](std::span<const double>) { return 1.5; }, 1.5, {0.0}, {40.0}}, "constant");
  check(synthetic_intensity_function(1), "lambda1");
  return o;
}

// 7. Bump discovery with UCB and the 2D timing run.
Outcome bo_behavior() {
  Outcome o;
  const Json r = cli::cmd_bo(
      cli::parse_config("dataset = synthetic:bump\ninitial_centers = 25;60\nbudget = 25\nreplicates = 10\n"));
  int found = 0;
  std::string steps;
  for (const auto& s : r["trace"]["replicates"]) {
    const auto& b = s["bump_found_step"];
    found += b.is_number() && b.get<int>() <= 13;
    steps += (steps.empty() ? "" : ",") + (b.is_number() ? std::to_string(b.get<int>()) : std::string("-"));
  }
  append(o, found >= 8, fmt("bump found by step 13 in %d/10 seeds (steps %s)", found, steps.c_str()));

  const Json r2 = cli::cmd_bo(cli::parse_config(
      "dataset = synthetic:bump\nlower = 0,0\nupper = 50,50\ngrid_points = 50\nbump_center = 35,30\n"
      "bump_width = 3\nbump_height = 3.5\nbump_base = 0.06\ninitial_centers = 10,10;25,40\nbudget = 25\n"));
  const double secs = r2["timing_seconds"]["total"].get<double>();
  const auto events = r2["trace"]["replicates"][0]["events"].get<std::size_t>();
  const auto n_steps = r2["trace"]["steps"].size();
  append(o, secs < 300.0 && n_steps == 25,
         fmt("2D 50x50 grid, %zu events, %zu steps in %.1fs", events, n_steps, secs));
  return o;
}

// 8. Change-point localization for a tenfold rate jump.
Outcome cpd_behavior() {
  Outcome o;
  const Grid grid({0.0}, {100.0}, {100});
  const KernelSpec k = KernelSpec::default_for(grid.lower(), grid.upper());
  const TransformedKernelModel model(k, grid, 1.0);
  const PriorCovariance prior = prior_covariance(grid, k, 1e-8);
  const IntensityFunction jump{[](std::span<const double> t) { return t[0] < 50.0 ? 0.5 : 5.0; }, 5.0, {0.0}, {100.0}};
  const std::vector<Region> all{Region{{50.0}, 50.0}};
  int hits = 0;
  std::string where;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const EventSet events = thinning_sample(jump, 100 + s);
    const Posterior post = infer_posterior(events, model, LinkFunction(LinkKind::kQuadratic), {}, prior);
    const ChangepointTrace tr = changepoint_trace(post, events, all, 0.1);
    Eigen::Index arg = 0;
    tr.change_probability.maxCoeff(&arg);
    hits += std::abs(arg - 50) <= 3;
    where += (where.empty() ? "" : ",") + std::to_string(arg);
  }
  append(o, hits >= 8, fmt("argmax within 3 bins of the jump in %d/10 seeds (bins %s)", hits, where.c_str()));
  return o;
}

// 9. IQL identities.
Outcome metric_identities() {
  Outcome o;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 10.0), rho(0.01, 0.99);
  double l1_gap = 0.0, swap_gap = 0.0;
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd a(64), b(64);
    for (Eigen::Index j = 0; j < 64; ++j) {
      a(j) = u(rng);
      b(j) = u(rng);
    }
    const double dv = 0.01 + u(rng) / 10.0;
    l1_gap = std::max(l1_gap, std::abs(iql(a, b, 0.5, dv) - (a - b).cwiseAbs().sum() * dv));
    const double r = rho(rng);
    swap_gap = std::max(swap_gap, std::abs(iql(a, b, r, dv) - iql(b, a, 1.0 - r, dv)));
  }
  append(o, l1_gap <= 1e-12, fmt("IQL.50 vs l1 gap %.1e", l1_gap));
  append(o, swap_gap <= 1e-12, fmt("swap symmetry gap %.1e over 100 pairs", swap_gap));
  return o;
}

// 10. Byte-identical results apart from timing.
Outcome determinism() {
  Outcome o;
  const std::string fit_cfg = "dataset = synthetic:1\nseed = 11\nreplicates = 3\n";
  const bool fit_same = cli::dump_without_timing(cli::cmd_fit(cli::parse_config(fit_cfg))) ==
                        cli::dump_without_timing(cli::cmd_fit(cli::parse_config(fit_cfg)));
  append(o, fit_same, "fit");
  const std::string bo_cfg = "dataset = synthetic:bump\nseed = 11\nbudget = 10\nacquisition = cpd\n";
  const bool bo_same = cli::dump_without_timing(cli::cmd_bo(cli::parse_config(bo_cfg))) ==
                       cli::dump_without_timing(cli::cmd_bo(cli::parse_config(bo_cfg)));
  append(o, bo_same, "bo");
  return o;
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {"synthetic benchmark reproduction", benchmark_reproduction},
      {"oracle equivalence", oracle_equivalence},
      {"gradient and Hessian checks", derivative_checks},
      {"Nystrom properties", nystrom_properties},
      {"probability laws", probability_laws},
      {"thinning correctness", thinning_correctness},
      {"BO behavior", bo_behavior},
      {"CPD behavior", cpd_behavior},
      {"metric identities", metric_identities},
      {"determinism", determinism},
  };

  bool ok = true;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = all[i].run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %zu (%s): %s [%.1fs]\n", out.pass ? "PASS" : "FAIL", i + 1, all[i].name,
                out.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
    ok = ok && out.pass;
  }
  return ok ? 0 : 1;
}
