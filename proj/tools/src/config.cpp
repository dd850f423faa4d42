#include "coxbo_cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "coxbo/error.hpp"

namespace coxbo::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && end == s.data() + s.size(), ErrorCategory::kParse,
          "key '" + key + "': '" + s + "' is not a number");
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && end == s.data() + s.size(), ErrorCategory::kParse,
          "key '" + key + "': '" + s + "' is not a non-negative integer");
  return v;
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  fail(ErrorCategory::kParse, "key '" + key + "': expected true or false");
}

std::vector<double> to_doubles(const std::string& key, const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(to_double(key, item));
  return out;
}

std::vector<std::vector<double>> to_points(const std::string& key, const std::string& s) {
  std::vector<std::vector<double>> out;
  for (const auto& item : split(s, ';')) {
    if (!item.empty()) out.push_back(to_doubles(key, item));
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"dataset", [](auto& c, auto&, auto& v) { c.dataset = v; }},
      {"truth", [](auto& c, auto&, auto& v) { c.truth = v; }},
      {"estimate", [](auto& c, auto&, auto& v) { c.estimate = v; }},
      {"curve_csv", [](auto& c, auto&, auto& v) { c.curve_csv = v; }},
      {"lower", [](auto& c, auto& k, auto& v) { c.lower = to_doubles(k, v); }},
      {"upper", [](auto& c, auto& k, auto& v) { c.upper = to_doubles(k, v); }},
      {"bump_center", [](auto& c, auto& k, auto& v) { c.bump.center = to_doubles(k, v); }},
      {"bump_width", [](auto& c, auto& k, auto& v) { c.bump.width = to_double(k, v); }},
      {"bump_height", [](auto& c, auto& k, auto& v) { c.bump.height = to_double(k, v); }},
      {"bump_base", [](auto& c, auto& k, auto& v) { c.bump.base = to_double(k, v); }},
      {"grid_points",
       [](auto& c, auto& k, auto& v) {
         c.grid_points.clear();
         for (const auto& item : split(v, ',')) c.grid_points.push_back(to_uint(k, item));
       }},
      {"kernel_variance", [](auto& c, auto& k, auto& v) { c.kernel_variance = to_double(k, v); }},
      {"lengthscale", [](auto& c, auto& k, auto& v) { c.lengthscale = to_doubles(k, v); }},
      {"link", [](auto& c, auto&, auto& v) { c.link = v; }},
      {"gamma", [](auto& c, auto& k, auto& v) { c.fit.gamma = to_double(k, v); }},
      {"learning_rate", [](auto& c, auto& k, auto& v) { c.fit.learning_rate = to_double(k, v); }},
      {"max_iters", [](auto& c, auto& k, auto& v) { c.fit.max_iters = to_uint(k, v); }},
      {"grad_tolerance", [](auto& c, auto& k, auto& v) { c.fit.grad_tolerance = to_double(k, v); }},
      {"floor", [](auto& c, auto& k, auto& v) { c.fit.floor = to_double(k, v); }},
      {"random_init", [](auto& c, auto& k, auto& v) { c.fit.random_init = to_bool(k, v); }},
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = to_uint(k, v); }},
      {"replicates", [](auto& c, auto& k, auto& v) { c.replicates = to_uint(k, v); }},
      {"budget", [](auto& c, auto& k, auto& v) { c.budget = to_uint(k, v); }},
      {"radius", [](auto& c, auto& k, auto& v) { c.radius = to_double(k, v); }},
      {"initial_centers", [](auto& c, auto& k, auto& v) { c.initial_centers = to_points(k, v); }},
      {"candidate_centers", [](auto& c, auto& k, auto& v) { c.candidate_centers = to_points(k, v); }},
      {"acquisition",
       [](auto& c, auto&, auto& v) { c.acquisition.kind = AcquisitionSpec::kind_from_name(v); }},
      {"omega", [](auto& c, auto& k, auto& v) { c.acquisition.omega = to_double(k, v); }},
      {"epsilon", [](auto& c, auto& k, auto& v) { c.acquisition.epsilon = to_uint(k, v); }},
      {"xi", [](auto& c, auto& k, auto& v) { c.acquisition.xi = to_uint(k, v); }},
      {"hazard", [](auto& c, auto& k, auto& v) { c.acquisition.hazard_rate = to_double(k, v); }},
      {"quadrature_points", [](auto& c, auto& k, auto& v) { c.acquisition.quadrature_points = to_uint(k, v); }},
  };
  return table;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCategory::kParse,
            "config line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    require(it != setters().end(), ErrorCategory::kInput,
            "config line " + std::to_string(number) + ": unknown key '" + key + "'");
    require(!cfg.raw.contains(key), ErrorCategory::kInput,
            "config line " + std::to_string(number) + ": duplicate key '" + key + "'");
    try {
      it->second(cfg, key, value);
    } catch (const Error& e) {
      throw Error(e.category(), "config line " + std::to_string(number) + ": " + e.what());
    }
    cfg.raw[key] = value;
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

IntensityFunction ExperimentConfig::intensity(const std::string& name) const {
  if (name == "1" || name == "2" || name == "3") return synthetic_intensity_function(name[0] - '0');
  require(name == "bump", ErrorCategory::kInput, "unknown synthetic intensity '" + name + "'");
  require(!lower.empty(), ErrorCategory::kInput, "bump intensity needs a domain");
  return bump_intensity(bump, lower, upper);
}

void ExperimentConfig::finalize() {
  if (synthetic() && !truth) truth = synthetic_name();
  const bool named = truth && *truth != "bump";
  if (lower.empty() && upper.empty()) {
    if (named) {
      const auto f = intensity(*truth);
      lower = f.lower;
      upper = f.upper;
    } else if (synthetic()) {
      lower = {0.0};
      upper = {100.0};
    }
  }
  require(!lower.empty() && lower.size() == upper.size(), ErrorCategory::kInput,
          "lower and upper must be given with equal lengths");
  const std::size_t d = lower.size();
  for (std::size_t k = 0; k < d; ++k) {
    require(lower[k] < upper[k], ErrorCategory::kInput, "domain needs lower < upper");
  }
  if (bump.center.empty()) {
    for (std::size_t k = 0; k < d; ++k) bump.center.push_back(lower[k] + 0.71 * (upper[k] - lower[k]));
  }
  if (grid_points.size() == 1) grid_points.assign(d, grid_points[0]);
  require(grid_points.size() == d, ErrorCategory::kInput, "grid_points must have one entry or one per dimension");
  if (lengthscale.size() == 1) lengthscale.assign(d, lengthscale[0]);
  require(lengthscale.empty() || lengthscale.size() == d, ErrorCategory::kInput,
          "lengthscale must have one entry or one per dimension");
  require(replicates >= 1, ErrorCategory::kInput, "replicates must be at least 1");
  require(std::isfinite(radius) && radius > 0.0, ErrorCategory::kInput, "radius must be positive");
  for (const auto& c : initial_centers) {
    require(c.size() == d, ErrorCategory::kInput, "initial center dimension mismatch");
  }
  for (const auto& c : candidate_centers) {
    require(c.size() == d, ErrorCategory::kInput, "candidate center dimension mismatch");
  }
  fit.validate();
  acquisition.validate();
  (void)make_link();
  (void)make_grid();
  (void)make_kernel();
}

Grid ExperimentConfig::make_grid() const { return Grid(lower, upper, grid_points); }

KernelSpec ExperimentConfig::make_kernel() const {
  if (lengthscale.empty()) {
    const KernelSpec base = KernelSpec::default_for(lower, upper);
    return KernelSpec(kernel_variance, base.lengthscales());
  }
  return KernelSpec(kernel_variance, lengthscale);
}

}  // namespace coxbo::cli
