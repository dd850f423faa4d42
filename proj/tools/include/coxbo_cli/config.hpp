#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coxbo/acquisition.hpp"
#include "coxbo/bo.hpp"
#include "coxbo/inference.hpp"
#include "coxbo/kernels.hpp"
#include "coxbo/link.hpp"
#include "coxbo/pointprocess.hpp"

namespace coxbo::cli {

/// Everything a subcommand needs, parsed from a flat `key = value` file.
/// Lists use ',' between coordinates and ';' between points.
struct ExperimentConfig {
  // data
  std::string dataset;  // CSV path, or synthetic:1|2|3|bump
  std::optional<std::string> truth;
  std::string estimate;  // curve CSV for the metrics command
  std::string curve_csv;
  std::vector<double> lower;
  std::vector<double> upper;
  BumpSpec bump;

  // model
  std::vector<std::size_t> grid_points{100};
  double kernel_variance = 1.0;
  std::vector<double> lengthscale;  // empty: 5% of the extent
  std::string link = "quadratic";
  FitConfig fit;

  // experiment
  std::uint64_t seed = 0;
  std::size_t replicates = 1;

  // bo
  std::size_t budget = 25;
  double radius = 2.0;
  std::vector<std::vector<double>> initial_centers;
  std::vector<std::vector<double>> candidate_centers;
  AcquisitionSpec acquisition;

  /// Keys exactly as they appeared, for echoing.
  std::map<std::string, std::string> raw;

  bool synthetic() const { return dataset.rfind("synthetic:", 0) == 0; }
  std::string synthetic_name() const { return dataset.substr(10); }

  /// Fills domain defaults from the dataset and checks every module invariant.
  void finalize();

  Grid make_grid() const;
  KernelSpec make_kernel() const;
  LinkFunction make_link() const { return LinkFunction::from_name(link); }
  /// Synthetic intensity for `dataset` or `truth`; throws for CSV data.
  IntensityFunction intensity(const std::string& name) const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace coxbo::cli
