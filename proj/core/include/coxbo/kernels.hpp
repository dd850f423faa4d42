#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace coxbo {

/// Squared-exponential (RBF) kernel with per-dimension lengthscales.
class KernelSpec {
 public:
  KernelSpec(double variance, std::vector<double> lengthscales);

  /// variance 1 and lengthscale = 5% of the extent in every dimension.
  static KernelSpec default_for(std::span<const double> lower, std::span<const double> upper);

  double variance() const noexcept { return variance_; }
  const std::vector<double>& lengthscales() const noexcept { return lengthscales_; }
  std::size_t dim() const noexcept { return lengthscales_.size(); }

 private:
  double variance_;
  std::vector<double> lengthscales_;
};

/// Uniform product grid of cell centers. Flattened index order puts dimension 0
/// slowest, which matches Kronecker products taken in dimension order.
class Grid {
 public:
  Grid(std::vector<double> lower, std::vector<double> upper, std::vector<std::size_t> points_per_dim);

  std::size_t dim() const noexcept { return lower_.size(); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(points_.rows()); }
  const std::vector<double>& lower() const noexcept { return lower_; }
  const std::vector<double>& upper() const noexcept { return upper_; }
  const std::vector<std::size_t>& points_per_dim() const noexcept { return points_per_dim_; }
  /// m x d matrix of cell centers.
  const Eigen::MatrixXd& points() const noexcept { return points_; }
  double cell_volume() const noexcept { return cell_volume_; }
  double cell_width(std::size_t k) const { return (upper_[k] - lower_[k]) / static_cast<double>(points_per_dim_[k]); }
  double domain_volume() const noexcept;

  /// Centers along dimension k.
  Eigen::VectorXd axis(std::size_t k) const;

  bool contains(std::span<const double> t) const noexcept;
  /// Flat index of the cell holding `t` (upper boundary belongs to the last cell).
  std::size_t cell_of(std::span<const double> t) const;
  std::size_t flat_index(std::span<const std::size_t> multi) const;
  std::vector<std::size_t> multi_index(std::size_t flat) const;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<std::size_t> points_per_dim_;
  Eigen::MatrixXd points_;
  double cell_volume_ = 0.0;
};

struct GridEigensystem {
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // columns orthonormal
  std::size_t rank = 0;          // leading eigenpairs retained
};

double kernel_eval(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                   const KernelSpec& spec);

/// Row i of `a` against row j of `b`.
Eigen::MatrixXd gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const KernelSpec& spec);

/// Symmetric eigendecomposition sorted descending. Eigenvalues below
/// `tolerance * max` are not retained. Throws on asymmetric input or when
/// nothing survives the cut.
GridEigensystem eigendecompose_grid(const Eigen::MatrixXd& k_xx, double tolerance = 1e-10);

/// Eigensystem of the jittered grid Gram built from per-axis factors. Valid
/// because the RBF kernel is separable over a product grid.
GridEigensystem eigendecompose_separable(const Grid& grid, const KernelSpec& spec, double jitter,
                                         double tolerance = 1e-10);

struct ModelOptions {
  double jitter_scale = 1e-8;     // multiplied by the kernel variance
  double drop_tolerance = 1e-10;  // relative to the largest eigenvalue
};

/// Grid eigensystem plus the penalty gamma. Evaluates the transformed kernel
///
///   k~(t, t') = sum_i eta_i / (eta_i + gamma) phi_i(t) phi_i(t'),
///
/// with Nystrom estimates eta_i = lambda_i * dV and
/// phi_i(t) = k_tx u_i / (lambda_i * sqrt(dV)), dV the cell volume. On a
/// unit-volume domain dV = 1/m. Immutable after construction.
class TransformedKernelModel {
 public:
  TransformedKernelModel(KernelSpec kernel, Grid grid, double gamma, ModelOptions options = {});
  TransformedKernelModel(KernelSpec kernel, Grid grid, GridEigensystem eigensystem, double gamma);

  const KernelSpec& kernel() const noexcept { return kernel_; }
  const Grid& grid() const noexcept { return grid_; }
  const GridEigensystem& eigensystem() const noexcept { return eigensystem_; }
  double gamma() const noexcept { return gamma_; }
  std::size_t rank() const noexcept { return eigensystem_.rank; }

  /// Same eigensystem, different penalty.
  TransformedKernelModel with_gamma(double gamma) const;

  /// eta_i, the Mercer eigenvalue estimate.
  double eigenvalue_estimate(std::size_t i) const;
  /// eta_i / (eta_i + gamma), always in (0, 1).
  double shrinkage(std::size_t i) const;

  /// k_ax U_r for arbitrary points (n x rank).
  Eigen::MatrixXd project(const Eigen::MatrixXd& points) const;
  /// Projection of the grid itself, cached.
  const Eigen::MatrixXd& grid_projection() const noexcept { return grid_projection_; }
  /// 1 / (dV lambda^2 + gamma lambda) over retained eigenpairs.
  const Eigen::VectorXd& transformed_weights() const noexcept { return transformed_weights_; }

 private:
  void finish_construction();

  KernelSpec kernel_;
  Grid grid_;
  GridEigensystem eigensystem_;
  double gamma_;
  double jitter_ = 0.0;
  Eigen::MatrixXd grid_projection_;
  Eigen::VectorXd transformed_weights_;
};

double nystrom_eigenfunction(const Eigen::Ref<const Eigen::VectorXd>& t, std::size_t i,
                             const TransformedKernelModel& model);

/// K_ax U ((dV) L^2 + gamma L)^-1 U^T K_xb over the retained rank.
Eigen::MatrixXd transformed_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                 const TransformedKernelModel& model);

/// Same with precomputed projections (see TransformedKernelModel::project).
Eigen::MatrixXd transformed_gram_projected(const Eigen::MatrixXd& proj_a, const Eigen::MatrixXd& proj_b,
                                           const TransformedKernelModel& model);

/// Plain Nystrom reconstruction K_ax K_xx^-1 K_xb of the base kernel.
Eigen::MatrixXd nystrom_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                             const TransformedKernelModel& model);

}  // namespace coxbo
