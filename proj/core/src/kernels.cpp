#include "coxbo/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "coxbo/error.hpp"

namespace coxbo {

KernelSpec::KernelSpec(double variance, std::vector<double> lengthscales)
    : variance_(variance), lengthscales_(std::move(lengthscales)) {
  require(std::isfinite(variance_) && variance_ > 0.0, ErrorCategory::kInput, "kernel variance must be positive");
  require(!lengthscales_.empty(), ErrorCategory::kInput, "kernel needs at least one lengthscale");
  for (double l : lengthscales_) {
    require(std::isfinite(l) && l > 0.0, ErrorCategory::kInput, "kernel lengthscales must be positive");
  }
}

KernelSpec KernelSpec::default_for(std::span<const double> lower, std::span<const double> upper) {
  require(lower.size() == upper.size() && !lower.empty(), ErrorCategory::kInput, "domain bounds dimension mismatch");
  std::vector<double> ls(lower.size());
  for (std::size_t k = 0; k < lower.size(); ++k) ls[k] = 0.05 * (upper[k] - lower[k]);
  return KernelSpec(1.0, std::move(ls));
}

Grid::Grid(std::vector<double> lower, std::vector<double> upper, std::vector<std::size_t> points_per_dim)
    : lower_(std::move(lower)), upper_(std::move(upper)), points_per_dim_(std::move(points_per_dim)) {
  const std::size_t d = lower_.size();
  require(d > 0 && upper_.size() == d && points_per_dim_.size() == d, ErrorCategory::kInput,
          "grid bounds and resolution must share one dimension");
  std::size_t m = 1;
  cell_volume_ = 1.0;
  for (std::size_t k = 0; k < d; ++k) {
    require(std::isfinite(lower_[k]) && std::isfinite(upper_[k]) && lower_[k] < upper_[k], ErrorCategory::kInput,
            "grid needs lower < upper in every dimension");
    require(points_per_dim_[k] > 0, ErrorCategory::kInput, "grid needs at least one point per dimension");
    m *= points_per_dim_[k];
    cell_volume_ *= cell_width(k);
  }

  points_.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  for (std::size_t flat = 0; flat < m; ++flat) {
    const auto multi = multi_index(flat);
    for (std::size_t k = 0; k < d; ++k) {
      points_(static_cast<Eigen::Index>(flat), static_cast<Eigen::Index>(k)) =
          lower_[k] + (static_cast<double>(multi[k]) + 0.5) * cell_width(k);
    }
  }
}

double Grid::domain_volume() const noexcept {
  double v = 1.0;
  for (std::size_t k = 0; k < dim(); ++k) v *= upper_[k] - lower_[k];
  return v;
}

Eigen::VectorXd Grid::axis(std::size_t k) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(points_per_dim_[k]));
  for (std::size_t i = 0; i < points_per_dim_[k]; ++i) {
    out(static_cast<Eigen::Index>(i)) = lower_[k] + (static_cast<double>(i) + 0.5) * cell_width(k);
  }
  return out;
}

bool Grid::contains(std::span<const double> t) const noexcept {
  if (t.size() != dim()) return false;
  for (std::size_t k = 0; k < dim(); ++k) {
    if (!(t[k] >= lower_[k] && t[k] <= upper_[k])) return false;
  }
  return true;
}

std::size_t Grid::cell_of(std::span<const double> t) const {
  require(contains(t), ErrorCategory::kInput, "point lies outside the grid domain");
  std::vector<std::size_t> multi(dim());
  for (std::size_t k = 0; k < dim(); ++k) {
    const double pos = (t[k] - lower_[k]) / cell_width(k);
    auto idx = static_cast<std::size_t>(std::floor(pos));
    multi[k] = std::min(idx, points_per_dim_[k] - 1);
  }
  return flat_index(multi);
}

std::size_t Grid::flat_index(std::span<const std::size_t> multi) const {
  std::size_t flat = 0;
  for (std::size_t k = 0; k < dim(); ++k) flat = flat * points_per_dim_[k] + multi[k];
  return flat;
}

std::vector<std::size_t> Grid::multi_index(std::size_t flat) const {
  std::vector<std::size_t> multi(dim());
  for (std::size_t k = dim(); k-- > 0;) {
    multi[k] = flat % points_per_dim_[k];
    flat /= points_per_dim_[k];
  }
  return multi;
}

double kernel_eval(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                   const KernelSpec& spec) {
  const auto d = static_cast<Eigen::Index>(spec.dim());
  require(a.size() == d && b.size() == d, ErrorCategory::kInput, "kernel_eval: dimension mismatch");
  double r2 = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double z = (a(k) - b(k)) / spec.lengthscales()[static_cast<std::size_t>(k)];
    r2 += z * z;
  }
  return spec.variance() * std::exp(-0.5 * r2);
}

Eigen::MatrixXd gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const KernelSpec& spec) {
  const auto d = static_cast<Eigen::Index>(spec.dim());
  require(a.cols() == d && b.cols() == d, ErrorCategory::kInput, "gram: dimension mismatch");

  // Pre-scale by lengthscale so the inner loop is a plain squared distance.
  Eigen::RowVectorXd inv_ls(d);
  for (Eigen::Index k = 0; k < d; ++k) inv_ls(k) = 1.0 / spec.lengthscales()[static_cast<std::size_t>(k)];
  const Eigen::MatrixXd as = a.array().rowwise() * inv_ls.array();
  const Eigen::MatrixXd bs = b.array().rowwise() * inv_ls.array();

  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      double r2 = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double z = as(i, k) - bs(j, k);
        r2 += z * z;
      }
      out(i, j) = spec.variance() * std::exp(-0.5 * r2);
    }
  }
  return out;
}

namespace {

GridEigensystem sorted_system(const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors, double tolerance) {
  const auto m = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return values(x) > values(y); });

  GridEigensystem sys;
  sys.eigenvalues.resize(m);
  sys.eigenvectors.resize(vectors.rows(), m);
  for (Eigen::Index i = 0; i < m; ++i) {
    sys.eigenvalues(i) = values(order[static_cast<std::size_t>(i)]);
    sys.eigenvectors.col(i) = vectors.col(order[static_cast<std::size_t>(i)]);
  }

  const double top = m > 0 ? sys.eigenvalues(0) : 0.0;
  require(top > 0.0, ErrorCategory::kDegenerateKernel, "grid Gram matrix has no positive eigenvalue");
  const double cut = tolerance * top;
  std::size_t rank = 0;
  while (rank < static_cast<std::size_t>(m) && sys.eigenvalues(static_cast<Eigen::Index>(rank)) >= cut &&
         sys.eigenvalues(static_cast<Eigen::Index>(rank)) > 0.0) {
    ++rank;
  }
  require(rank > 0, ErrorCategory::kDegenerateKernel, "all grid eigenvalues fall below tolerance");
  sys.rank = rank;
  return sys;
}

}  // namespace

GridEigensystem eigendecompose_grid(const Eigen::MatrixXd& k_xx, double tolerance) {
  require(k_xx.rows() == k_xx.cols() && k_xx.rows() > 0, ErrorCategory::kInput,
          "eigendecompose_grid: matrix must be square and non-empty");
  const double asym = (k_xx - k_xx.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-10 * std::max(1.0, k_xx.cwiseAbs().maxCoeff()), ErrorCategory::kInput,
          "eigendecompose_grid: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(k_xx);
  require(solver.info() == Eigen::Success, ErrorCategory::kNumeric, "eigendecompose_grid: eigensolver failed");
  return sorted_system(solver.eigenvalues(), solver.eigenvectors(), tolerance);
}

GridEigensystem eigendecompose_separable(const Grid& grid, const KernelSpec& spec, double jitter, double tolerance) {
  require(spec.dim() == grid.dim(), ErrorCategory::kInput, "kernel and grid dimensions differ");
  Eigen::VectorXd values = Eigen::VectorXd::Ones(1);
  Eigen::MatrixXd vectors = Eigen::MatrixXd::Ones(1, 1);
  for (std::size_t k = 0; k < grid.dim(); ++k) {
    // Full variance on the first axis, unit variance on the rest.
    KernelSpec axis_spec(k == 0 ? spec.variance() : 1.0, {spec.lengthscales()[k]});
    const Eigen::VectorXd axis = grid.axis(k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram(axis, axis, axis_spec));
    require(solver.info() == Eigen::Success, ErrorCategory::kNumeric, "per-axis eigensolver failed");
    const Eigen::VectorXd& lv = solver.eigenvalues();
    const Eigen::MatrixXd& lu = solver.eigenvectors();

    Eigen::VectorXd next_values(values.size() * lv.size());
    Eigen::MatrixXd next_vectors(vectors.rows() * lu.rows(), vectors.cols() * lu.cols());
    for (Eigen::Index a = 0; a < values.size(); ++a) {
      for (Eigen::Index b = 0; b < lv.size(); ++b) {
        const Eigen::Index col = a * lv.size() + b;
        next_values(col) = values(a) * lv(b);
        for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
          next_vectors.col(col).segment(r * lu.rows(), lu.rows()) = vectors(r, a) * lu.col(b);
        }
      }
    }
    values = std::move(next_values);
    vectors = std::move(next_vectors);
  }
  values.array() += jitter;
  return sorted_system(values, vectors, tolerance);
}

TransformedKernelModel::TransformedKernelModel(KernelSpec kernel, Grid grid, double gamma, ModelOptions options)
    : kernel_(std::move(kernel)), grid_(std::move(grid)), gamma_(gamma) {
  require(std::isfinite(gamma_) && gamma_ > 0.0, ErrorCategory::kInput, "gamma must be positive");
  require(kernel_.dim() == grid_.dim(), ErrorCategory::kInput, "kernel and grid dimensions differ");
  jitter_ = options.jitter_scale * kernel_.variance();
  eigensystem_ = eigendecompose_separable(grid_, kernel_, jitter_, options.drop_tolerance);

  // K_xx without jitter satisfies K_xx U = U (Lambda - jitter).
  const auto r = static_cast<Eigen::Index>(eigensystem_.rank);
  grid_projection_ = eigensystem_.eigenvectors.leftCols(r) *
                     (eigensystem_.eigenvalues.head(r).array() - jitter_).matrix().asDiagonal();
  finish_construction();
}

TransformedKernelModel::TransformedKernelModel(KernelSpec kernel, Grid grid, GridEigensystem eigensystem, double gamma)
    : kernel_(std::move(kernel)), grid_(std::move(grid)), eigensystem_(std::move(eigensystem)), gamma_(gamma) {
  require(std::isfinite(gamma_) && gamma_ > 0.0, ErrorCategory::kInput, "gamma must be positive");
  require(kernel_.dim() == grid_.dim(), ErrorCategory::kInput, "kernel and grid dimensions differ");
  require(eigensystem_.eigenvectors.rows() == static_cast<Eigen::Index>(grid_.size()), ErrorCategory::kInput,
          "eigensystem does not match the grid size");
  require(eigensystem_.rank > 0, ErrorCategory::kDegenerateKernel, "eigensystem has zero retained rank");
  grid_projection_ = project(grid_.points());
  finish_construction();
}

void TransformedKernelModel::finish_construction() {
  const auto r = static_cast<Eigen::Index>(eigensystem_.rank);
  const double dv = grid_.cell_volume();
  const Eigen::ArrayXd lam = eigensystem_.eigenvalues.head(r).array();
  transformed_weights_ = (dv * lam.square() + gamma_ * lam).inverse().matrix();
}

TransformedKernelModel TransformedKernelModel::with_gamma(double gamma) const {
  require(std::isfinite(gamma) && gamma > 0.0, ErrorCategory::kInput, "gamma must be positive");
  TransformedKernelModel copy = *this;
  copy.gamma_ = gamma;
  copy.finish_construction();
  return copy;
}

double TransformedKernelModel::eigenvalue_estimate(std::size_t i) const {
  require(i < rank(), ErrorCategory::kIndex, "eigen index " + std::to_string(i) + " beyond retained rank");
  return eigensystem_.eigenvalues(static_cast<Eigen::Index>(i)) * grid_.cell_volume();
}

double TransformedKernelModel::shrinkage(std::size_t i) const {
  const double eta = eigenvalue_estimate(i);
  return eta / (eta + gamma_);
}

Eigen::MatrixXd TransformedKernelModel::project(const Eigen::MatrixXd& points) const {
  const auto r = static_cast<Eigen::Index>(eigensystem_.rank);
  return gram(points, grid_.points(), kernel_) * eigensystem_.eigenvectors.leftCols(r);
}

double nystrom_eigenfunction(const Eigen::Ref<const Eigen::VectorXd>& t, std::size_t i,
                             const TransformedKernelModel& model) {
  require(i < model.rank(), ErrorCategory::kIndex,
          "eigenfunction index " + std::to_string(i) + " beyond retained rank " + std::to_string(model.rank()));
  require(t.size() == static_cast<Eigen::Index>(model.grid().dim()), ErrorCategory::kInput,
          "nystrom_eigenfunction: dimension mismatch");
  const Eigen::MatrixXd row = gram(t.transpose(), model.grid().points(), model.kernel());
  const auto col = static_cast<Eigen::Index>(i);
  const double lambda = model.eigensystem().eigenvalues(col);
  const double projected = (row * model.eigensystem().eigenvectors.col(col))(0, 0);
  return projected / (lambda * std::sqrt(model.grid().cell_volume()));
}

Eigen::MatrixXd transformed_gram_projected(const Eigen::MatrixXd& proj_a, const Eigen::MatrixXd& proj_b,
                                           const TransformedKernelModel& model) {
  require(model.rank() > 0, ErrorCategory::kDegenerateKernel, "transformed kernel has zero rank");
  return proj_a * model.transformed_weights().asDiagonal() * proj_b.transpose();
}

Eigen::MatrixXd transformed_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                 const TransformedKernelModel& model) {
  const Eigen::MatrixXd pa = model.project(a);
  if (a.rows() == b.rows() && a.cols() == b.cols() && a == b) {
    Eigen::MatrixXd out = transformed_gram_projected(pa, pa, model);
    return 0.5 * (out + out.transpose());
  }
  return transformed_gram_projected(pa, model.project(b), model);
}

Eigen::MatrixXd nystrom_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const TransformedKernelModel& model) {
  const auto r = static_cast<Eigen::Index>(model.rank());
  const Eigen::VectorXd inv = model.eigensystem().eigenvalues.head(r).cwiseInverse();
  return model.project(a) * inv.asDiagonal() * model.project(b).transpose();
}

}  // namespace coxbo
