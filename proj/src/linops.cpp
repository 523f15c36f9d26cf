#include "bbfmm/linops.hpp"

#include <iostream>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "bbfmm/errors.hpp"
#include "bbfmm/parallel.hpp"

namespace bbfmm {

namespace {

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

Eigen::MatrixXd apply(const MatVec& matvec, const Eigen::MatrixXd& x, Eigen::Index& columns) {
  Eigen::MatrixXd y = matvec(x);
  if (y.rows() != x.rows() || y.cols() != x.cols()) {
    throw InternalError("operator returned a block of the wrong shape");
  }
  columns += x.cols();
  return y;
}

}  // namespace

EigenResult randomized_eig(const MatVec& matvec, Eigen::Index n, const RandEigOptions& options) {
  const Eigen::Index k = options.rank;
  const Eigen::Index l = options.rank + options.oversample;
  if (k < 1) throw ConfigError("rank must be >= 1");
  if (options.oversample < 0) throw ConfigError("oversample must be >= 0");
  if (l > n) {
    std::ostringstream msg;
    msg << "rank + oversample (" << l << ") exceeds the operator size " << n;
    throw ConfigError(msg.str());
  }
  if (options.power_iterations < 0 || options.power_iterations > 3) {
    throw ConfigError("power_iterations must be in 0..3");
  }

  EigenResult result;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd omega(n, l);
  for (Eigen::Index j = 0; j < l; ++j)
    for (Eigen::Index i = 0; i < n; ++i) omega(i, j) = normal(rng);

  Eigen::MatrixXd q = orthonormal_basis(apply(matvec, omega, result.matvec_columns));
  for (int it = 0; it < options.power_iterations; ++it) {
    q = orthonormal_basis(apply(matvec, q, result.matvec_columns));
  }
  Eigen::MatrixXd b = q.transpose() * apply(matvec, q, result.matvec_columns);

  const double norm_b = b.norm();
  result.asymmetry = norm_b > 0.0 ? (b - b.transpose()).norm() / norm_b : 0.0;
  if (result.asymmetry > 1e-6) {
    result.symmetrized = true;
    std::cerr << "warning: projected matrix is not symmetric (relative asymmetry "
              << result.asymmetry << "); using (B + B^T) / 2\n";
  }
  b = 0.5 * (b + b.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  result.eigenvalues = eig.eigenvalues().reverse().head(k);
  result.eigenvectors = q * eig.eigenvectors().rowwise().reverse().leftCols(k);
  return result;
}

MatVec fmm_operator(Fmm& fmm, std::span<const Point3> points) {
  return [&fmm, points](const Eigen::MatrixXd& x) { return fmm.evaluate(points, x); };
}

MatVec dense_operator(const KernelSpec& kernel, std::span<const Point3> points) {
  return [kernel, points](const Eigen::MatrixXd& x) {
    const auto n = static_cast<Eigen::Index>(points.size());
    constexpr Eigen::Index kBlock = 64;
    Eigen::MatrixXd y(n, x.cols());
    const Eigen::Index blocks = (n + kBlock - 1) / kBlock;
    parallel_for(blocks, [&](std::ptrdiff_t bi) {
      const Eigen::Index begin = bi * kBlock;
      const Eigen::Index rows = std::min(kBlock, n - begin);
      Eigen::MatrixXd k(rows, n);
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
          k(i, j) = evaluate(kernel, points[static_cast<std::size_t>(begin + i)],
                             points[static_cast<std::size_t>(j)]);
      y.middleRows(begin, rows).noalias() = k * x;
    });
    return y;
  };
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& kernel, std::span<const Point3> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd k(n, n);
  parallel_for(n, [&](std::ptrdiff_t j) {
    for (Eigen::Index i = 0; i < n; ++i)
      k(i, j) = evaluate(kernel, points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
  });
  return k;
}

EigenResult dense_eig(const KernelSpec& kernel, std::span<const Point3> points, int k) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (k < 1 || k > n) throw ConfigError("dense_eig needs 1 <= k <= n");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(kernel_matrix(kernel, points));
  EigenResult result;
  result.eigenvalues = eig.eigenvalues().reverse().head(k);
  result.eigenvectors = eig.eigenvectors().rowwise().reverse().leftCols(k);
  return result;
}

}  // namespace bbfmm
