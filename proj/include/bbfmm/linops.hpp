#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include <Eigen/Core>

#include "bbfmm/engine.hpp"
#include "bbfmm/kernel.hpp"

namespace bbfmm {

/// Block operator x (n x m) -> A x (n x m).
using MatVec = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

struct RandEigOptions {
  int rank = 10;              ///< k, eigenpairs returned
  int oversample = 10;        ///< q, extra sample columns
  int power_iterations = 1;   ///< subspace iterations, 0..3
  std::uint64_t seed = 20240601;
};

struct EigenResult {
  Eigen::VectorXd eigenvalues;   ///< k values, descending
  Eigen::MatrixXd eigenvectors;  ///< n x k, orthonormal columns
  bool symmetrized = false;      ///< projected matrix was asymmetric beyond 1e-6 relative
  double asymmetry = 0.0;        ///< ||B - B^T||_F / ||B||_F of the projected matrix
  Eigen::Index matvec_columns = 0;
};

/// Truncated eigendecomposition of a symmetric operator by randomized range
/// finding: Gaussian sample Y = A Omega (seeded), orthonormal basis Q of Y
/// refined by `power_iterations` passes Q <- orth(A Q), projection
/// B = Q^T A Q, then the dense symmetric eigenproblem of B. Uses
/// (2 + power_iterations)(k + q) operator columns.
EigenResult randomized_eig(const MatVec& matvec, Eigen::Index n, const RandEigOptions& options);

/// FMM matvec on one point set (sources = targets = points). `fmm` and
/// `points` must outlive the returned operator.
MatVec fmm_operator(Fmm& fmm, std::span<const Point3> points);

/// Exact matvec that regenerates kernel rows in blocks (no N x N storage).
MatVec dense_operator(const KernelSpec& kernel, std::span<const Point3> points);

/// The full kernel matrix K(x_i, x_j).
Eigen::MatrixXd kernel_matrix(const KernelSpec& kernel, std::span<const Point3> points);

/// Top-k eigenpairs of the full kernel matrix by a dense symmetric solver.
EigenResult dense_eig(const KernelSpec& kernel, std::span<const Point3> points, int k);

}  // namespace bbfmm
