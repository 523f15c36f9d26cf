#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bbfmm/point.hpp"

namespace bbfmm {

enum class SchemeKind { Chebyshev, Uniform };

const char* to_string(SchemeKind scheme);

/// Interpolation nodes on [-1, 1]. Chebyshev: roots of T_p, cos(pi(2k-1)/(2p))
/// for k = 1..p (decreasing). Uniform: -1 + 2(k-1)/(p-1) (increasing), {0} for p = 1.
std::vector<double> nodes_1d(SchemeKind scheme, int p);

/// Cardinal weight of node k at x. Chebyshev uses
///   S_p(x, x_k) = 1/p + 2/p * sum_{n=1}^{p-1} T_n(x) T_n(x_k),
/// the uniform scheme the Lagrange basis polynomial of node k. Throws
/// DomainError for |x| > 1 + 1e-12.
double interp_weight(SchemeKind scheme, int p, double x, int k);

/// Tensor-product interpolation on the reference cube [-1, 1]^3 for one scheme
/// and order. Node a = (i, j, k) is stored at a = i p^2 + j p + k (z fastest)
/// and that ordering is shared by P2M, the M2L tables and L2P.
class Interpolator {
 public:
  Interpolator(SchemeKind scheme, int order);

  SchemeKind scheme() const { return scheme_; }
  int order() const { return order_; }
  int size() const { return order_ * order_ * order_; }

  const std::vector<double>& nodes() const { return nodes_; }
  /// Node a of the reference cube.
  Point3 node(int a) const;
  std::vector<Point3> nodes_3d() const;

  /// p cardinal weights at x in [-1, 1].
  void weights_1d(double x, std::span<double> out) const;
  /// p^3 weights w_i(u.x) w_j(u.y) w_k(u.z); `u` is in reference coordinates.
  void weights_3d(const Point3& u, std::span<double> out) const;
  Eigen::VectorXd weights_3d(const Point3& u) const;

  /// p^3 x p^3 matrix T with T(a, b) = w_a(child node b in parent coordinates)
  /// for child octant o (bits x:4, y:2, z:1). M2M applies T, L2L applies T^T.
  const Eigen::MatrixXd& transfer(int octant) const {
    return transfer_[static_cast<std::size_t>(octant)];
  }

 private:
  double weight_unchecked(double x, int k) const;

  SchemeKind scheme_;
  int order_;
  std::vector<double> nodes_;
  Eigen::MatrixXd cheb_at_nodes_;  // (k, n) -> T_n(x_k), Chebyshev only
  std::vector<double> lagrange_denominators_;
  std::array<Eigen::MatrixXd, 8> transfer_;
};

/// Reference-cube coordinates of `p` in the cell (center, half_width).
inline Point3 to_reference(const Point3& p, const Point3& center, double half_width) {
  const double inv = 1.0 / half_width;
  return {(p.x - center.x) * inv, (p.y - center.y) * inv, (p.z - center.z) * inv};
}

/// The child-transfer matrix for one octant (a fresh copy of
/// Interpolator::transfer).
Eigen::MatrixXd child_transfer(SchemeKind scheme, int p, int octant);

}  // namespace bbfmm
