#include "bbfmm/interpolation.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bbfmm/errors.hpp"

namespace bbfmm {

namespace {

constexpr double kDomainSlack = 1e-12;

void check_order(int p) {
  if (p < 1) throw ConfigError("interpolation order must be >= 1, got " + std::to_string(p));
}

void check_domain(double x) {
  if (!(std::abs(x) <= 1.0 + kDomainSlack)) {
    throw DomainError("interpolation coordinate " + std::to_string(x) + " outside [-1, 1]");
  }
}

}  // namespace

const char* to_string(SchemeKind scheme) {
  return scheme == SchemeKind::Chebyshev ? "chebyshev" : "uniform";
}

std::vector<double> nodes_1d(SchemeKind scheme, int p) {
  check_order(p);
  std::vector<double> nodes(static_cast<std::size_t>(p));
  if (scheme == SchemeKind::Chebyshev) {
    for (int k = 1; k <= p; ++k)
      nodes[static_cast<std::size_t>(k - 1)] = std::cos(std::numbers::pi * (2 * k - 1) / (2.0 * p));
  } else if (p == 1) {
    nodes[0] = 0.0;
  } else {
    for (int k = 1; k <= p; ++k)
      nodes[static_cast<std::size_t>(k - 1)] = -1.0 + 2.0 * (k - 1) / (p - 1);
  }
  return nodes;
}

double interp_weight(SchemeKind scheme, int p, double x, int k) {
  check_order(p);
  if (k < 0 || k >= p) throw ConfigError("interpolation node index out of range");
  check_domain(x);
  const std::vector<double> nodes = nodes_1d(scheme, p);
  if (scheme == SchemeKind::Chebyshev) {
    const double xk = nodes[static_cast<std::size_t>(k)];
    double sum = 0.0;
    double t_prev = 1.0, t_cur = x;          // T_{n-1}(x), T_n(x)
    double s_prev = 1.0, s_cur = xk;         // same at the node
    for (int n = 1; n < p; ++n) {
      sum += t_cur * s_cur;
      const double t_next = 2.0 * x * t_cur - t_prev;
      const double s_next = 2.0 * xk * s_cur - s_prev;
      t_prev = t_cur;
      t_cur = t_next;
      s_prev = s_cur;
      s_cur = s_next;
    }
    return 1.0 / p + 2.0 / p * sum;
  }
  double w = 1.0;
  for (int j = 0; j < p; ++j) {
    if (j == k) continue;
    w *= (x - nodes[static_cast<std::size_t>(j)]) /
         (nodes[static_cast<std::size_t>(k)] - nodes[static_cast<std::size_t>(j)]);
  }
  return w;
}

Interpolator::Interpolator(SchemeKind scheme, int order)
    : scheme_(scheme), order_(order), nodes_(nodes_1d(scheme, order)) {
  const int p = order_;
  if (p > 16) throw ConfigError("interpolation order must be <= 16");

  if (scheme_ == SchemeKind::Chebyshev) {
    cheb_at_nodes_.resize(p, p);
    for (int k = 0; k < p; ++k) {
      const double xk = nodes_[static_cast<std::size_t>(k)];
      double t_prev = 1.0, t_cur = xk;
      cheb_at_nodes_(k, 0) = 1.0;
      for (int n = 1; n < p; ++n) {
        cheb_at_nodes_(k, n) = t_cur;
        const double t_next = 2.0 * xk * t_cur - t_prev;
        t_prev = t_cur;
        t_cur = t_next;
      }
    }
  } else {
    lagrange_denominators_.resize(static_cast<std::size_t>(p));
    for (int k = 0; k < p; ++k) {
      double d = 1.0;
      for (int j = 0; j < p; ++j)
        if (j != k) d *= nodes_[static_cast<std::size_t>(k)] - nodes_[static_cast<std::size_t>(j)];
      lagrange_denominators_[static_cast<std::size_t>(k)] = d;
    }
  }

  // Child nodes in parent coordinates: u_child / 2 -/+ 1/2 per axis.
  const int n3 = size();
  for (int octant = 0; octant < 8; ++octant) {
    const double sx = (octant & 4) ? 0.5 : -0.5;
    const double sy = (octant & 2) ? 0.5 : -0.5;
    const double sz = (octant & 1) ? 0.5 : -0.5;
    Eigen::MatrixXd& t = transfer_[static_cast<std::size_t>(octant)];
    t.resize(n3, n3);
    for (int b = 0; b < n3; ++b) {
      const Point3 u = node(b);
      weights_3d({0.5 * u.x + sx, 0.5 * u.y + sy, 0.5 * u.z + sz},
                 std::span<double>(t.col(b).data(), static_cast<std::size_t>(n3)));
    }
  }
}

Point3 Interpolator::node(int a) const {
  const int p = order_;
  return {nodes_[static_cast<std::size_t>(a / (p * p))], nodes_[static_cast<std::size_t>((a / p) % p)],
          nodes_[static_cast<std::size_t>(a % p)]};
}

std::vector<Point3> Interpolator::nodes_3d() const {
  std::vector<Point3> out(static_cast<std::size_t>(size()));
  for (int a = 0; a < size(); ++a) out[static_cast<std::size_t>(a)] = node(a);
  return out;
}

void Interpolator::weights_1d(double x, std::span<double> out) const {
  check_domain(x);
  const int p = order_;
  if (scheme_ == SchemeKind::Chebyshev) {
    // T_n(x) for n < p, then S_p(x, x_k) = 1/p + 2/p sum_n T_n(x) T_n(x_k).
    double tx[16];
    tx[0] = 1.0;
    if (p > 1) tx[1] = x;
    for (int n = 2; n < p; ++n) tx[n] = 2.0 * x * tx[n - 1] - tx[n - 2];
    for (int k = 0; k < p; ++k) {
      double sum = 0.0;
      for (int n = 1; n < p; ++n) sum += tx[n] * cheb_at_nodes_(k, n);
      out[static_cast<std::size_t>(k)] = (1.0 + 2.0 * sum) / p;
    }
    return;
  }
  for (int k = 0; k < p; ++k) {
    double num = 1.0;
    for (int j = 0; j < p; ++j)
      if (j != k) num *= x - nodes_[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(k)] = num / lagrange_denominators_[static_cast<std::size_t>(k)];
  }
}

void Interpolator::weights_3d(const Point3& u, std::span<double> out) const {
  const int p = order_;
  double wx[16], wy[16], wz[16];
  const auto n = static_cast<std::size_t>(p);
  weights_1d(u.x, {wx, n});
  weights_1d(u.y, {wy, n});
  weights_1d(u.z, {wz, n});
  std::size_t a = 0;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      const double wij = wx[i] * wy[j];
      for (int k = 0; k < p; ++k) out[a++] = wij * wz[k];
    }
}

Eigen::VectorXd Interpolator::weights_3d(const Point3& u) const {
  Eigen::VectorXd w(size());
  weights_3d(u, std::span<double>(w.data(), static_cast<std::size_t>(size())));
  return w;
}

Eigen::MatrixXd child_transfer(SchemeKind scheme, int p, int octant) {
  if (octant < 0 || octant > 7) throw ConfigError("octant must be in 0..7");
  return Interpolator(scheme, p).transfer(octant);
}

}  // namespace bbfmm
