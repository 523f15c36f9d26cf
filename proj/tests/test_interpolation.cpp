#include <cmath>

#include <gtest/gtest.h>

#include "bbfmm/errors.hpp"
#include "bbfmm/interpolation.hpp"
#include "oracles.hpp"

using namespace bbfmm;

namespace {

constexpr SchemeKind kSchemes[] = {SchemeKind::Chebyshev, SchemeKind::Uniform};

std::vector<double> ref_nodes(SchemeKind s, int p) {
  return s == SchemeKind::Chebyshev ? oracle::cheb_nodes(p) : oracle::uniform_nodes(p);
}

}  // namespace

TEST(Nodes, ClosedForms) {
  const auto c2 = nodes_1d(SchemeKind::Chebyshev, 2);
  EXPECT_NEAR(c2[0], std::sqrt(2.0) / 2, 1e-15);
  EXPECT_NEAR(c2[1], -std::sqrt(2.0) / 2, 1e-15);
  const auto c3 = nodes_1d(SchemeKind::Chebyshev, 3);
  EXPECT_NEAR(c3[0], std::sqrt(3.0) / 2, 1e-15);
  EXPECT_NEAR(c3[1], 0.0, 1e-15);
  EXPECT_NEAR(c3[2], -std::sqrt(3.0) / 2, 1e-15);
  EXPECT_EQ(nodes_1d(SchemeKind::Uniform, 3), (std::vector<double>{-1.0, 0.0, 1.0}));
  EXPECT_EQ(nodes_1d(SchemeKind::Uniform, 1), (std::vector<double>{0.0}));
  EXPECT_THROW(nodes_1d(SchemeKind::Chebyshev, 0), ConfigError);
}

TEST(Nodes, MonotoneAndBounded) {
  for (SchemeKind s : kSchemes)
    for (int p = 2; p <= 12; ++p) {
      const auto x = nodes_1d(s, p);
      for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_LE(std::abs(x[i]), 1.0);
        if (i > 0) EXPECT_TRUE(s == SchemeKind::Chebyshev ? x[i] < x[i - 1] : x[i] > x[i - 1]);
      }
    }
}

TEST(Weights, Cardinality) {
  for (SchemeKind s : kSchemes)
    for (int p = 1; p <= 10; ++p) {
      const auto x = nodes_1d(s, p);
      for (int j = 0; j < p; ++j)
        for (int k = 0; k < p; ++k)
          EXPECT_NEAR(interp_weight(s, p, x[static_cast<std::size_t>(j)], k), j == k ? 1.0 : 0.0, 1e-14)
              << to_string(s) << " p=" << p;
    }
}

TEST(Weights, ChebyshevClosedFormValue) {
  // Node index 1 of p = 3 is x = 0.
  EXPECT_NEAR(interp_weight(SchemeKind::Chebyshev, 3, 0.5, 1), 2.0 / 3.0, 1e-15);
}

TEST(Weights, OutsideReferenceIntervalThrows) {
  EXPECT_THROW(interp_weight(SchemeKind::Uniform, 3, 1.1, 0), DomainError);
  EXPECT_THROW(interp_weight(SchemeKind::Chebyshev, 3, -1.0 - 1e-9, 0), DomainError);
  EXPECT_NO_THROW(interp_weight(SchemeKind::Chebyshev, 3, 1.0 + 1e-13, 0));
}

TEST(Weights, ThreeDimensionalIsTensorProduct) {
  for (SchemeKind s : kSchemes) {
    const Interpolator ip(s, 4);
    const Point3 u{0.3, -0.7, 0.9};
    const Eigen::VectorXd w = ip.weights_3d(u);
    int a = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k, ++a)
          EXPECT_NEAR(w(a), interp_weight(s, 4, u.x, i) * interp_weight(s, 4, u.y, j) * interp_weight(s, 4, u.z, k), 1e-15);
    EXPECT_NEAR(w.sum(), 1.0, 1e-10);
  }
}

TEST(Weights, NodeGivesUnitVector) {
  for (SchemeKind s : kSchemes) {
    const Interpolator ip(s, 3);
    for (int a = 0; a < ip.size(); ++a) {
      const Eigen::VectorXd w = ip.weights_3d(ip.node(a));
      for (int b = 0; b < ip.size(); ++b) EXPECT_NEAR(w(b), a == b ? 1.0 : 0.0, 1e-14);
    }
  }
  EXPECT_DOUBLE_EQ(Interpolator(SchemeKind::Chebyshev, 1).weights_3d({0.2, 0.4, -0.1})(0), 1.0);
}

TEST(Weights, NodeOrderingIsZFastest) {
  const Interpolator ip(SchemeKind::Uniform, 3);
  const auto g = oracle::grid(oracle::uniform_nodes(3));
  for (int a = 0; a < ip.size(); ++a) EXPECT_EQ(ip.node(a), g[static_cast<std::size_t>(a)]);
}

TEST(Weights, PolynomialReproduction) {
  const auto pts = oracle::random_points(20, 5, -1, 1);
  for (SchemeKind s : kSchemes) {
    const Interpolator ip(s, 4);
    auto f = [](const Point3& p) { return p.x * p.x + p.y * p.y; };
    auto g = [](const Point3& p) { return p.x * p.x * p.x * p.y * p.z * p.z - 2 * p.y * p.y * p.y + 0.5; };
    Eigen::VectorXd fv(ip.size()), gv(ip.size());
    for (int a = 0; a < ip.size(); ++a) {
      fv(a) = f(ip.node(a));
      gv(a) = g(ip.node(a));
    }
    for (const Point3& u : pts) {
      const Eigen::VectorXd w = ip.weights_3d(u);
      EXPECT_NEAR(w.dot(fv), f(u), 1e-12);
      EXPECT_NEAR(w.dot(gv), g(u), 1e-11);
    }
  }
}

TEST(Transfer, OrderOneIsIdentity) {
  for (SchemeKind s : kSchemes)
    for (int o = 0; o < 8; ++o) {
      const Eigen::MatrixXd t = child_transfer(s, 1, o);
      ASSERT_EQ(t.rows(), 1);
      EXPECT_DOUBLE_EQ(t(0, 0), 1.0);
    }
}

TEST(Transfer, EntriesAreParentWeightsAtChildNodes) {
  for (SchemeKind s : kSchemes) {
    const int p = 3;
    const auto x = ref_nodes(s, p);
    const auto g = oracle::grid(x);
    for (int o = 0; o < 8; ++o) {
      const Eigen::MatrixXd t = child_transfer(s, p, o);
      const Point3 shift{(o & 4) ? 0.5 : -0.5, (o & 2) ? 0.5 : -0.5, (o & 1) ? 0.5 : -0.5};
      for (int b = 0; b < 27; ++b) {
        const Point3 cb = shift + 0.5 * g[static_cast<std::size_t>(b)];
        for (int a = 0; a < 27; ++a) {
          const int i = a / (p * p), j = (a / p) % p, k = a % p;
          const double w = interp_weight(s, p, cb.x, i) * interp_weight(s, p, cb.y, j) *
                           interp_weight(s, p, cb.z, k);
          EXPECT_NEAR(t(a, b), w, 1e-14);
        }
      }
    }
  }
}

TEST(Transfer, UniformColumnsSumToOne) {
  for (int p = 1; p <= 6; ++p)
    for (int o = 0; o < 8; ++o) {
      const Eigen::MatrixXd t = child_transfer(SchemeKind::Uniform, p, o);
      EXPECT_LT((t.colwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    }
}

TEST(Transfer, ChebyshevColumnsSumToOne) {
  for (int o = 0; o < 8; ++o) {
    const Eigen::MatrixXd t = child_transfer(SchemeKind::Chebyshev, 5, o);
    EXPECT_LT((t.colwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
  }
}

// T^T maps parent node values of a low-degree polynomial to its values at the
// child nodes, and T preserves its moments.
TEST(Transfer, PolynomialReproductionChebyshevP3) {
  const int p = 3;
  const Interpolator ip(SchemeKind::Chebyshev, p);
  auto f = [](const Point3& u) { return u.x; };
  Eigen::VectorXd parent(ip.size());
  for (int a = 0; a < ip.size(); ++a) parent(a) = f(ip.node(a));
  for (int o = 0; o < 8; ++o) {
    const Point3 shift{(o & 4) ? 0.5 : -0.5, (o & 2) ? 0.5 : -0.5, (o & 1) ? 0.5 : -0.5};
    const Eigen::VectorXd child = child_transfer(SchemeKind::Chebyshev, p, o).transpose() * parent;
    for (int b = 0; b < ip.size(); ++b) EXPECT_NEAR(child(b), f(shift + 0.5 * ip.node(b)), 1e-12);

    // Moments of f are preserved: f(parent nodes) . (T m) = f(child nodes) . m.
    const Eigen::VectorXd m = oracle::random_matrix(ip.size(), 1, 40 + o);
    Eigen::VectorXd fc(ip.size());
    for (int b = 0; b < ip.size(); ++b) fc(b) = f(shift + 0.5 * ip.node(b));
    const Eigen::VectorXd pushed = child_transfer(SchemeKind::Chebyshev, p, o) * m;
    EXPECT_NEAR(parent.dot(pushed), fc.dot(m), 1e-12);
  }
}

TEST(Interpolator, RejectsBadOrder) {
  EXPECT_THROW(Interpolator(SchemeKind::Chebyshev, 0), ConfigError);
  EXPECT_THROW(Interpolator(SchemeKind::Uniform, 17), ConfigError);
  EXPECT_THROW(child_transfer(SchemeKind::Uniform, 3, 8), ConfigError);
}
