#include <cmath>

#include <gtest/gtest.h>

#include "bbfmm/engine.hpp"
#include "bbfmm/errors.hpp"
#include "bbfmm/stages.hpp"
#include "oracles.hpp"

using namespace bbfmm;

namespace {

// Single leaf-level tree over the unit cube with `pts` as sources and targets;
// returns the sorted copies.
struct Fixture {
  Octree tree;
  std::vector<Point3> sorted;
  Eigen::MatrixXd weights;

  Fixture(int levels, const std::vector<Point3>& pts, const Eigen::MatrixXd& w)
      : tree(Point3{0.5, 0.5, 0.5}, 1.0, levels) {
    tree.distribute_points(pts, pts);
    sorted.resize(pts.size());
    weights.resize(w.rows(), w.cols());
    for (std::size_t r = 0; r < pts.size(); ++r) {
      sorted[r] = pts[tree.source_order()[r]];
      weights.row(static_cast<Eigen::Index>(r)) = w.row(static_cast<Eigen::Index>(tree.source_order()[r]));
    }
  }

  Cell& leaf_of(const Point3& p) {
    const auto c = tree.leaf_coords(p);
    return tree.cell(tree.levels(), morton_encode(c[0], c[1], c[2]));
  }
};

Point3 node_in(const Interpolator& ip, const Cell& c, int a) {
  return c.center + c.half_width * ip.node(a);
}

double poly(const Point3& p) { return 1.0 + p.x - 2.0 * p.y * p.z + p.z * p.z; }

}  // namespace

TEST(P2M, EmptyLeafHasNoMultipole) {
  const Interpolator ip(SchemeKind::Chebyshev, 3);
  Fixture s(2, {}, Eigen::MatrixXd(0, 1));
  Cell& leaf = s.tree.leaves()[0];
  p2m(ip, leaf, s.sorted, s.weights);
  EXPECT_EQ(leaf.multipole.size(), 0);  // treated as zero by every pass
}

TEST(P2M, SourceAtNodeGivesUnitVector) {
  for (SchemeKind scheme : {SchemeKind::Chebyshev, SchemeKind::Uniform}) {
    const Interpolator ip(scheme, 3);
    Octree probe({0.5, 0.5, 0.5}, 1.0, 2);
    const Cell& target_leaf = probe.leaves()[13];
    // Uniform nodes with index 0 or p-1 lie on the cell faces.
    const int a = scheme == SchemeKind::Chebyshev ? 17 : 13;
    const std::vector<Point3> pts = {node_in(ip, target_leaf, a)};
    Fixture s(2, pts, Eigen::MatrixXd::Ones(1, 1));
    Cell& leaf = s.leaf_of(pts[0]);
    ASSERT_EQ(leaf.index, target_leaf.index);
    p2m(ip, leaf, s.sorted, s.weights);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(27);
    e(a) = 1.0;
    EXPECT_LT((leaf.multipole.col(0) - e).norm(), 1e-14);
  }
}

TEST(P2M, OppositeChargesCancel) {
  const Interpolator ip(SchemeKind::Chebyshev, 4);
  const std::vector<Point3> pts = {{0.1, 0.2, 0.15}, {0.1, 0.2, 0.15}};
  Eigen::MatrixXd w(2, 1);
  w << 1.0, -1.0;
  Fixture s(2, pts, w);
  Cell& leaf = s.leaf_of(pts[0]);
  p2m(ip, leaf, s.sorted, s.weights);
  EXPECT_LT(leaf.multipole.norm(), 1e-15);
}

TEST(M2M, EmptyChildrenGiveEmptyParent) {
  const Interpolator ip(SchemeKind::Chebyshev, 3);
  Fixture s(3, {}, Eigen::MatrixXd(0, 1));
  clear_expansions(s.tree);
  Cell& parent = s.tree.cell(2, 5);
  m2m(ip, s.tree, parent);
  EXPECT_EQ(parent.multipole.size(), 0);
}

TEST(M2M, PreservesPolynomialMoments) {
  for (SchemeKind scheme : {SchemeKind::Chebyshev, SchemeKind::Uniform}) {
    const Interpolator ip(scheme, 4);
    auto pts = oracle::random_points(30, 8, 0.51, 0.74);  // inside cell (2,2,2) of level 2
    const Eigen::MatrixXd w = oracle::random_matrix(30, 2, 9);
    Fixture s(3, pts, w);
    upward_pass(ip, s.tree, s.sorted, s.weights);
    const Cell& parent = s.tree.cell(2, morton_encode(2, 2, 2));
    ASSERT_EQ(parent.source_count(), 30u);

    // Direct anterpolation into the parent.
    const Eigen::MatrixXd direct =
        interpolation_matrix(ip, parent, std::span<const Point3>(s.sorted).subspan(parent.source_begin, 30)) *
        s.weights.middleRows(static_cast<Eigen::Index>(parent.source_begin), 30);
    Eigen::VectorXd f(ip.size());
    for (int a = 0; a < ip.size(); ++a) f(a) = poly(node_in(ip, parent, a));
    for (int c = 0; c < 2; ++c) {
      double exact = 0.0;
      for (std::size_t j = 0; j < pts.size(); ++j) exact += poly(pts[j]) * w(static_cast<Eigen::Index>(j), c);
      EXPECT_NEAR(f.dot(parent.multipole.col(c)), exact, 1e-10);
      EXPECT_NEAR(f.dot(direct.col(c)), exact, 1e-10);
    }
  }
}

TEST(M2M, ColumnsIndependent) {
  const Interpolator ip(SchemeKind::Chebyshev, 3);
  const auto pts = oracle::random_points(200, 1);
  const Eigen::MatrixXd w = oracle::random_matrix(200, 2, 2);
  Fixture both(3, pts, w), first(3, pts, w.col(0));
  upward_pass(ip, both.tree, both.sorted, both.weights);
  upward_pass(ip, first.tree, first.sorted, first.weights);
  for (const Cell& c : both.tree.level(2)) {
    const Cell& o = first.tree.cell(2, c.index);
    if (c.multipole.size() == 0) continue;
    EXPECT_LT((c.multipole.col(0) - o.multipole.col(0)).norm(), 1e-14 * (1 + o.multipole.norm()));
  }
}

TEST(L2L, ZeroParentLeavesChildrenUnchanged) {
  const Interpolator ip(SchemeKind::Uniform, 3);
  const auto pts = oracle::random_points(100, 3);
  Fixture s(3, pts, Eigen::MatrixXd::Ones(100, 1));
  Cell& parent = s.tree.cell(2, 0);
  parent.local = Eigen::MatrixXd::Zero(27, 1);
  Cell& child = s.tree.cell(3, parent.first_child());
  ASSERT_GT(child.target_count(), 0u);
  child.local = Eigen::MatrixXd::Constant(27, 1, 2.5);
  l2l(ip, s.tree, parent);
  EXPECT_EQ(child.local, Eigen::MatrixXd::Constant(27, 1, 2.5));
}

TEST(L2L, ReproducesPolynomialAtChildNodes) {
  for (SchemeKind scheme : {SchemeKind::Chebyshev, SchemeKind::Uniform}) {
    const Interpolator ip(scheme, 4);
    const auto pts = oracle::random_points(2000, 4);
    Fixture s(3, pts, Eigen::MatrixXd::Ones(2000, 1));
    Cell& parent = s.tree.cell(2, 9);
    parent.local.resize(ip.size(), 1);
    for (int a = 0; a < ip.size(); ++a) parent.local(a, 0) = poly(node_in(ip, parent, a));
    l2l(ip, s.tree, parent);
    for (std::uint32_t c = parent.first_child(); c < parent.first_child() + 8; ++c) {
      const Cell& child = s.tree.cell(3, c);
      ASSERT_EQ(child.local.rows(), ip.size());
      for (int a = 0; a < ip.size(); ++a) EXPECT_NEAR(child.local(a, 0), poly(node_in(ip, child, a)), 1e-10);
    }
  }
}

TEST(L2P, ReadsNodeValuesAndMatchesInterpolation) {
  const Interpolator ip(SchemeKind::Chebyshev, 3);
  Octree probe({0.5, 0.5, 0.5}, 1.0, 2);
  const Cell& target = probe.leaves()[21];
  auto pts = oracle::random_points(5, 6, 0.0, 1.0);
  for (auto& p : pts) p = target.center + target.half_width * Point3{2 * p.x - 1, 2 * p.y - 1, 2 * p.z - 1};
  pts.push_back(node_in(ip, target, 4));
  Fixture s(2, pts, Eigen::MatrixXd::Ones(6, 1));
  Cell& leaf = s.tree.leaves()[21];
  leaf.local = oracle::random_matrix(27, 2, 10);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(6, 2);
  l2p(ip, leaf, s.sorted, out);
  const auto nodes = oracle::cheb_nodes(3);
  for (std::size_t r = 0; r < 6; ++r) {
    const Point3 u = to_reference(s.sorted[r], leaf.center, leaf.half_width);
    for (int c = 0; c < 2; ++c) {
      double ref = 0.0;
      for (int a = 0; a < 27; ++a)
        ref += interp_weight(SchemeKind::Chebyshev, 3, u.x, a / 9) * interp_weight(SchemeKind::Chebyshev, 3, u.y, (a / 3) % 3) *
               interp_weight(SchemeKind::Chebyshev, 3, u.z, a % 3) * leaf.local(a, c);
      EXPECT_NEAR(out(static_cast<Eigen::Index>(r), c), ref, 1e-13);
    }
    if (s.tree.target_order()[r] == 5) {
      for (int c = 0; c < 2; ++c) EXPECT_NEAR(out(static_cast<Eigen::Index>(r), c), leaf.local(4, c), 1e-14);
    }
  }
}

TEST(L2P, ZeroLocalChangesNothing) {
  const Interpolator ip(SchemeKind::Uniform, 3);
  const auto pts = oracle::random_points(50, 2);
  Fixture s(2, pts, Eigen::MatrixXd::Ones(50, 1));
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(50, 1, 1.25);
  for (Cell& leaf : s.tree.leaves()) {
    leaf.local = Eigen::MatrixXd::Zero(27, 1);
    l2p(ip, leaf, s.sorted, out);
  }
  EXPECT_EQ(out, Eigen::MatrixXd::Constant(50, 1, 1.25));
}

TEST(FarField, LevelOneUntouchedAndZeroStaysZero) {
  const Interpolator ip(SchemeKind::Chebyshev, 3);
  FmmPlan plan;
  plan.order = 3;
  const M2LTable table = precompute_m2l(exponential(), plan);
  const auto pts = oracle::random_points(300, 5);
  Fixture s(3, pts, Eigen::MatrixXd::Zero(300, 1));
  upward_pass(ip, s.tree, s.sorted, s.weights);
  far_field_pass(s.tree, table, 1);
  for (const Cell& c : s.tree.level(1)) EXPECT_EQ(c.local.size(), 0);
  for (int l = 2; l <= 3; ++l)
    for (const Cell& c : s.tree.level(l)) EXPECT_EQ(c.local.norm(), 0.0);
}

// One source leaf in the interaction list of one target leaf: the far-field
// pipeline alone reproduces the direct sum to interpolation accuracy.
TEST(FarField, TwoCellToy) {
  for (SchemeKind scheme : {SchemeKind::Chebyshev, SchemeKind::Uniform}) {
    const int p = 7;
    const Interpolator ip(scheme, p);
    FmmPlan plan;
    plan.levels = 2;
    plan.order = p;
    plan.scheme = scheme;
    plan.eps = 1e-12;
    const M2LTable table = precompute_m2l(exponential(), plan);

    auto src = oracle::random_points(40, 1, 0.0, 0.25);  // leaf (0,0,0)
    auto tgt = oracle::random_points(30, 2, 0.0, 0.25);
    for (auto& t : tgt) t.x += 0.5;                        // leaf (2,0,0)
    const Eigen::MatrixXd w = oracle::random_matrix(40, 1, 3);

    Octree tree({0.5, 0.5, 0.5}, 1.0, 2);
    tree.distribute_points(src, tgt);
    std::vector<Point3> ss(src.size()), ts(tgt.size());
    Eigen::MatrixXd ws(40, 1);
    for (std::size_t r = 0; r < src.size(); ++r) {
      ss[r] = src[tree.source_order()[r]];
      ws(static_cast<Eigen::Index>(r), 0) = w(static_cast<Eigen::Index>(tree.source_order()[r]), 0);
    }
    for (std::size_t r = 0; r < tgt.size(); ++r) ts[r] = tgt[tree.target_order()[r]];

    upward_pass(ip, tree, ss, ws);
    far_field_pass(tree, table, 1);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(30, 1);
    downward_pass(ip, tree, ts, out);
    const Eigen::MatrixXd ref = oracle::direct_sum(exponential(), ss, ts, ws);
    EXPECT_LT(relative_error(out, ref), 1e-6) << to_string(scheme);
  }
}

TEST(NearField, SinglePointSelfIsZero) {
  const std::vector<Point3> pts = {{0.3, 0.3, 0.3}};
  Fixture s(2, pts, Eigen::MatrixXd::Ones(1, 1));
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(1, 1);
  near_field_pass(s.tree, laplacian(), s.sorted, s.sorted, s.weights, out);
  EXPECT_EQ(out(0, 0), 0.0);
}

TEST(NearField, TwoPointsOneLeaf) {
  const std::vector<Point3> pts = {{0, 0, 0}, {0, 0, 2}};
  Octree tree({7.5, 7.5, 7.5}, 16.0, 2);
  tree.distribute_points(pts, pts);
  ASSERT_EQ(tree.leaves()[0].source_count(), 2u);
  for (bool same : {false, true}) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2, 1);
    near_field_pass(tree, laplacian(), pts, pts, Eigen::MatrixXd::Ones(2, 1), out, same);
    EXPECT_DOUBLE_EQ(out(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(out(1, 0), 0.5);
  }
}

TEST(NearField, EverythingNearMatchesDirect) {
  // Points in [0, 0.5)^3 only occupy leaves (0..1)^3, which are all mutual
  // neighbors at level 2, so the engine result is pure near field.
  const auto pts = oracle::random_points(200, 21, 0.0, 0.499);
  const Eigen::MatrixXd w = oracle::random_matrix(200, 1, 22);
  FmmPlan plan;
  plan.levels = 2;
  for (const auto& name : builtin_kernel_names()) {
    const KernelSpec k = make_kernel(name);
    Fmm fmm(k, plan);
    const Eigen::MatrixXd ref = oracle::direct_sum(k, pts, pts, w);
    EXPECT_LT(relative_error(fmm.evaluate(pts, w), ref), 1e-13) << name;
    EXPECT_LT(relative_error(fmm.evaluate(pts, pts, w), ref), 1e-13) << name;
  }
}

TEST(NearField, SymmetricPathMatchesPlainLoop) {
  const auto pts = oracle::random_points(3000, 31);
  const Eigen::MatrixXd w = oracle::random_matrix(3000, 3, 32);
  Fixture s(3, pts, w);
  for (const auto& name : {"laplacian", "exponential", "logarithm"}) {
    const KernelSpec k = make_kernel(name);
    Eigen::MatrixXd plain = Eigen::MatrixXd::Zero(3000, 3), sym = plain;
    near_field_pass(s.tree, k, s.sorted, s.sorted, s.weights, plain, false);
    near_field_pass(s.tree, k, s.sorted, s.sorted, s.weights, sym, true);
    EXPECT_LE(relative_error(sym, plain), 1e-14) << name;
  }
}

TEST(NearField, AntisymmetricKernel) {
  const KernelSpec k{"odd", [](const Point3& x, const Point3& y) { return (x.x - y.x) * std::exp(-distance(x, y)); },
                     0.0, -1};
  const auto pts = oracle::random_points(1500, 41);
  const Eigen::MatrixXd w = oracle::random_matrix(1500, 1, 42);
  Fixture s(3, pts, w);
  Eigen::MatrixXd plain = Eigen::MatrixXd::Zero(1500, 1), sym = plain;
  near_field_pass(s.tree, k, s.sorted, s.sorted, s.weights, plain, false);
  near_field_pass(s.tree, k, s.sorted, s.sorted, s.weights, sym, true);
  EXPECT_LE(relative_error(sym, plain), 1e-14);
}

TEST(NearField, NonFiniteNamesPairIndices) {
  const KernelSpec k{"bad", [](const Point3& x, const Point3& y) { return x.x > 0.9 && y.x < 0.9 ? NAN : 1.0; },
                     0.0, 0};
  std::vector<Point3> pts = {{0.1, 0.1, 0.1}, {0.85, 0.2, 0.2}, {0.95, 0.2, 0.2}};
  Fixture s(2, pts, Eigen::MatrixXd::Ones(3, 1));
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(3, 1);
  try {
    near_field_pass(s.tree, k, s.sorted, s.sorted, s.weights, out);
    FAIL() << "expected KernelError";
  } catch (const KernelError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("target 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("source 1"), std::string::npos) << msg;
  }
}
