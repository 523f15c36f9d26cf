#include <algorithm>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "bbfmm/errors.hpp"
#include "bbfmm/octree.hpp"
#include "bbfmm/offsets.hpp"
#include "oracles.hpp"

using namespace bbfmm;

namespace {

const Cell& at(const Octree& t, int level, int x, int y, int z) {
  return t.cell(level, morton_encode(x, y, z));
}

int chebyshev_distance(const Cell& a, const Cell& b) {
  int d = 0;
  for (int i = 0; i < 3; ++i) d = std::max(d, std::abs(a.coords[static_cast<std::size_t>(i)] - b.coords[static_cast<std::size_t>(i)]));
  return d;
}

}  // namespace

TEST(Octree, LevelSizes) {
  const Octree t = build_tree({0.5, 0.5, 0.5}, 1.0, 2);
  EXPECT_EQ(t.leaves().size(), 64u);
  EXPECT_EQ(t.level(1).size(), 8u);
  EXPECT_EQ(t.level(0).size(), 1u);
  EXPECT_EQ(t.cell_count(), 73u);
}

TEST(Octree, LeafHalfWidth) {
  const Octree t3 = build_tree({0, 0, 0}, 2.0, 3);
  EXPECT_EQ(t3.leaves().size(), 512u);
  for (const Cell& c : t3.leaves()) EXPECT_DOUBLE_EQ(c.half_width, 2.0 / 16);
  const Octree t5 = build_tree({0.5, 0.5, 0.5}, 1.0, 5);
  EXPECT_DOUBLE_EQ(t5.leaves()[0].half_width, 1.0 / 64);
  EXPECT_DOUBLE_EQ(t5.root().half_width, 0.5);
}

TEST(Octree, RejectsBadConfig) {
  EXPECT_THROW(build_tree({0, 0, 0}, 1.0, 1), ConfigError);
  EXPECT_THROW(build_tree({0, 0, 0}, 0.0, 3), ConfigError);
  EXPECT_THROW(build_tree({0, 0, 0}, -1.0, 3), ConfigError);
}

TEST(Octree, ChildrenPartitionParent) {
  const Octree t = build_tree({0.5, 0.5, 0.5}, 1.0, 3);
  for (int l = 0; l < 3; ++l) {
    for (const Cell& p : t.level(l)) {
      for (std::uint32_t c = p.first_child(); c < p.first_child() + 8; ++c) {
        const Cell& child = t.cell(l + 1, c);
        EXPECT_EQ(child.parent, static_cast<std::int64_t>(p.index));
        EXPECT_DOUBLE_EQ(child.half_width, 0.5 * p.half_width);
        for (int a = 0; a < 3; ++a) EXPECT_NEAR(std::abs(child.center[a] - p.center[a]), child.half_width, 1e-15);
      }
    }
  }
}

TEST(Octree, NeighborCounts) {
  const Octree t = build_tree({0.5, 0.5, 0.5}, 1.0, 3);
  EXPECT_EQ(t.neighbor_list(at(t, 3, 3, 4, 2)).size(), 26u);
  EXPECT_EQ(t.neighbor_list(at(t, 3, 0, 0, 0)).size(), 7u);
  EXPECT_EQ(t.neighbor_list(at(t, 3, 7, 7, 7)).size(), 7u);
  EXPECT_TRUE(t.neighbor_list(t.root()).empty());
}

TEST(Octree, InteractionListCounts) {
  const Octree t = build_tree({0.5, 0.5, 0.5}, 1.0, 4);
  EXPECT_EQ(t.interaction_list(at(t, 4, 7, 8, 6)).size(), 189u);
  for (const Cell& c : t.level(1)) EXPECT_TRUE(t.interaction_list(c).empty());
}

TEST(Octree, ListsMatchLatticeDefinition) {
  const Octree t = build_tree({0.5, 0.5, 0.5}, 1.0, 3);
  for (int l = 2; l <= 3; ++l) {
    const auto cells = t.level(l);
    for (const Cell& c : cells) {
      std::set<std::uint32_t> nb, il;
      const Cell& parent = t.cell(l - 1, static_cast<std::uint32_t>(c.parent));
      for (const Cell& s : cells) {
        const int d = chebyshev_distance(c, s);
        if (d == 1) nb.insert(s.index);
        const Cell& sp = t.cell(l - 1, static_cast<std::uint32_t>(s.parent));
        if (d > 1 && chebyshev_distance(parent, sp) <= 1) il.insert(s.index);
      }
      EXPECT_EQ(std::set<std::uint32_t>(c.neighbors.begin(), c.neighbors.end()), nb);
      EXPECT_EQ(std::set<std::uint32_t>(c.interactions.begin(), c.interactions.end()), il);
      EXPECT_LE(c.neighbors.size(), 26u);
      EXPECT_LE(c.interactions.size(), 189u);
      for (std::uint32_t s : c.interactions) {
        const int d = chebyshev_distance(c, cells[s]);
        EXPECT_TRUE(d == 2 || d == 3);
      }
    }
  }
}

TEST(Octree, OffsetUnionIs316) {
  const Octree t = build_tree({0.5, 0.5, 0.5}, 1.0, 3);
  std::set<std::array<int, 3>> offsets;
  for (const Cell& c : t.leaves())
    for (std::uint32_t s : c.interactions) {
      const Cell& src = t.leaves()[s];
      offsets.insert({src.coords[0] - c.coords[0], src.coords[1] - c.coords[1], src.coords[2] - c.coords[2]});
    }
  EXPECT_EQ(offsets.size(), 316u);
}

TEST(Octree, InteractionsSortedByOffset) {
  const Octree t = build_tree({0.5, 0.5, 0.5}, 1.0, 3);
  for (const Cell& c : t.leaves()) {
    int last = -1;
    for (std::uint32_t s : c.interactions) {
      const int off = Octree::relative_offset(c, t.leaves()[s]);
      EXPECT_GT(off, last);
      last = off;
    }
  }
}

// Every (target leaf, source leaf) pair is covered exactly once: either
// directly (neighbor or self) or through one ancestor pair in an interaction list.
TEST(Octree, FarNearSplitIsComplete) {
  for (int levels : {2, 3}) {
    const Octree t = build_tree({0.5, 0.5, 0.5}, 1.0, levels);
    const auto leaves = t.leaves();
    for (const Cell& tl : leaves) {
      for (const Cell& sl : leaves) {
        int covered = 0;
        if (tl.index == sl.index || std::binary_search(tl.neighbors.begin(), tl.neighbors.end(), sl.index)) ++covered;
        std::uint32_t ti = tl.index, si = sl.index;
        for (int l = levels; l >= 2; --l) {
          const Cell& tc = t.cell(l, ti);
          if (std::find(tc.interactions.begin(), tc.interactions.end(), si) != tc.interactions.end()) ++covered;
          ti /= 8;
          si /= 8;
        }
        EXPECT_EQ(covered, 1) << "leaves " << tl.index << " " << sl.index;
      }
    }
  }
}

TEST(Octree, CenterPointLandsInOneLeaf) {
  Octree t = build_tree({0.5, 0.5, 0.5}, 1.0, 2);
  const std::vector<Point3> p = {{0.5, 0.5, 0.5}};
  t.distribute_points(p, p);
  int holders = 0;
  for (const Cell& c : t.leaves()) holders += static_cast<int>(c.source_count());
  EXPECT_EQ(holders, 1);
  // Half-open rule: the center belongs to the upper octant.
  EXPECT_EQ(at(t, 2, 2, 2, 2).source_count(), 1u);
}

TEST(Octree, UpperDomainFacesAreClosed) {
  Octree t = build_tree({0.5, 0.5, 0.5}, 1.0, 2);
  const std::vector<Point3> p = {{1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}};
  t.distribute_points(p, p);
  EXPECT_EQ(at(t, 2, 3, 3, 3).source_count(), 1u);
  EXPECT_EQ(at(t, 2, 0, 0, 0).source_count(), 1u);
}

TEST(Octree, PartitionOfManyPoints) {
  Octree t = build_tree({0.5, 0.5, 0.5}, 1.0, 4);
  const auto pts = oracle::random_points(10000, 7);
  t.distribute_points(pts, pts);
  std::size_t sum = 0;
  std::vector<std::size_t> seen;
  for (const Cell& c : t.leaves()) {
    sum += c.target_count();
    for (std::size_t i : t.target_indices(c)) {
      seen.push_back(i);
      for (int a = 0; a < 3; ++a) {
        EXPECT_GE(pts[i][a], c.center[a] - c.half_width);
        EXPECT_LE(pts[i][a], c.center[a] + c.half_width);
      }
    }
  }
  EXPECT_EQ(sum, 10000u);
  EXPECT_NEAR(static_cast<double>(sum) / t.leaves().size(), 10000.0 / 4096.0, 1e-12);
  std::sort(seen.begin(), seen.end());
  std::vector<std::size_t> all(10000);
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(seen, all);
  // Parent ranges are the union of their children.
  for (const Cell& p : t.level(3)) {
    std::size_t n = 0;
    for (std::uint32_t c = p.first_child(); c < p.first_child() + 8; ++c) n += t.cell(4, c).source_count();
    EXPECT_EQ(p.source_count(), n);
  }
  EXPECT_EQ(t.root().source_count(), 10000u);
}

TEST(Octree, EmptySourcesAreFine) {
  Octree t = build_tree({0.5, 0.5, 0.5}, 1.0, 3);
  t.distribute_points({}, {});
  for (const Cell& c : t.leaves()) EXPECT_EQ(c.source_count(), 0u);
}

TEST(Octree, OutsidePointIsRejectedWithIndex) {
  Octree t = build_tree({0.5, 0.5, 0.5}, 1.0, 2);
  const std::vector<Point3> p = {{0.5, 0.5, 0.5}, {0.2, 1.5, 0.3}};
  try {
    t.distribute_points(p, p);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("point 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("1.5"), std::string::npos) << msg;
  }
}

TEST(Offsets, SetProperties) {
  const auto set = offset_set();
  EXPECT_EQ(set.size(), 316u);
  EXPECT_GE(offset_index(2, 0, 0), 0);
  EXPECT_EQ(offset_index(1, 1, 1), -1);
  EXPECT_EQ(offset_index(0, 0, 0), -1);
  EXPECT_EQ(offset_index(4, 0, 0), -1);
  for (int n = 0; n < kNumOffsets; ++n) {
    const Offset& o = set[static_cast<std::size_t>(n)];
    const int m = std::max({std::abs(o[0]), std::abs(o[1]), std::abs(o[2])});
    EXPECT_TRUE(m == 2 || m == 3);
    EXPECT_EQ(offset_index(o[0], o[1], o[2]), n);
    const Offset& neg = set[static_cast<std::size_t>(negated_offset(n))];
    EXPECT_EQ(neg, (Offset{-o[0], -o[1], -o[2]}));
  }
}

TEST(Morton, RoundTrip) {
  for (int x = 0; x < 16; x += 3)
    for (int y = 0; y < 16; y += 5)
      for (int z = 0; z < 16; ++z) EXPECT_EQ(morton_decode(morton_encode(x, y, z)), (std::array<int, 3>{x, y, z}));
  EXPECT_EQ(morton_encode(1, 0, 0), 4u);
  EXPECT_EQ(morton_encode(0, 1, 0), 2u);
  EXPECT_EQ(morton_encode(0, 0, 1), 1u);
}
