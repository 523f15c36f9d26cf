#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bbfmm/point.hpp"

namespace bbfmm {

/// One cube of the balanced octree.
///
/// Cells at a level are stored contiguously in Morton order, so the children of
/// cell `m` at level l are cells 8m..8m+7 at level l+1 (octant bits x:4, y:2,
/// z:1). Point ranges index the Morton-sorted point arrays built by
/// Octree::distribute_points; because the sort is by leaf Morton code every
/// cell, not only leaves, owns a contiguous range.
struct Cell {
  Point3 center;
  double half_width = 0.0;
  int level = 0;
  std::uint32_t index = 0;           ///< Morton index within the level
  std::array<int, 3> coords{};       ///< lattice coordinates within the level
  std::int64_t parent = -1;          ///< index at level-1, -1 for the root

  std::vector<std::uint32_t> neighbors;     ///< same-level adjacent cells
  std::vector<std::uint32_t> interactions;  ///< same-level M2L sources, sorted by offset index

  std::size_t source_begin = 0, source_end = 0;
  std::size_t target_begin = 0, target_end = 0;

  Eigen::MatrixXd multipole;  ///< p^3 x n_cols, sized only for cells holding sources
  Eigen::MatrixXd local;      ///< p^3 x n_cols, sized only for cells holding targets

  std::size_t source_count() const { return source_end - source_begin; }
  std::size_t target_count() const { return target_end - target_begin; }
  std::uint32_t first_child() const { return index * 8u; }
};

std::uint32_t morton_encode(int x, int y, int z);
std::array<int, 3> morton_decode(std::uint32_t code);

class Octree {
 public:
  /// Balanced tree with leaves at level `levels`; the root (level 0) spans the
  /// cube of side `length` around `center`. Throws ConfigError for levels < 2
  /// or a non-positive length.
  Octree(const Point3& center, double length, int levels);

  int levels() const { return levels_; }
  const Point3& center() const { return center_; }
  double length() const { return length_; }
  double cell_width(int level) const;

  std::span<Cell> level(int l) { return cells_[static_cast<std::size_t>(l)]; }
  std::span<const Cell> level(int l) const { return cells_[static_cast<std::size_t>(l)]; }
  Cell& cell(int l, std::uint32_t index) { return cells_[static_cast<std::size_t>(l)][index]; }
  const Cell& cell(int l, std::uint32_t index) const {
    return cells_[static_cast<std::size_t>(l)][index];
  }
  const Cell& root() const { return cells_[0][0]; }
  std::span<Cell> leaves() { return level(levels_); }
  std::span<const Cell> leaves() const { return level(levels_); }
  std::size_t cell_count() const;

  /// Assign every point to exactly one leaf. Boxes are half-open [low, high)
  /// except on the domain's upper faces, which are closed. Throws DomainError
  /// naming the first point outside the domain or with a non-finite coordinate.
  void distribute_points(std::span<const Point3> sources, std::span<const Point3> targets);

  std::span<const std::uint32_t> neighbor_list(const Cell& cell) const { return cell.neighbors; }
  std::span<const std::uint32_t> interaction_list(const Cell& cell) const {
    return cell.interactions;
  }

  /// Original indices of the points held by `cell`.
  std::span<const std::size_t> source_indices(const Cell& cell) const;
  std::span<const std::size_t> target_indices(const Cell& cell) const;

  /// Sorted position -> original index.
  const std::vector<std::size_t>& source_order() const { return source_order_; }
  const std::vector<std::size_t>& target_order() const { return target_order_; }

  /// Lattice coordinates of the leaf owning `p` (p must lie in the domain).
  std::array<int, 3> leaf_coords(const Point3& p) const;

  /// Offset index (into offset_set()) of `source` relative to `target`, or -1
  /// when the pair is not a far-field pair. Both cells must be on one level.
  static int relative_offset(const Cell& target, const Cell& source);

 private:
  void build_lists();

  Point3 center_;
  double length_;
  int levels_;
  std::vector<std::vector<Cell>> cells_;
  std::vector<std::size_t> source_order_;
  std::vector<std::size_t> target_order_;
};

/// Convenience wrapper around the Octree constructor.
Octree build_tree(const Point3& domain_center, double domain_length, int levels);

}  // namespace bbfmm
