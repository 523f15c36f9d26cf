#pragma once

#include <span>

#include <Eigen/Core>

#include "bbfmm/interpolation.hpp"
#include "bbfmm/kernel.hpp"
#include "bbfmm/octree.hpp"
#include "bbfmm/operators.hpp"

namespace bbfmm {

// The individual FMM stages. Point arrays and weight/potential rows are in the
// tree's sorted order (row r of `weights` belongs to source_order()[r]), so a
// cell's points are the contiguous rows [begin, end).
//
// Expansions are sized lazily: a cell without sources keeps an empty
// multipole, a cell without targets an empty local. The passes skip both.

/// p^3 x n matrix of interpolation weights of `points` in `cell`.
Eigen::MatrixXd interpolation_matrix(const Interpolator& interp, const Cell& cell,
                                     std::span<const Point3> points);

/// leaf.multipole = S * weights[leaf rows] (anterpolation).
void p2m(const Interpolator& interp, Cell& leaf, std::span<const Point3> sources,
         const Eigen::MatrixXd& weights);

/// parent.multipole = sum over children holding sources of T_o * child.multipole.
void m2m(const Interpolator& interp, Octree& tree, Cell& parent);

/// child.local += T_o^T * parent.local for every child holding targets.
void l2l(const Interpolator& interp, Octree& tree, const Cell& parent);

/// out[leaf rows] += S^T * leaf.local.
void l2p(const Interpolator& interp, const Cell& leaf, std::span<const Point3> targets,
         Eigen::MatrixXd& out);

/// Drop every multipole and local expansion.
void clear_expansions(Octree& tree);

/// P2M on all leaves, then M2M level by level up to level 2.
void upward_pass(const Interpolator& interp, Octree& tree, std::span<const Point3> sources,
                 const Eigen::MatrixXd& weights);

/// M2L from every interaction-list source into every cell holding targets,
/// levels 2..L.
void far_field_pass(Octree& tree, const M2LTable& table, Eigen::Index n_cols);

/// L2L from level 2 down to the leaves, then L2P.
void downward_pass(const Interpolator& interp, Octree& tree, std::span<const Point3> targets,
                   Eigen::MatrixXd& out);

/// Direct interactions between each target leaf and its neighbors and itself.
///
/// With `same_set` (sources and targets are one point set) and a kernel with
/// symmetry +-1, each unordered leaf pair is evaluated once and the transposed
/// block reused, and self blocks evaluate their upper triangle only. Throws
/// KernelError naming the (original) target and source indices of the first
/// non-finite value.
void near_field_pass(const Octree& tree, const KernelSpec& kernel, std::span<const Point3> sources,
                     std::span<const Point3> targets, const Eigen::MatrixXd& weights,
                     Eigen::MatrixXd& out, bool same_set = false);

}  // namespace bbfmm
