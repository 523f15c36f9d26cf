#include "bbfmm/stages.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bbfmm/errors.hpp"
#include "bbfmm/parallel.hpp"

namespace bbfmm {

Eigen::MatrixXd interpolation_matrix(const Interpolator& interp, const Cell& cell,
                                     std::span<const Point3> points) {
  const int n3 = interp.size();
  Eigen::MatrixXd s(n3, static_cast<Eigen::Index>(points.size()));
  for (std::size_t j = 0; j < points.size(); ++j) {
    Point3 u = to_reference(points[j], cell.center, cell.half_width);
    // Points on a cell face can land a rounding error outside [-1, 1].
    for (int a = 0; a < 3; ++a) u[a] = std::clamp(u[a], -1.0, 1.0);
    interp.weights_3d(u, std::span<double>(s.col(static_cast<Eigen::Index>(j)).data(),
                                           static_cast<std::size_t>(n3)));
  }
  return s;
}

void p2m(const Interpolator& interp, Cell& leaf, std::span<const Point3> sources,
         const Eigen::MatrixXd& weights) {
  const std::size_t n = leaf.source_count();
  if (n == 0) {
    leaf.multipole.resize(0, 0);
    return;
  }
  const Eigen::MatrixXd s = interpolation_matrix(interp, leaf, sources.subspan(leaf.source_begin, n));
  leaf.multipole.noalias() =
      s * weights.middleRows(static_cast<Eigen::Index>(leaf.source_begin), static_cast<Eigen::Index>(n));
}

void m2m(const Interpolator& interp, Octree& tree, Cell& parent) {
  bool any = false;
  for (int o = 0; o < 8; ++o) {
    const Cell& child = tree.cell(parent.level + 1, parent.first_child() + static_cast<std::uint32_t>(o));
    if (child.multipole.size() == 0) continue;
    if (!any) {
      parent.multipole.noalias() = interp.transfer(o) * child.multipole;
      any = true;
    } else {
      parent.multipole.noalias() += interp.transfer(o) * child.multipole;
    }
  }
  if (!any) parent.multipole.resize(0, 0);
}

void l2l(const Interpolator& interp, Octree& tree, const Cell& parent) {
  if (parent.local.size() == 0) return;
  for (int o = 0; o < 8; ++o) {
    Cell& child = tree.cell(parent.level + 1, parent.first_child() + static_cast<std::uint32_t>(o));
    if (child.target_count() == 0) continue;
    if (child.local.size() == 0) {
      child.local.noalias() = interp.transfer(o).transpose() * parent.local;
    } else {
      child.local.noalias() += interp.transfer(o).transpose() * parent.local;
    }
  }
}

void l2p(const Interpolator& interp, const Cell& leaf, std::span<const Point3> targets,
         Eigen::MatrixXd& out) {
  const std::size_t n = leaf.target_count();
  if (n == 0 || leaf.local.size() == 0) return;
  const Eigen::MatrixXd s = interpolation_matrix(interp, leaf, targets.subspan(leaf.target_begin, n));
  out.middleRows(static_cast<Eigen::Index>(leaf.target_begin), static_cast<Eigen::Index>(n)).noalias() +=
      s.transpose() * leaf.local;
}

void clear_expansions(Octree& tree) {
  for (int l = 0; l <= tree.levels(); ++l) {
    for (Cell& c : tree.level(l)) {
      c.multipole.resize(0, 0);
      c.local.resize(0, 0);
    }
  }
}

void upward_pass(const Interpolator& interp, Octree& tree, std::span<const Point3> sources,
                 const Eigen::MatrixXd& weights) {
  auto leaves = tree.leaves();
  parallel_for(static_cast<std::ptrdiff_t>(leaves.size()),
               [&](std::ptrdiff_t i) { p2m(interp, leaves[static_cast<std::size_t>(i)], sources, weights); });
  for (int l = tree.levels() - 1; l >= M2LLayout::kFirstLevel; --l) {
    auto cells = tree.level(l);
    parallel_for(static_cast<std::ptrdiff_t>(cells.size()),
                 [&](std::ptrdiff_t i) { m2m(interp, tree, cells[static_cast<std::size_t>(i)]); });
  }
}

namespace {

template <typename Table>
void far_field_level(Octree& tree, const Table& table, int level, Eigen::Index n_cols) {
  auto cells = tree.level(level);
  const Eigen::Index n3 = static_cast<Eigen::Index>(table.order()) * table.order() * table.order();

  std::vector<typename Table::SourceData> prepared(cells.size());
  parallel_for(static_cast<std::ptrdiff_t>(cells.size()), [&](std::ptrdiff_t i) {
    const Cell& c = cells[static_cast<std::size_t>(i)];
    if (c.multipole.size() != 0) prepared[static_cast<std::size_t>(i)] = table.prepare(level, c.multipole);
  });

  parallel_for(static_cast<std::ptrdiff_t>(cells.size()), [&](std::ptrdiff_t i) {
    Cell& c = cells[static_cast<std::size_t>(i)];
    if (c.target_count() == 0) return;
    auto acc = table.zero_target(level, n_cols);
    bool any = false;
    for (std::uint32_t s : c.interactions) {
      const auto& src = prepared[s];
      if (src.size() == 0) continue;
      const int offset = Octree::relative_offset(c, cells[s]);
      if (offset < 0) {
        throw InternalError("interaction list of cell " + std::to_string(c.index) + " at level " +
                            std::to_string(level) + " holds non-far-field cell " + std::to_string(s));
      }
      table.accumulate(acc, level, offset, src);
      any = true;
    }
    if (!any) return;
    if (c.local.size() == 0) c.local = Eigen::MatrixXd::Zero(n3, n_cols);
    table.finalize(level, acc, c.local);
  });
}

}  // namespace

void far_field_pass(Octree& tree, const M2LTable& table, Eigen::Index n_cols) {
  std::visit(
      [&](const auto& t) {
        for (int l = M2LLayout::kFirstLevel; l <= tree.levels(); ++l) far_field_level(tree, t, l, n_cols);
      },
      table.variant());
}

void downward_pass(const Interpolator& interp, Octree& tree, std::span<const Point3> targets,
                   Eigen::MatrixXd& out) {
  for (int l = M2LLayout::kFirstLevel; l < tree.levels(); ++l) {
    auto cells = tree.level(l);
    parallel_for(static_cast<std::ptrdiff_t>(cells.size()),
                 [&](std::ptrdiff_t i) { l2l(interp, tree, cells[static_cast<std::size_t>(i)]); });
  }
  auto leaves = tree.leaves();
  parallel_for(static_cast<std::ptrdiff_t>(leaves.size()),
               [&](std::ptrdiff_t i) { l2p(interp, leaves[static_cast<std::size_t>(i)], targets, out); });
}

namespace {

[[noreturn]] void throw_near_field(const Octree& tree, const KernelSpec& kernel, const Cell& t,
                                   const Cell& s, std::span<const Point3> sources,
                                   std::span<const Point3> targets, const Eigen::MatrixXd& block) {
  for (Eigen::Index j = 0; j < block.cols(); ++j) {
    for (Eigen::Index i = 0; i < block.rows(); ++i) {
      if (std::isfinite(block(i, j))) continue;
      const std::size_t ti = t.target_begin + static_cast<std::size_t>(i);
      const std::size_t sj = s.source_begin + static_cast<std::size_t>(j);
      std::ostringstream msg;
      msg.precision(17);
      msg << "kernel '" << kernel.name << "' returned " << block(i, j) << " for target "
          << tree.target_order()[ti] << " at " << targets[ti] << " and source "
          << tree.source_order()[sj] << " at " << sources[sj];
      throw KernelError(msg.str());
    }
  }
  throw InternalError("near-field block reported non-finite but none found");
}

Eigen::MatrixXd kernel_block(const KernelSpec& kernel, const Cell& t, const Cell& s,
                             std::span<const Point3> sources, std::span<const Point3> targets) {
  const auto nt = static_cast<Eigen::Index>(t.target_count());
  const auto ns = static_cast<Eigen::Index>(s.source_count());
  Eigen::MatrixXd k(nt, ns);
  for (Eigen::Index j = 0; j < ns; ++j) {
    const Point3& y = sources[s.source_begin + static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < nt; ++i) {
      k(i, j) = kernel.function(targets[t.target_begin + static_cast<std::size_t>(i)], y);
    }
  }
  return k;
}

std::vector<std::uint32_t> near_cells(const Cell& leaf) {
  std::vector<std::uint32_t> out(leaf.neighbors.begin(), leaf.neighbors.end());
  out.insert(std::upper_bound(out.begin(), out.end(), leaf.index), leaf.index);
  return out;
}

}  // namespace

void near_field_pass(const Octree& tree, const KernelSpec& kernel, std::span<const Point3> sources,
                     std::span<const Point3> targets, const Eigen::MatrixXd& weights,
                     Eigen::MatrixXd& out, bool same_set) {
  auto leaves = tree.leaves();
  auto rows = [](std::size_t begin, std::size_t count) {
    return std::pair{static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(count)};
  };

  if (!same_set || kernel.symmetry == 0) {
    parallel_for(static_cast<std::ptrdiff_t>(leaves.size()), [&](std::ptrdiff_t ti) {
      const Cell& t = leaves[static_cast<std::size_t>(ti)];
      if (t.target_count() == 0) return;
      const auto [tb, nt] = rows(t.target_begin, t.target_count());
      for (std::uint32_t si : near_cells(t)) {
        const Cell& s = leaves[si];
        if (s.source_count() == 0) continue;
        const Eigen::MatrixXd k = kernel_block(kernel, t, s, sources, targets);
        if (!k.allFinite()) throw_near_field(tree, kernel, t, s, sources, targets, k);
        const auto [sb, ns] = rows(s.source_begin, s.source_count());
        out.middleRows(tb, nt).noalias() += k * weights.middleRows(sb, ns);
      }
    });
    return;
  }

  // Symmetric path. Leaves are processed in 27 colors (lattice coordinates mod
  // 3); two leaves of one color are at least 3 apart on some axis, so their
  // neighborhoods are disjoint and no two threads write the same rows.
  const double sign = kernel.symmetry;
  std::array<std::vector<std::uint32_t>, 27> colors;
  for (const Cell& c : leaves) {
    colors[static_cast<std::size_t>((c.coords[0] % 3) * 9 + (c.coords[1] % 3) * 3 + c.coords[2] % 3)]
        .push_back(c.index);
  }
  for (const auto& color : colors) {
    parallel_for(static_cast<std::ptrdiff_t>(color.size()), [&](std::ptrdiff_t ci) {
      const Cell& t = leaves[color[static_cast<std::size_t>(ci)]];
      if (t.target_count() == 0) return;
      const auto [tb, nt] = rows(t.target_begin, t.target_count());

      // Self block: upper triangle only.
      Eigen::MatrixXd k(nt, nt);
      for (Eigen::Index j = 0; j < nt; ++j) {
        const Point3& y = sources[t.source_begin + static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i <= j; ++i) {
          k(i, j) = kernel.function(targets[t.target_begin + static_cast<std::size_t>(i)], y);
        }
      }
      for (Eigen::Index j = 0; j < nt; ++j)
        for (Eigen::Index i = j + 1; i < nt; ++i) k(i, j) = sign * k(j, i);
      if (!k.allFinite()) throw_near_field(tree, kernel, t, t, sources, targets, k);
      out.middleRows(tb, nt).noalias() += k * weights.middleRows(tb, nt);

      for (std::uint32_t si : t.neighbors) {
        if (si < t.index) continue;
        const Cell& s = leaves[si];
        if (s.source_count() == 0) continue;
        const Eigen::MatrixXd b = kernel_block(kernel, t, s, sources, targets);
        if (!b.allFinite()) throw_near_field(tree, kernel, t, s, sources, targets, b);
        const auto [sb, ns] = rows(s.source_begin, s.source_count());
        out.middleRows(tb, nt).noalias() += b * weights.middleRows(sb, ns);
        out.middleRows(sb, ns).noalias() += sign * (b.transpose() * weights.middleRows(tb, nt));
      }
    });
  }
}

}  // namespace bbfmm
