#include <cmath>
#include <string>

#include "bbfmm/errors.hpp"
#include "bbfmm/operators.hpp"

namespace bbfmm {

double M2LLayout::cell_width(int level) const { return std::ldexp(domain_length, -level); }

int M2LLayout::slot(int level) const {
  if (level < kFirstLevel || level > levels) {
    throw InternalError("no M2L table for tree level " + std::to_string(level) + " (tables cover " +
                        std::to_string(kFirstLevel) + ".." + std::to_string(levels) + ")");
  }
  return single_level ? 0 : level - kFirstLevel;
}

double M2LLayout::scale(int level) const {
  if (!single_level) return 1.0;
  // The stored table was built for cells of width w_2; a level-l cell is the
  // same geometry scaled by w_l / w_2.
  return std::pow(cell_width(level) / cell_width(kFirstLevel), homogen);
}

SchemeKind M2LTable::scheme() const {
  return std::holds_alternative<ChebyshevM2L>(table_) ? SchemeKind::Chebyshev
                                                      : SchemeKind::Uniform;
}

const M2LLayout& M2LTable::layout() const {
  return std::visit([](const auto& t) -> const M2LLayout& { return t.layout(); }, table_);
}

int M2LTable::order() const {
  return std::visit([](const auto& t) { return t.order(); }, table_);
}

std::size_t M2LTable::memory_bytes() const {
  return std::visit([](const auto& t) { return t.memory_bytes(); }, table_);
}

Eigen::MatrixXd M2LTable::apply(int offset, int level, const Eigen::MatrixXd& multipole) const {
  if (offset < 0 || offset >= kNumOffsets) {
    throw InternalError("M2L offset index " + std::to_string(offset) +
                        " is not in the far-field offset table");
  }
  return std::visit(
      [&](const auto& t) {
        const auto source = t.prepare(level, multipole);
        auto acc = t.zero_target(level, multipole.cols());
        t.accumulate(acc, level, offset, source);
        Eigen::MatrixXd local = Eigen::MatrixXd::Zero(multipole.rows(), multipole.cols());
        t.finalize(level, acc, local);
        return local;
      },
      table_);
}

Eigen::MatrixXd M2LTable::dense(int offset, int level) const {
  const int n3 = order() * order() * order();
  return apply(offset, level, Eigen::MatrixXd::Identity(n3, n3));
}

M2LLayout make_layout(const KernelSpec& kernel, const FmmPlan& plan) {
  M2LLayout layout;
  layout.domain_length = plan.domain_length;
  layout.levels = plan.levels;
  layout.single_level = plan.use_homogeneity && kernel.homogeneous();
  layout.homogen = kernel.homogen;
  return layout;
}

M2LTable precompute_m2l(const KernelSpec& kernel, const FmmPlan& plan) {
  plan.validate();
  const Interpolator interp(plan.scheme, plan.order);
  const M2LLayout layout = make_layout(kernel, plan);
  if (plan.scheme == SchemeKind::Chebyshev) {
    return M2LTable(ChebyshevM2L::build(kernel, interp, layout, plan.eps));
  }
  return M2LTable(UniformM2L::build(kernel, interp, layout));
}

Eigen::MatrixXd apply_m2l(const M2LTable& table, int offset, int level,
                          const Eigen::MatrixXd& multipole) {
  return table.apply(offset, level, multipole);
}

}  // namespace bbfmm
