#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "bbfmm/errors.hpp"
#include "bbfmm/operators.hpp"
#include "bbfmm/parallel.hpp"

namespace bbfmm {

Eigen::MatrixXd m2l_dense_block(const KernelSpec& kernel, const Interpolator& interp, double width,
                                int offset) {
  if (offset < 0 || offset >= kNumOffsets) {
    throw InternalError("M2L offset index " + std::to_string(offset) + " out of range");
  }
  const Offset& t = offset_set()[static_cast<std::size_t>(offset)];
  const double h = 0.5 * width;
  const Point3 shift{t[0] * width, t[1] * width, t[2] * width};
  const int n3 = interp.size();
  const std::vector<Point3> nodes = interp.nodes_3d();

  Eigen::MatrixXd block(n3, n3);
  for (int b = 0; b < n3; ++b) {
    const Point3 y = shift + h * nodes[static_cast<std::size_t>(b)];
    for (int a = 0; a < n3; ++a) {
      const Point3 x = h * nodes[static_cast<std::size_t>(a)];
      const double v = kernel.function(x, y);
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "M2L precompute aborted at offset (" << t[0] << ", " << t[1] << ", " << t[2]
            << "): kernel '" << kernel.name << "' returned " << v << " for x=" << x << ", y=" << y;
        throw KernelError(msg.str());
      }
      block(a, b) = v;
    }
  }
  return block;
}

namespace {

// Upper-triangular factor R of a tall matrix that arrives in row blocks
// (blocked TSQR): after absorbing blocks A_1..A_k, R^T R = sum_i A_i^T A_i.
class StackedQr {
 public:
  explicit StackedQr(Eigen::Index cols) : cols_(cols) {}

  void absorb(const std::vector<Eigen::MatrixXd>& blocks) {
    Eigen::Index rows = r_.rows();
    for (const auto& b : blocks) rows += b.rows();
    Eigen::MatrixXd stack(rows, cols_);
    Eigen::Index at = 0;
    if (r_.rows() > 0) {
      stack.topRows(r_.rows()) = r_;
      at = r_.rows();
    }
    for (const auto& b : blocks) {
      stack.middleRows(at, b.rows()) = b;
      at += b.rows();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(stack);
    const Eigen::Index keep = std::min(rows, cols_);
    r_ = qr.matrixQR().topRows(keep).triangularView<Eigen::Upper>();
  }

  const Eigen::MatrixXd& r() const { return r_; }

 private:
  Eigen::Index cols_;
  Eigen::MatrixXd r_;
};

Eigen::Index truncation_rank(const Eigen::VectorXd& sv, double eps) {
  if (sv.size() == 0 || sv(0) <= 0.0) return 1;
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) >= eps * sv(0)) ++r;
  return std::max<Eigen::Index>(r, 1);
}

// Right singular vectors and singular values of R.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> right_singular(const Eigen::MatrixXd& r) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeThinV);
  return {svd.matrixV(), svd.singularValues()};
}

ChebyshevM2L::Level build_level(const KernelSpec& kernel, const Interpolator& interp,
                                double width, double eps) {
  const Eigen::Index n3 = interp.size();
  const bool symmetric = kernel.symmetry != 0;

  // With K(x,y) = s K(y,x) and translation invariance, D_{-t} = s D_t^T, so
  // only one block of each +/- pair needs kernel evaluations.
  auto assemble = [&](int offset) -> Eigen::MatrixXd {
    if (symmetric && offset >= kNumOffsets / 2) {
      return kernel.symmetry *
             m2l_dense_block(kernel, interp, width, negated_offset(offset)).transpose();
    }
    return m2l_dense_block(kernel, interp, width, offset);
  };

  const int batch = static_cast<int>(std::clamp<Eigen::Index>(4096 / n3, 1, kNumOffsets));
  StackedQr fat(n3);   // R of [D_t^T]_t, i.e. of K_fat^T = [D_0 ... D_315]^T
  StackedQr thin(n3);  // R of [D_t]_t stacked vertically
  for (int start = 0; start < kNumOffsets; start += batch) {
    const int count = std::min(batch, kNumOffsets - start);
    std::vector<Eigen::MatrixXd> blocks(static_cast<std::size_t>(count));
    parallel_for(count, [&](std::ptrdiff_t i) {
      blocks[static_cast<std::size_t>(i)] = assemble(start + static_cast<int>(i));
    });
    if (!symmetric) thin.absorb(blocks);
    for (auto& b : blocks) b.transposeInPlace();
    fat.absorb(blocks);
  }

  // K_fat = R_fat^T Q^T: its left singular vectors are the right singular
  // vectors of R_fat. For symmetric kernels both stacked families share one
  // Gram matrix, so V = U.
  ChebyshevM2L::Level level;
  auto [u_full, sv_fat] = right_singular(fat.r());
  level.U = u_full.leftCols(truncation_rank(sv_fat, eps));
  level.singular_values = sv_fat;
  if (symmetric) {
    level.V = level.U;
  } else {
    auto [v_full, sv_thin] = right_singular(thin.r());
    level.V = v_full.leftCols(truncation_rank(sv_thin, eps));
  }

  const Eigen::Index core_size = level.U.cols() * level.V.cols();
  level.cores.assign(static_cast<std::size_t>(core_size * kNumOffsets), 0.0);
  parallel_for(kNumOffsets, [&](std::ptrdiff_t t) {
    Eigen::Map<Eigen::MatrixXd> core(level.cores.data() + t * core_size, level.U.cols(),
                                     level.V.cols());
    core.noalias() = level.U.transpose() * assemble(static_cast<int>(t)) * level.V;
  });
  return level;
}

}  // namespace

ChebyshevM2L ChebyshevM2L::build(const KernelSpec& kernel, const Interpolator& interp,
                                 const M2LLayout& layout, double eps) {
  std::vector<Level> levels;
  for (int s = 0; s < layout.stored_levels(); ++s) {
    levels.push_back(build_level(kernel, interp, layout.cell_width(layout.slot_level(s)), eps));
  }
  return ChebyshevM2L(layout, interp.order(), eps, std::move(levels));
}

ChebyshevM2L::SourceData ChebyshevM2L::prepare(int level, const Eigen::MatrixXd& multipole) const {
  return level_table(level).V.transpose() * multipole;
}

ChebyshevM2L::TargetData ChebyshevM2L::zero_target(int level, Eigen::Index n_cols) const {
  return Eigen::MatrixXd::Zero(level_table(level).U.cols(), n_cols);
}

void ChebyshevM2L::accumulate(TargetData& acc, int level, int offset,
                              const SourceData& source) const {
  acc.noalias() += level_table(level).core(offset) * source;
}

void ChebyshevM2L::finalize(int level, const TargetData& acc, Eigen::MatrixXd& local) const {
  local.noalias() += layout_.scale(level) * (level_table(level).U * acc);
}

std::size_t ChebyshevM2L::memory_bytes() const {
  std::size_t doubles = 0;
  for (const auto& l : levels_) {
    doubles += static_cast<std::size_t>(l.U.size() + l.V.size()) + l.cores.size();
  }
  return doubles * sizeof(double);
}

}  // namespace bbfmm
