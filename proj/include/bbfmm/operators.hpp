#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "bbfmm/interpolation.hpp"
#include "bbfmm/kernel.hpp"
#include "bbfmm/offsets.hpp"
#include "bbfmm/plan.hpp"

namespace bbfmm {

namespace detail {
class RealFft3d;
}

/// Which tree levels own a stored table, and the factor applied to it.
///
/// Inhomogeneous kernels store one table per far-field level 2..L. Homogeneous
/// kernels store the level-2 table only; level l reuses it scaled by
/// (w_l / w_2)^m where w is the cell width and m the homogeneity degree.
struct M2LLayout {
  double domain_length = 1.0;
  int levels = 2;
  bool single_level = false;
  double homogen = 0.0;

  static constexpr int kFirstLevel = 2;

  double cell_width(int level) const;
  int stored_levels() const { return single_level ? 1 : levels - kFirstLevel + 1; }
  /// Index into the per-level storage for a tree level; throws InternalError
  /// for levels without far-field interactions.
  int slot(int level) const;
  /// Tree level whose cell width a storage slot was built for.
  int slot_level(int slot) const { return kFirstLevel + slot; }
  double scale(int level) const;
};

/// Dense node-to-node interaction D_t(a, b) = K(x_a, y_b) between a target cell
/// of width `width` centred at the origin and the source cell shifted by
/// offset t * width. Throws KernelError naming the offset on non-finite values.
Eigen::MatrixXd m2l_dense_block(const KernelSpec& kernel, const Interpolator& interp, double width,
                                int offset);

/// Chebyshev M2L: one column basis U (p^3 x r_t) and row basis V (p^3 x r_s) per
/// level from the SVDs of the horizontally and vertically stacked D_t family,
/// plus a core C_t = U^T D_t V for each of the 316 offsets, so D_t ~ U C_t V^T.
class ChebyshevM2L {
 public:
  struct Level {
    Eigen::MatrixXd U;
    Eigen::MatrixXd V;
    std::vector<double> cores;  ///< 316 column-major r_t x r_s blocks
    Eigen::VectorXd singular_values;

    Eigen::Index target_rank() const { return U.cols(); }
    Eigen::Index source_rank() const { return V.cols(); }
    Eigen::Map<const Eigen::MatrixXd> core(int offset) const {
      const Eigen::Index size = U.cols() * V.cols();
      return {cores.data() + offset * size, U.cols(), V.cols()};
    }
  };

  ChebyshevM2L(M2LLayout layout, int order, double eps, std::vector<Level> levels)
      : layout_(layout), order_(order), eps_(eps), levels_(std::move(levels)) {}

  static ChebyshevM2L build(const KernelSpec& kernel, const Interpolator& interp,
                            const M2LLayout& layout, double eps);

  using SourceData = Eigen::MatrixXd;
  using TargetData = Eigen::MatrixXd;

  SourceData prepare(int level, const Eigen::MatrixXd& multipole) const;
  TargetData zero_target(int level, Eigen::Index n_cols) const;
  void accumulate(TargetData& acc, int level, int offset, const SourceData& source) const;
  void finalize(int level, const TargetData& acc, Eigen::MatrixXd& local) const;

  const M2LLayout& layout() const { return layout_; }
  int order() const { return order_; }
  double eps() const { return eps_; }
  const std::vector<Level>& levels() const { return levels_; }
  const Level& level_table(int level) const {
    return levels_[static_cast<std::size_t>(layout_.slot(level))];
  }
  std::size_t memory_bytes() const;

 private:
  M2LLayout layout_;
  int order_;
  double eps_;
  std::vector<Level> levels_;
};

/// Uniform-grid M2L: D_t is a 3-level nested Toeplitz matrix, applied through a
/// circulant embedding of size (2p-1)^3. Each offset stores the real-to-complex
/// DFT of its embedded kernel column (the Toeplitz symbol).
class UniformM2L {
 public:
  struct Level {
    std::vector<std::complex<double>> symbols;  ///< 316 blocks of complex_size()
  };

  UniformM2L(M2LLayout layout, int order, std::vector<Level> levels);

  static UniformM2L build(const KernelSpec& kernel, const Interpolator& interp,
                          const M2LLayout& layout);

  using SourceData = Eigen::MatrixXcd;
  using TargetData = Eigen::MatrixXcd;

  SourceData prepare(int level, const Eigen::MatrixXd& multipole) const;
  TargetData zero_target(int level, Eigen::Index n_cols) const;
  void accumulate(TargetData& acc, int level, int offset, const SourceData& source) const;
  void finalize(int level, const TargetData& acc, Eigen::MatrixXd& local) const;

  const M2LLayout& layout() const { return layout_; }
  int order() const { return order_; }
  int embedding() const { return 2 * order_ - 1; }
  std::size_t spectrum_size() const;
  const std::vector<Level>& levels() const { return levels_; }
  Eigen::Map<const Eigen::VectorXcd> symbol(int level, int offset) const;
  std::size_t memory_bytes() const;

 private:
  M2LLayout layout_;
  int order_;
  std::vector<Level> levels_;
  std::shared_ptr<const detail::RealFft3d> fft_;
};

/// Precomputed far-field translation operators for one plan and kernel.
class M2LTable {
 public:
  using Variant = std::variant<ChebyshevM2L, UniformM2L>;

  explicit M2LTable(Variant table) : table_(std::move(table)) {}

  SchemeKind scheme() const;
  const M2LLayout& layout() const;
  int order() const;
  const Variant& variant() const { return table_; }
  std::size_t memory_bytes() const;

  /// D_t * multipole at tree level `level` (up to compression tolerance).
  Eigen::MatrixXd apply(int offset, int level, const Eigen::MatrixXd& multipole) const;
  /// The p^3 x p^3 matrix this table applies for (offset, level).
  Eigen::MatrixXd dense(int offset, int level) const;

 private:
  Variant table_;
};

M2LLayout make_layout(const KernelSpec& kernel, const FmmPlan& plan);

/// Build the M2L table for every far-field level of the plan.
M2LTable precompute_m2l(const KernelSpec& kernel, const FmmPlan& plan);

/// Throws InternalError if `offset` is not one of the 316 far-field offsets.
Eigen::MatrixXd apply_m2l(const M2LTable& table, int offset, int level,
                          const Eigen::MatrixXd& multipole);

// Operator cache files.
//
// Layout (little-endian): 8-byte magic "BBFMMM2L", u32 version, u32 scheme,
// u64 FNV-1a hash of the kernel name, i32 order, i32 levels, f64 eps,
// f64 homogen, f64 domain length, i32 symmetry, i32 single_level, then per
// stored level either (i32 r_t, i32 r_s, i32 n_sv, f64 U[p^3 r_t], f64
// V[p^3 r_s], f64 sv[n_sv], f64 cores[316 r_t r_s]) for Chebyshev or
// (i64 count, f64 re/im pairs[count]) for the uniform scheme. Matrices are
// column-major.

/// Directory from BBFMM_CACHE_DIR, if set and non-empty.
std::optional<std::filesystem::path> cache_dir_from_env();
std::filesystem::path cache_file_path(const std::filesystem::path& dir, const KernelSpec& kernel,
                                      const FmmPlan& plan);
void save_m2l(const std::filesystem::path& file, const KernelSpec& kernel, const FmmPlan& plan,
              const M2LTable& table);
/// Nullopt when the file is missing, truncated, or its header does not match.
std::optional<M2LTable> load_m2l(const std::filesystem::path& file, const KernelSpec& kernel,
                                 const FmmPlan& plan);

/// Load from `dir` when a matching file exists, otherwise precompute and save.
/// `cache_hit` (optional) reports which path was taken.
M2LTable load_or_precompute_m2l(const KernelSpec& kernel, const FmmPlan& plan,
                                const std::optional<std::filesystem::path>& dir,
                                bool* cache_hit = nullptr);

}  // namespace bbfmm
