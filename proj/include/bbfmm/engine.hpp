#pragma once

#include <filesystem>
#include <optional>
#include <span>

#include <Eigen/Core>

#include "bbfmm/kernel.hpp"
#include "bbfmm/octree.hpp"
#include "bbfmm/operators.hpp"
#include "bbfmm/plan.hpp"

namespace bbfmm {

struct FmmOptions {
  /// Operator cache directory; nullopt falls back to BBFMM_CACHE_DIR, and with
  /// neither set the tables are always recomputed.
  std::optional<std::filesystem::path> cache_dir;
  int threads = 0;               ///< 0 keeps the OpenMP default
  bool far_field = true;         ///< false skips M2L (diagnostics only)
  bool exploit_symmetry = true;  ///< pairwise near field for one symmetric point set
};

/// Wall-clock seconds per stage. Tree build and precompute are paid once per
/// Fmm object, the rest per evaluate call (last call).
struct StageTimes {
  double tree_build = 0.0;
  double precompute = 0.0;
  bool cache_hit = false;
  double distribute = 0.0;
  double upward = 0.0;
  double far_field = 0.0;
  double downward = 0.0;
  double near_field = 0.0;

  double evaluation() const { return distribute + upward + far_field + downward + near_field; }
};

/// A built tree plus precomputed M2L operators, reusable across evaluations
/// with any point sets inside the domain and any number of weight columns.
class Fmm {
 public:
  Fmm(KernelSpec kernel, FmmPlan plan, FmmOptions options = {});

  /// phi (targets x cols) with phi_i = sum_j K(x_i, y_j) sigma_j.
  Eigen::MatrixXd evaluate(std::span<const Point3> sources, std::span<const Point3> targets,
                           const Eigen::MatrixXd& weights);
  /// Sources and targets are the same set.
  Eigen::MatrixXd evaluate(std::span<const Point3> points, const Eigen::MatrixXd& weights);

  const KernelSpec& kernel() const { return kernel_; }
  const FmmPlan& plan() const { return plan_; }
  const Octree& tree() const { return tree_; }
  const M2LTable& table() const { return table_; }
  const StageTimes& times() const { return times_; }
  std::size_t operator_bytes() const { return table_.memory_bytes(); }

 private:
  Eigen::MatrixXd run(std::span<const Point3> sources, std::span<const Point3> targets,
                      const Eigen::MatrixXd& weights, bool same_set);

  KernelSpec kernel_;
  FmmPlan plan_;
  FmmOptions options_;
  StageTimes times_;
  Octree tree_;
  Interpolator interp_;
  M2LTable table_;
};

/// One-shot evaluation; `weights` must have plan.n_cols columns.
Eigen::MatrixXd evaluate(const KernelSpec& kernel, const FmmPlan& plan,
                         std::span<const Point3> sources, std::span<const Point3> targets,
                         const Eigen::MatrixXd& weights, const FmmOptions& options = {});

/// Exact O(N M) summation with long double accumulation.
Eigen::MatrixXd direct_evaluate(const KernelSpec& kernel, std::span<const Point3> sources,
                                std::span<const Point3> targets, const Eigen::MatrixXd& weights);

/// ||a - b||_F / ||b||_F (0 when both are zero).
double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace bbfmm
