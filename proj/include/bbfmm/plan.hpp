#pragma once

#include "bbfmm/interpolation.hpp"
#include "bbfmm/point.hpp"

namespace bbfmm {

/// Everything that fixes the tree and the precomputed operators.
struct FmmPlan {
  int levels = 3;                 ///< leaf level L (root is level 0)
  int order = 4;                  ///< interpolation nodes per axis, p
  SchemeKind scheme = SchemeKind::Chebyshev;
  double eps = 1e-5;              ///< relative singular-value cutoff (Chebyshev)
  double domain_length = 1.0;
  Point3 domain_center{0.5, 0.5, 0.5};
  int n_cols = 1;                 ///< weight columns per evaluation
  bool use_homogeneity = true;    ///< one scaled table level for homogeneous kernels

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
};

/// Tree depth that puts roughly 60 points in each leaf: max(2, round(log8(n/60))).
int suggested_levels(std::size_t n_points);

}  // namespace bbfmm
