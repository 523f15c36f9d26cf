#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "bbfmm/point.hpp"

namespace bbfmm {

/// Black-box kernel: a pointwise evaluation callback plus the two metadata
/// flags the FMM exploits.
///
/// `homogen` is the degree m with K(a*x, a*y) = a^m K(x, y), or 0 when the
/// kernel is not homogeneous. `symmetry` is 1 for K(x,y) = K(y,x), -1 for
/// K(x,y) = -K(y,x) and 0 otherwise.
///
/// The precomputed far-field operators assume the kernel depends on x - y only
/// (translation invariance); this holds for every built-in kernel.
struct KernelSpec {
  using Function = std::function<double(const Point3&, const Point3&)>;

  std::string name;
  Function function;
  double homogen = 0.0;
  int symmetry = 0;

  bool homogeneous() const { return homogen != 0.0; }
};

/// K(x, y), throwing KernelError naming the pair if the value is not finite.
double evaluate(const KernelSpec& kernel, const Point3& x, const Point3& y);

/// a^m for a homogeneous kernel of degree m. Throws KernelError for an
/// inhomogeneous kernel and ConfigError for a <= 0.
double homogeneity_scale(const KernelSpec& kernel, double alpha);

/// Throws KernelError with the offending pair; shared by every stage that
/// evaluates kernels in bulk.
[[noreturn]] void throw_non_finite(const KernelSpec& kernel, const Point3& x, const Point3& y,
                                   double value);

// Built-in kernels. Singular kernels return 0 at r = 0 (a point does not
// interact with itself).
KernelSpec laplacian();       ///< 1/r
KernelSpec exponential();     ///< exp(-r)
KernelSpec gaussian();        ///< exp(-r^2)
KernelSpec laplacian_force(); ///< 1/r^4
KernelSpec logarithm();       ///< log(r)

/// Look up a built-in kernel by its CLI name. "custom" has no built-in
/// definition and, like any unknown name, throws ConfigError.
KernelSpec make_kernel(std::string_view name);

const std::vector<std::string>& builtin_kernel_names();

}  // namespace bbfmm
