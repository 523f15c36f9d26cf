#include "bbfmm/kernel.hpp"

#include <cmath>
#include <sstream>

#include "bbfmm/errors.hpp"

namespace bbfmm {

void throw_non_finite(const KernelSpec& kernel, const Point3& x, const Point3& y, double value) {
  std::ostringstream msg;
  msg.precision(17);
  msg << "kernel '" << kernel.name << "' returned non-finite value " << value << " for x=" << x
      << ", y=" << y;
  throw KernelError(msg.str());
}

double evaluate(const KernelSpec& kernel, const Point3& x, const Point3& y) {
  const double value = kernel.function(x, y);
  if (!std::isfinite(value)) throw_non_finite(kernel, x, y, value);
  return value;
}

double homogeneity_scale(const KernelSpec& kernel, double alpha) {
  if (!kernel.homogeneous()) {
    throw KernelError("homogeneity_scale called on inhomogeneous kernel '" + kernel.name + "'");
  }
  if (!(alpha > 0.0)) throw ConfigError("homogeneity_scale requires alpha > 0");
  return std::pow(alpha, kernel.homogen);
}

KernelSpec laplacian() {
  return {"laplacian",
          [](const Point3& x, const Point3& y) {
            const double r = distance(x, y);
            return r == 0.0 ? 0.0 : 1.0 / r;
          },
          -1.0, 1};
}

KernelSpec exponential() {
  return {"exponential", [](const Point3& x, const Point3& y) { return std::exp(-distance(x, y)); },
          0.0, 1};
}

KernelSpec gaussian() {
  return {"gaussian",
          [](const Point3& x, const Point3& y) {
            const Point3 d = x - y;
            return std::exp(-(d.x * d.x + d.y * d.y + d.z * d.z));
          },
          0.0, 1};
}

KernelSpec laplacian_force() {
  return {"laplacianforce",
          [](const Point3& x, const Point3& y) {
            const Point3 d = x - y;
            const double r2 = d.x * d.x + d.y * d.y + d.z * d.z;
            return r2 == 0.0 ? 0.0 : 1.0 / (r2 * r2);
          },
          -4.0, 1};
}

KernelSpec logarithm() {
  return {"logarithm",
          [](const Point3& x, const Point3& y) {
            const double r = distance(x, y);
            return r == 0.0 ? 0.0 : std::log(r);
          },
          0.0, 1};
}

const std::vector<std::string>& builtin_kernel_names() {
  static const std::vector<std::string> names = {"laplacian", "exponential", "gaussian",
                                                 "laplacianforce", "logarithm"};
  return names;
}

KernelSpec make_kernel(std::string_view name) {
  if (name == "laplacian") return laplacian();
  if (name == "exponential") return exponential();
  if (name == "gaussian") return gaussian();
  if (name == "laplacianforce") return laplacian_force();
  if (name == "logarithm") return logarithm();
  if (name == "custom") {
    throw ConfigError("kernel 'custom' must be supplied through the library API (KernelSpec)");
  }
  throw ConfigError("unknown kernel '" + std::string(name) + "'");
}

}  // namespace bbfmm
