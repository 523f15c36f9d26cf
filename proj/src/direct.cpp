#include <cmath>
#include <sstream>

#include "bbfmm/engine.hpp"
#include "bbfmm/errors.hpp"
#include "bbfmm/parallel.hpp"

namespace bbfmm {

Eigen::MatrixXd direct_evaluate(const KernelSpec& kernel, std::span<const Point3> sources,
                                std::span<const Point3> targets, const Eigen::MatrixXd& weights) {
  if (static_cast<std::size_t>(weights.rows()) != sources.size()) {
    std::ostringstream msg;
    msg << "weights have " << weights.rows() << " rows but there are " << sources.size() << " sources";
    throw ConfigError(msg.str());
  }
  const Eigen::Index cols = weights.cols();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(targets.size()), cols);
  parallel_for(static_cast<std::ptrdiff_t>(targets.size()), [&](std::ptrdiff_t i) {
    std::vector<long double> acc(static_cast<std::size_t>(cols), 0.0L);
    for (std::size_t j = 0; j < sources.size(); ++j) {
      const double k = kernel.function(targets[static_cast<std::size_t>(i)], sources[j]);
      if (!std::isfinite(k)) throw_non_finite(kernel, targets[static_cast<std::size_t>(i)], sources[j], k);
      for (Eigen::Index c = 0; c < cols; ++c) {
        acc[static_cast<std::size_t>(c)] +=
            static_cast<long double>(k) * weights(static_cast<Eigen::Index>(j), c);
      }
    }
    for (Eigen::Index c = 0; c < cols; ++c) out(i, c) = static_cast<double>(acc[static_cast<std::size_t>(c)]);
  });
  return out;
}

}  // namespace bbfmm
