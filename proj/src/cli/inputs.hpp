#pragma once

#include <span>
#include <vector>

#include "bbfmm/cli.hpp"

namespace bbfmm::cli {

struct Inputs {
  std::vector<Point3> sources;
  std::vector<Point3> targets;
  Eigen::MatrixXd weights;
  bool same_set = true;

  std::span<const Point3> target_span() const { return same_set ? sources : targets; }
};

/// Points and weights from the input file or the synthetic generator.
Inputs load_inputs(const RunConfig& config);

}  // namespace bbfmm::cli
