#include "bbfmm/engine.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "bbfmm/errors.hpp"
#include "bbfmm/parallel.hpp"
#include "bbfmm/stages.hpp"

namespace bbfmm {

void FmmPlan::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("invalid plan: " + what); };
  if (levels < 2) fail("levels must be >= 2 (got " + std::to_string(levels) + ")");
  if (levels > 10) fail("levels must be <= 10 (got " + std::to_string(levels) + ")");
  if (order < 1 || order > 16) fail("order must be in 1..16 (got " + std::to_string(order) + ")");
  if (!(eps > 0.0 && eps < 1.0)) fail("eps must be in (0, 1)");
  if (!(domain_length > 0.0) || !std::isfinite(domain_length)) fail("domain length must be positive");
  if (!domain_center.finite()) fail("domain center must be finite");
  if (n_cols < 1) fail("n_cols must be >= 1 (got " + std::to_string(n_cols) + ")");
}

int suggested_levels(std::size_t n_points) {
  if (n_points <= 60) return 2;
  const int l = static_cast<int>(std::lround(std::log(static_cast<double>(n_points) / 60.0) / std::log(8.0)));
  return std::clamp(l, 2, 10);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

const FmmPlan& validated(const FmmPlan& plan) {
  plan.validate();
  return plan;
}

void check_weights(std::size_t n_sources, const Eigen::MatrixXd& weights) {
  if (static_cast<std::size_t>(weights.rows()) != n_sources) {
    std::ostringstream msg;
    msg << "weights have " << weights.rows() << " rows but there are " << n_sources << " sources";
    throw ConfigError(msg.str());
  }
  if (weights.cols() < 1) throw ConfigError("weights need at least one column");
  if (!weights.allFinite()) throw ConfigError("weights contain non-finite entries");
}

}  // namespace

Fmm::Fmm(KernelSpec kernel, FmmPlan plan, FmmOptions options)
    : kernel_(std::move(kernel)),
      plan_(validated(plan)),
      options_(std::move(options)),
      tree_([&] {
        const auto start = Clock::now();
        Octree t(plan_.domain_center, plan_.domain_length, plan_.levels);
        times_.tree_build = seconds_since(start);
        return t;
      }()),
      interp_(plan_.scheme, plan_.order),
      table_([&] {
        set_num_threads(options_.threads);
        const auto start = Clock::now();
        const auto dir = options_.cache_dir ? options_.cache_dir : cache_dir_from_env();
        M2LTable t = load_or_precompute_m2l(kernel_, plan_, dir, &times_.cache_hit);
        times_.precompute = seconds_since(start);
        return t;
      }()) {}

Eigen::MatrixXd Fmm::evaluate(std::span<const Point3> sources, std::span<const Point3> targets,
                              const Eigen::MatrixXd& weights) {
  return run(sources, targets, weights, false);
}

Eigen::MatrixXd Fmm::evaluate(std::span<const Point3> points, const Eigen::MatrixXd& weights) {
  return run(points, points, weights, true);
}

Eigen::MatrixXd Fmm::run(std::span<const Point3> sources, std::span<const Point3> targets,
                         const Eigen::MatrixXd& weights, bool same_set) {
  check_weights(sources.size(), weights);
  set_num_threads(options_.threads);
  const Eigen::Index cols = weights.cols();

  auto start = Clock::now();
  tree_.distribute_points(sources, targets);
  const auto& sorder = tree_.source_order();
  const auto& torder = tree_.target_order();
  std::vector<Point3> src(sources.size()), tgt(targets.size());
  Eigen::MatrixXd w(weights.rows(), cols);
  for (std::size_t r = 0; r < sorder.size(); ++r) {
    src[r] = sources[sorder[r]];
    w.row(static_cast<Eigen::Index>(r)) = weights.row(static_cast<Eigen::Index>(sorder[r]));
  }
  for (std::size_t r = 0; r < torder.size(); ++r) tgt[r] = targets[torder[r]];
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(targets.size()), cols);
  times_.distribute = seconds_since(start);

  start = Clock::now();
  clear_expansions(tree_);
  upward_pass(interp_, tree_, src, w);
  times_.upward = seconds_since(start);

  start = Clock::now();
  if (options_.far_field) far_field_pass(tree_, table_, cols);
  times_.far_field = seconds_since(start);

  start = Clock::now();
  downward_pass(interp_, tree_, tgt, phi);
  times_.downward = seconds_since(start);

  start = Clock::now();
  near_field_pass(tree_, kernel_, src, tgt, w, phi, same_set && options_.exploit_symmetry);
  times_.near_field = seconds_since(start);

  Eigen::MatrixXd out(phi.rows(), cols);
  for (std::size_t r = 0; r < torder.size(); ++r) {
    out.row(static_cast<Eigen::Index>(torder[r])) = phi.row(static_cast<Eigen::Index>(r));
  }
  return out;
}

Eigen::MatrixXd evaluate(const KernelSpec& kernel, const FmmPlan& plan,
                         std::span<const Point3> sources, std::span<const Point3> targets,
                         const Eigen::MatrixXd& weights, const FmmOptions& options) {
  plan.validate();
  if (weights.cols() != plan.n_cols) {
    std::ostringstream msg;
    msg << "weights have " << weights.cols() << " columns but the plan expects " << plan.n_cols;
    throw ConfigError(msg.str());
  }
  Fmm fmm(kernel, plan, options);
  return fmm.evaluate(sources, targets, weights);
}

double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double denom = b.norm();
  const double diff = (a - b).norm();
  if (denom == 0.0) return diff;
  return diff / denom;
}

}  // namespace bbfmm
