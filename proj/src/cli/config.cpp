#include <sstream>

#include "bbfmm/cli.hpp"
#include "bbfmm/errors.hpp"

namespace bbfmm::cli {

SchemeKind parse_scheme(const std::string& name) {
  if (name == "chebyshev" || name == "cheb") return SchemeKind::Chebyshev;
  if (name == "uniform") return SchemeKind::Uniform;
  throw ConfigError("unknown scheme '" + name + "' (expected chebyshev or uniform)");
}

FmmPlan make_plan(const RunConfig& config, std::size_t n_points) {
  FmmPlan plan;
  plan.levels = config.levels > 0 ? config.levels : suggested_levels(n_points);
  plan.order = config.order;
  plan.scheme = config.scheme;
  plan.eps = config.eps;
  plan.domain_length = config.domain_length;
  plan.domain_center = config.domain_center;
  plan.n_cols = config.n_cols;
  plan.validate();
  return plan;
}

FmmOptions make_options(const RunConfig& config) {
  FmmOptions options;
  options.cache_dir = config.cache_dir;
  options.threads = config.threads;
  return options;
}

std::string config_csv_header() {
  return "kernel,scheme,order,levels,eps,ncols,domain_length,center_x,center_y,center_z,"
         "sources,targets,count,distribution,seed,threads";
}

std::string config_csv_row(const RunConfig& c, int levels) {
  std::ostringstream os;
  os.precision(17);
  os << c.kernel << ',' << to_string(c.scheme) << ',' << c.order << ',' << levels << ',' << c.eps
     << ',' << c.n_cols << ',' << c.domain_length << ',' << c.domain_center.x << ','
     << c.domain_center.y << ',' << c.domain_center.z << ',' << c.sources_path << ','
     << c.targets_path << ',' << c.count << ',' << c.distribution << ',' << c.seed << ','
     << c.threads;
  return os.str();
}

}  // namespace bbfmm::cli
