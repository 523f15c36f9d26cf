#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bbfmm/cli.hpp"
#include "bbfmm/errors.hpp"
#include "bbfmm/parallel.hpp"
#include "inputs.hpp"

namespace bbfmm::cli {

Inputs load_inputs(const RunConfig& config) {
  Inputs in;
  if (!config.sources_path.empty()) {
    PointSet set = read_points(config.sources_path);
    in.sources = std::move(set.points);
    if (set.weights.cols() == 0) {
      in.weights = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(in.sources.size()), config.n_cols);
    } else if (set.weights.cols() == config.n_cols) {
      in.weights = std::move(set.weights);
    } else {
      throw ConfigError(config.sources_path + " has " + std::to_string(set.weights.cols()) +
                        " weight columns but --ncols is " + std::to_string(config.n_cols));
    }
  } else if (config.count > 0) {
    PointSet set = synthetic_points(config.distribution, config.count, config.n_cols, config.seed,
                                    config.domain_center, config.domain_length);
    in.sources = std::move(set.points);
    in.weights = std::move(set.weights);
  } else {
    throw ConfigError("no input points: give --sources FILE or --count N");
  }
  if (!config.targets_path.empty()) {
    in.targets = read_points(config.targets_path).points;
    in.same_set = false;
  }
  return in;
}

namespace {

std::string format_bytes(std::size_t bytes) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << static_cast<double>(bytes) / (1024.0 * 1024.0)
     << " MiB (" << bytes << " bytes)";
  return os.str();
}

void report(std::ostream& os, const RunConfig& config, const FmmPlan& plan, const Fmm& fmm,
            std::size_t n, std::size_t m) {
  const StageTimes& t = fmm.times();
  auto line = [&](const char* name, double s) {
    os << "  " << std::left << std::setw(18) << name << std::right << std::fixed
       << std::setprecision(4) << s << " s\n";
  };
  os << "kernel " << config.kernel << "  scheme " << to_string(plan.scheme) << "  p " << plan.order
     << "  levels " << plan.levels << "  eps " << std::defaultfloat << plan.eps << "  sources " << n
     << "  targets " << m << "  ncols " << plan.n_cols << "  threads " << max_threads() << '\n';
  os << "pre-computation\n";
  line("tree build", t.tree_build);
  line(t.cache_hit ? "M2L (cache hit)" : "M2L precompute", t.precompute);
  os << "computation\n";
  line("distribute", t.distribute);
  line("upward", t.upward);
  line("far field", t.far_field);
  line("downward", t.downward);
  line("near field", t.near_field);
  line("total", t.evaluation());
  os << "operator table      " << format_bytes(fmm.operator_bytes()) << '\n' << std::defaultfloat;
}

}  // namespace

int cmd_evaluate(const RunConfig& config, bool check, std::ostream& out, std::ostream& err) {
  const KernelSpec kernel = make_kernel(config.kernel);
  const Inputs in = load_inputs(config);
  const auto targets = in.target_span();
  const FmmPlan plan = make_plan(config, in.sources.size());
  if (check && std::max(in.sources.size(), targets.size()) > kOracleLimit) {
    err << "error: --check runs the direct oracle, limited to N <= " << kOracleLimit << '\n';
    return 1;
  }

  Fmm fmm(kernel, plan, make_options(config));
  const Eigen::MatrixXd phi =
      in.same_set ? fmm.evaluate(in.sources, in.weights) : fmm.evaluate(in.sources, targets, in.weights);

  std::ostream* report_stream = &out;
  if (config.out.empty()) {
    write_potentials(out, phi);
    report_stream = &err;
  } else {
    std::ofstream file(config.out);
    if (!file) throw InputError("cannot write " + config.out);
    write_potentials(file, phi);
  }
  report(*report_stream, config, plan, fmm, in.sources.size(), targets.size());
  if (check) {
    const Eigen::MatrixXd exact = direct_evaluate(kernel, in.sources, targets, in.weights);
    *report_stream << "relative error vs direct sum: " << std::scientific << std::setprecision(3)
                   << relative_error(phi, exact) << std::defaultfloat << '\n';
  }
  return 0;
}

namespace {

CLI::Option* add_common(CLI::App& app, RunConfig& c, std::string& scheme,
                        std::vector<double>& center, std::string& cache_dir) {
  app.add_option("--kernel", c.kernel, "laplacian|exponential|gaussian|laplacianforce|logarithm")
      ->required();
  app.add_option("--scheme", scheme, "chebyshev|uniform")->capture_default_str();
  app.add_option("--order,-p", c.order, "interpolation order p")->capture_default_str();
  app.add_option("--levels,-L", c.levels, "tree depth (0: from N)")->capture_default_str();
  CLI::Option* eps = app.add_option("--eps", c.eps, "SVD truncation tolerance")->capture_default_str();
  app.add_option("--ncols", c.n_cols, "weight columns")->capture_default_str();
  app.add_option("--threads", c.threads, "worker threads (0: default)")->capture_default_str();
  app.add_option("--seed", c.seed, "seed for synthetic data")->capture_default_str();
  app.add_option("--cache-dir", cache_dir, "operator cache directory (default $BBFMM_CACHE_DIR)");
  app.add_option("--out,-o", c.out, "output file");
  app.add_option("--sources", c.sources_path, "source points (CSV or binary)");
  app.add_option("--targets", c.targets_path, "target points (default: the sources)");
  app.add_option("--count,-n", c.count, "synthetic point count");
  app.add_option("--distribution", c.distribution, "uniform|sphere")->capture_default_str();
  app.add_option("--domain-length", c.domain_length)->capture_default_str();
  app.add_option("--domain-center", center)->expected(3);
  return eps;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Black-box fast multipole method for 3D kernel sums"};
  app.require_subcommand(1);

  RunConfig config;
  std::string scheme = "chebyshev";
  std::vector<double> center;
  std::string cache_dir;
  bool check = false;
  BenchConfig bench;

  CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate the kernel sum for one input");
  add_common(*evaluate, config, scheme, center, cache_dir);
  evaluate->add_flag("--check", check, "compare against the direct sum");

  CLI::App* bench_cmd = app.add_subcommand("bench", "accuracy and performance benchmarks");
  CLI::Option* bench_eps = add_common(*bench_cmd, config, scheme, center, cache_dir);
  bench_cmd->add_option("--mode", bench.mode, "convergence|nscaling|threads|randsvd")
      ->required()
      ->check(CLI::IsMember({"convergence", "nscaling", "threads", "randsvd"}));
  bench_cmd->add_option("--orders", bench.orders, "orders for convergence (default 2..6)");
  bench_cmd->add_option("--sizes", bench.sizes, "point counts for nscaling");
  bench_cmd->add_option("--thread-counts", bench.thread_counts, "thread counts for threads mode");
  bench_cmd->add_option("--ranks", bench.ranks, "ranks k for randsvd");
  bench_cmd->add_option("--oversample", bench.oversample)->capture_default_str();
  bench_cmd->add_option("--power-iterations", bench.power_iterations)->capture_default_str();
  bench_cmd->add_flag("--dense-matvec", bench.dense_matvec, "randsvd: also time the exact matvec");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    config.scheme = parse_scheme(scheme);
    if (!center.empty()) config.domain_center = {center[0], center[1], center[2]};
    if (!cache_dir.empty()) config.cache_dir = cache_dir;
    if (config.n_cols < 1) throw ConfigError("--ncols must be >= 1");
    if (*evaluate) return cmd_evaluate(config, check, out, err);
    // Convergence runs measure interpolation error, so by default keep the SVD
    // truncation well below it.
    if (bench.mode == "convergence" && bench_eps->count() == 0) config.eps = 1e-12;
    return cmd_bench(config, bench, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace bbfmm::cli
