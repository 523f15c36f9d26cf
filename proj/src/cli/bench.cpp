#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <omp.h>

#include "bbfmm/cli.hpp"
#include "bbfmm/errors.hpp"
#include "bbfmm/linops.hpp"
#include "bbfmm/parallel.hpp"
#include "inputs.hpp"

namespace bbfmm::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

class Csv {
 public:
  explicit Csv(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw InputError("cannot write " + path);
      file_.precision(10);
    }
  }
  void header(const std::string& metrics) {
    if (file_.is_open()) file_ << "mode," << config_csv_header() << ',' << metrics << '\n';
  }
  template <typename... T>
  void row(const std::string& mode, const RunConfig& c, int levels, const T&... metrics) {
    if (!file_.is_open()) return;
    file_ << mode << ',' << config_csv_row(c, levels);
    ((file_ << ',' << metrics), ...);
    file_ << '\n';
  }

 private:
  std::ofstream file_;
};

std::size_t count_or(const RunConfig& c, std::size_t fallback) {
  return c.count > 0 ? c.count : fallback;
}

int bench_convergence(RunConfig c, const BenchConfig& b, std::ostream& out, std::ostream& err) {
  const KernelSpec kernel = make_kernel(c.kernel);
  c.count = count_or(c, 2000);
  if (c.levels == 0) c.levels = 3;
  const Inputs in = load_inputs(c);
  if (in.sources.size() > kOracleLimit) {
    err << "error: convergence mode runs the direct oracle, limited to N <= " << kOracleLimit << '\n';
    return 1;
  }
  const std::vector<int> orders = b.orders.empty() ? std::vector<int>{2, 3, 4, 5, 6} : b.orders;
  const auto targets = in.target_span();
  const Eigen::MatrixXd exact = direct_evaluate(kernel, in.sources, targets, in.weights);

  Csv csv(c.out);
  csv.header("p,rel_error,precompute_s,evaluate_s");
  out << "convergence  kernel " << c.kernel << "  N " << in.sources.size() << "  levels " << c.levels
      << "  eps " << c.eps << '\n';
  out << std::setw(10) << "scheme" << std::setw(4) << "p" << std::setw(14) << "rel. error"
      << std::setw(12) << "time (s)" << '\n';
  for (SchemeKind scheme : {SchemeKind::Chebyshev, SchemeKind::Uniform}) {
    c.scheme = scheme;
    double previous = INFINITY;
    bool decreasing = true;
    for (int p : orders) {
      c.order = p;
      const FmmPlan plan = make_plan(c, in.sources.size());
      Fmm fmm(kernel, plan, make_options(c));
      const Eigen::MatrixXd phi = in.same_set ? fmm.evaluate(in.sources, in.weights)
                                              : fmm.evaluate(in.sources, targets, in.weights);
      const double e = relative_error(phi, exact);
      decreasing = decreasing && e < previous;
      previous = e;
      csv.row("convergence", c, plan.levels, p, e, fmm.times().precompute, fmm.times().evaluation());
      out << std::setw(10) << to_string(scheme) << std::setw(4) << p << std::setw(14)
          << std::scientific << std::setprecision(3) << e << std::setw(12) << std::fixed
          << std::setprecision(3) << fmm.times().evaluation() << std::defaultfloat << '\n';
    }
    out << "  " << to_string(scheme) << ": error strictly decreasing: " << (decreasing ? "yes" : "no")
        << '\n';
  }
  return 0;
}

int bench_nscaling(RunConfig c, const BenchConfig& b, std::ostream& out, std::ostream&) {
  const KernelSpec kernel = make_kernel(c.kernel);
  const std::vector<std::size_t> sizes =
      b.sizes.empty() ? std::vector<std::size_t>{10000, 80000, 640000} : b.sizes;
  const int base_levels = c.levels > 0 ? c.levels : suggested_levels(sizes.front());

  Csv csv(c.out);
  csv.header("N,precompute_s,evaluate_s,direct_s");
  out << "nscaling  kernel " << c.kernel << "  scheme " << to_string(c.scheme) << "  p " << c.order
      << '\n';
  out << std::setw(10) << "N" << std::setw(8) << "levels" << std::setw(14) << "evaluate (s)"
      << std::setw(12) << "direct (s)" << '\n';
  std::vector<double> ns, times, direct_ns, direct_times;
  for (std::size_t n : sizes) {
    c.count = n;
    // Depth grows by one per factor of 8 in N so leaves keep a fixed occupancy.
    c.levels = base_levels + static_cast<int>(std::lround(
                                 std::log(static_cast<double>(n) / static_cast<double>(sizes.front())) /
                                 std::log(8.0)));
    const Inputs in = load_inputs(c);
    const FmmPlan plan = make_plan(c, n);
    Fmm fmm(kernel, plan, make_options(c));
    fmm.evaluate(in.sources, in.weights);
    const double t = fmm.times().evaluation();
    double direct = NAN;
    if (n <= 20000) {
      const auto start = Clock::now();
      direct_evaluate(kernel, in.sources, in.sources, in.weights);
      direct = seconds_since(start);
      direct_ns.push_back(static_cast<double>(n));
      direct_times.push_back(direct);
    }
    ns.push_back(static_cast<double>(n));
    times.push_back(t);
    csv.row("nscaling", c, plan.levels, n, fmm.times().precompute, t, direct);
    out << std::setw(10) << n << std::setw(8) << plan.levels << std::setw(14) << std::fixed
        << std::setprecision(4) << t << std::setw(12) << direct << std::defaultfloat << '\n';
  }
  if (ns.size() >= 2) out << "fitted log-log slope (FMM): " << loglog_slope(ns, times) << '\n';
  if (direct_ns.size() >= 2) {
    out << "fitted log-log slope (direct): " << loglog_slope(direct_ns, direct_times) << '\n';
  }
  return 0;
}

int bench_threads(RunConfig c, const BenchConfig& b, std::ostream& out, std::ostream&) {
  const KernelSpec kernel = make_kernel(c.kernel);
  c.count = count_or(c, 100000);
  const std::vector<int> counts = b.thread_counts.empty() ? std::vector<int>{1, 2, 4} : b.thread_counts;
  const Inputs in = load_inputs(c);

  Csv csv(c.out);
  csv.header("threads_used,upward_s,far_field_s,downward_s,near_field_s,evaluate_s,speedup");
  out << "threads  kernel " << c.kernel << "  N " << in.sources.size() << "  processors "
      << omp_get_num_procs() << '\n';
  out << std::setw(8) << "threads" << std::setw(10) << "upward" << std::setw(10) << "far"
      << std::setw(10) << "downward" << std::setw(10) << "near" << std::setw(10) << "total"
      << std::setw(9) << "speedup" << '\n';
  double t1 = NAN;
  for (int threads : counts) {
    c.threads = threads;
    const FmmPlan plan = make_plan(c, in.sources.size());
    Fmm fmm(kernel, plan, make_options(c));
    fmm.evaluate(in.sources, in.weights);
    const StageTimes& t = fmm.times();
    if (std::isnan(t1)) t1 = t.evaluation();
    const double speedup = t1 / t.evaluation();
    csv.row("threads", c, plan.levels, threads, t.upward, t.far_field, t.downward, t.near_field,
            t.evaluation(), speedup);
    out << std::setw(8) << threads << std::fixed << std::setprecision(4) << std::setw(10) << t.upward
        << std::setw(10) << t.far_field << std::setw(10) << t.downward << std::setw(10)
        << t.near_field << std::setw(10) << t.evaluation() << std::setprecision(2) << std::setw(9)
        << speedup << std::defaultfloat << '\n';
  }
  return 0;
}

int bench_randsvd(RunConfig c, const BenchConfig& b, std::ostream& out, std::ostream& err) {
  constexpr std::size_t kDenseEigLimit = 10000;
  const KernelSpec kernel = make_kernel(c.kernel);
  c.count = count_or(c, 2000);
  if (c.count > kDenseEigLimit) {
    err << "error: randsvd mode compares against a dense eigensolver, limited to N <= "
        << kDenseEigLimit << '\n';
    return 1;
  }
  const std::vector<int> ranks = b.ranks.empty() ? std::vector<int>{100} : b.ranks;
  const Inputs in = load_inputs(c);
  const FmmPlan plan = make_plan(c, in.sources.size());
  Fmm fmm(kernel, plan, make_options(c));
  const auto n = static_cast<Eigen::Index>(in.sources.size());

  const int max_rank = *std::max_element(ranks.begin(), ranks.end());
  auto start = Clock::now();
  const EigenResult reference = dense_eig(kernel, in.sources, max_rank);
  const double dense_eig_time = seconds_since(start);

  Csv csv(c.out);
  csv.header("k,q,power_iterations,rel_error,fmm_s,dense_matvec_s,dense_eig_s");
  out << "randsvd  kernel " << c.kernel << "  N " << n << "  levels " << plan.levels << "  q "
      << b.oversample << "  power iterations " << b.power_iterations << '\n';
  out << std::setw(6) << "k" << std::setw(14) << "rel. error" << std::setw(12) << "fmm (s)"
      << std::setw(14) << "dense mv (s)" << '\n';
  for (int k : ranks) {
    RandEigOptions opt;
    opt.rank = k;
    opt.oversample = b.oversample;
    opt.power_iterations = b.power_iterations;
    opt.seed = c.seed;
    start = Clock::now();
    const EigenResult approx = randomized_eig(fmm_operator(fmm, in.sources), n, opt);
    const double fmm_time = seconds_since(start);
    double dense_time = NAN;
    if (b.dense_matvec) {
      start = Clock::now();
      randomized_eig(dense_operator(kernel, in.sources), n, opt);
      dense_time = seconds_since(start);
    }
    const Eigen::VectorXd ref = reference.eigenvalues.head(k);
    const double e = (approx.eigenvalues - ref).norm() / ref.norm();
    csv.row("randsvd", c, plan.levels, k, b.oversample, b.power_iterations, e, fmm_time, dense_time,
            dense_eig_time);
    out << std::setw(6) << k << std::setw(14) << std::scientific << std::setprecision(3) << e
        << std::fixed << std::setw(12) << fmm_time << std::setw(14) << dense_time << std::defaultfloat
        << '\n';
  }
  return 0;
}

}  // namespace

int cmd_bench(const RunConfig& config, const BenchConfig& bench, std::ostream& out,
              std::ostream& err) {
  if (bench.mode == "convergence") return bench_convergence(config, bench, out, err);
  if (bench.mode == "nscaling") return bench_nscaling(config, bench, out, err);
  if (bench.mode == "threads") return bench_threads(config, bench, out, err);
  if (bench.mode == "randsvd") return bench_randsvd(config, bench, out, err);
  throw ConfigError("unknown bench mode '" + bench.mode + "'");
}

}  // namespace bbfmm::cli
