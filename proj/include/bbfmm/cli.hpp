#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bbfmm/engine.hpp"
#include "bbfmm/point.hpp"

namespace bbfmm::cli {

/// Malformed input file; the message names the file and line.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string kernel;
  SchemeKind scheme = SchemeKind::Chebyshev;
  int order = 4;
  int levels = 0;  ///< 0: suggested from the point count
  double eps = 1e-5;
  int n_cols = 1;
  double domain_length = 1.0;
  Point3 domain_center{0.5, 0.5, 0.5};
  std::string sources_path;
  std::string targets_path;
  std::size_t count = 0;  ///< synthetic point count when no input file is given
  std::string distribution = "uniform";
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out;
  std::optional<std::filesystem::path> cache_dir;
};

SchemeKind parse_scheme(const std::string& name);

/// Plan for `n_points`; fills in the suggested tree depth when levels == 0.
FmmPlan make_plan(const RunConfig& config, std::size_t n_points);
FmmOptions make_options(const RunConfig& config);

/// Comma-separated echo of every RunConfig field (and its header), so each
/// bench row is self-describing.
std::string config_csv_header();
std::string config_csv_row(const RunConfig& config, int levels);

struct PointSet {
  std::vector<Point3> points;
  Eigen::MatrixXd weights;  ///< N x m, m = 0 when the file has no weight columns
};

/// CSV with a header row x,y,z[,w1..wm], or the binary format: 16-byte magic
/// "BBFMM-POINTS-V1" (NUL padded), u64 N, u64 m, then N rows of 3+m float64.
PointSet read_points(const std::filesystem::path& file);
void write_points_csv(const std::filesystem::path& file, const PointSet& set);
void write_points_binary(const std::filesystem::path& file, const PointSet& set);
/// Header phi1..phim, one row per target, 17 significant digits.
void write_potentials(std::ostream& os, const Eigen::MatrixXd& phi);

/// `count` points with the given distribution ("uniform" in the domain cube or
/// "sphere" on its inscribed sphere) and `cols` weight columns uniform in
/// [-1, 1], all from `seed`.
PointSet synthetic_points(const std::string& distribution, std::size_t count, int cols,
                          std::uint64_t seed, const Point3& center, double length);

/// Largest N accepted by commands that run the O(N^2) oracle.
inline constexpr std::size_t kOracleLimit = 100000;

int cmd_evaluate(const RunConfig& config, bool check, std::ostream& out, std::ostream& err);

struct BenchConfig {
  std::string mode;               ///< convergence | nscaling | threads | randsvd
  std::vector<int> orders;        ///< convergence
  std::vector<std::size_t> sizes; ///< nscaling
  std::vector<int> thread_counts; ///< threads
  std::vector<int> ranks;         ///< randsvd
  int oversample = 20;
  int power_iterations = 1;
  bool dense_matvec = false;      ///< randsvd: also time the exact-matvec run
};

int cmd_bench(const RunConfig& config, const BenchConfig& bench, std::ostream& out,
              std::ostream& err);

/// Full command line: parse, dispatch, map errors to exit codes (2 for usage
/// and configuration errors, 1 for runtime failures).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bbfmm::cli
