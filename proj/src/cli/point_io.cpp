#include <charconv>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "bbfmm/cli.hpp"
#include "bbfmm/errors.hpp"

namespace bbfmm::cli {

namespace {

constexpr char kMagic[16] = "BBFMM-POINTS-V1";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void fail(const std::filesystem::path& file, std::size_t line, const std::string& what) {
  throw InputError(file.string() + ":" + std::to_string(line) + ": " + what);
}

PointSet read_csv(const std::filesystem::path& file, std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line)) fail(file, 1, "empty file, expected header x,y,z[,w1..]");
  ++lineno;
  const auto header = split(line);
  if (header.size() < 3 || header[0] != "x" || header[1] != "y" || header[2] != "z") {
    fail(file, lineno, "header must start with x,y,z");
  }
  const std::size_t cols = header.size();
  PointSet set;
  std::vector<double> w;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != cols) {
      fail(file, lineno, "expected " + std::to_string(cols) + " fields, found " +
                             std::to_string(fields.size()));
    }
    std::vector<double> row(cols);
    for (std::size_t c = 0; c < cols; ++c) {
      const auto f = fields[c];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row[c]);
      if (ec != std::errc() || ptr != f.data() + f.size() || f.empty()) {
        fail(file, lineno, "field " + std::to_string(c + 1) + " '" + std::string(f) +
                               "' is not a number");
      }
    }
    set.points.push_back({row[0], row[1], row[2]});
    w.insert(w.end(), row.begin() + 3, row.end());
  }
  const auto m = static_cast<Eigen::Index>(cols - 3);
  set.weights.resize(static_cast<Eigen::Index>(set.points.size()), m);
  for (Eigen::Index i = 0; i < set.weights.rows(); ++i)
    for (Eigen::Index c = 0; c < m; ++c) set.weights(i, c) = w[static_cast<std::size_t>(i * m + c)];
  return set;
}

PointSet read_binary(const std::filesystem::path& file, std::istream& is) {
  std::uint64_t n = 0, m = 0;
  if (!is.read(reinterpret_cast<char*>(&n), 8) || !is.read(reinterpret_cast<char*>(&m), 8)) {
    throw InputError(file.string() + ": truncated binary header");
  }
  if (m > 1024) throw InputError(file.string() + ": implausible weight column count " + std::to_string(m));
  PointSet set;
  set.points.resize(n);
  set.weights.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  std::vector<double> row(3 + m);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (!is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * 8))) {
      throw InputError(file.string() + ": truncated at record " + std::to_string(i));
    }
    set.points[i] = {row[0], row[1], row[2]};
    for (std::uint64_t c = 0; c < m; ++c)
      set.weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[3 + c];
  }
  return set;
}

}  // namespace

PointSet read_points(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw InputError("cannot open " + file.string());
  char magic[16] = {};
  is.read(magic, sizeof magic);
  if (is.gcount() == sizeof magic && std::memcmp(magic, kMagic, sizeof magic) == 0) {
    return read_binary(file, is);
  }
  is.clear();
  is.seekg(0);
  return read_csv(file, is);
}

void write_points_csv(const std::filesystem::path& file, const PointSet& set) {
  std::ofstream os(file);
  if (!os) throw InputError("cannot write " + file.string());
  os.precision(17);
  os << "x,y,z";
  for (Eigen::Index c = 0; c < set.weights.cols(); ++c) os << ",w" << c + 1;
  os << '\n';
  for (std::size_t i = 0; i < set.points.size(); ++i) {
    const Point3& p = set.points[i];
    os << p.x << ',' << p.y << ',' << p.z;
    for (Eigen::Index c = 0; c < set.weights.cols(); ++c) os << ',' << set.weights(static_cast<Eigen::Index>(i), c);
    os << '\n';
  }
}

void write_points_binary(const std::filesystem::path& file, const PointSet& set) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw InputError("cannot write " + file.string());
  os.write(kMagic, sizeof kMagic);
  const std::uint64_t n = set.points.size();
  const std::uint64_t m = static_cast<std::uint64_t>(set.weights.cols());
  os.write(reinterpret_cast<const char*>(&n), 8);
  os.write(reinterpret_cast<const char*>(&m), 8);
  std::vector<double> row(3 + m);
  for (std::uint64_t i = 0; i < n; ++i) {
    row[0] = set.points[i].x;
    row[1] = set.points[i].y;
    row[2] = set.points[i].z;
    for (std::uint64_t c = 0; c < m; ++c)
      row[3 + c] = set.weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * 8));
  }
}

void write_potentials(std::ostream& os, const Eigen::MatrixXd& phi) {
  const auto old = os.precision(17);
  for (Eigen::Index c = 0; c < phi.cols(); ++c) os << (c ? ",phi" : "phi") << c + 1;
  os << '\n';
  for (Eigen::Index i = 0; i < phi.rows(); ++i) {
    for (Eigen::Index c = 0; c < phi.cols(); ++c) os << (c ? "," : "") << phi(i, c);
    os << '\n';
  }
  os.precision(old);
}

PointSet synthetic_points(const std::string& distribution, std::size_t count, int cols,
                          std::uint64_t seed, const Point3& center, double length) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> weight(-1.0, 1.0);
  std::normal_distribution<double> normal;
  PointSet set;
  set.points.resize(count);
  const Point3 low{center.x - 0.5 * length, center.y - 0.5 * length, center.z - 0.5 * length};
  for (auto& p : set.points) {
    if (distribution == "uniform") {
      p = {low.x + length * unit(rng), low.y + length * unit(rng), low.z + length * unit(rng)};
    } else if (distribution == "sphere") {
      Point3 d{normal(rng), normal(rng), normal(rng)};
      const double r = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
      p = center + ((0.5 - 1e-12) * length / r) * d;
    } else {
      throw ConfigError("unknown distribution '" + distribution + "' (expected uniform or sphere)");
    }
  }
  set.weights.resize(static_cast<Eigen::Index>(count), cols);
  for (Eigen::Index i = 0; i < set.weights.rows(); ++i)
    for (Eigen::Index c = 0; c < cols; ++c) set.weights(i, c) = weight(rng);
  return set;
}

}  // namespace bbfmm::cli
