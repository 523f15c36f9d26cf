#include <cmath>
#include <sstream>

#include "bbfmm/errors.hpp"
#include "bbfmm/operators.hpp"
#include "bbfmm/parallel.hpp"
#include "fft.hpp"

namespace bbfmm {

namespace {

// Kernel column of the circulant embedding for one offset. On a uniform grid
// D_t(a, b) depends only on b - a, so with embedding size n = 2p - 1 the
// product D_t m is the window a in [0, p)^3 of the cyclic convolution G * m
// where G[e] = k(b - a = -e) and e is taken modulo n.
std::vector<double> embedded_kernel(const KernelSpec& kernel, const Interpolator& interp,
                                    double width, int offset) {
  const int p = interp.order();
  const int n = 2 * p - 1;
  const Offset& t = offset_set()[static_cast<std::size_t>(offset)];
  const double h = 0.5 * width;
  const auto& u = interp.nodes();

  // Per axis: for embedded index j, the node pair (a, b) with b - a = -e(j).
  std::vector<double> target_coord(static_cast<std::size_t>(n)), source_shift(target_coord.size());
  for (int j = 0; j < n; ++j) {
    const int e = j <= p - 1 ? j : j - n;
    const int d = -e;
    const int a = d >= 0 ? 0 : -d;
    const int b = d >= 0 ? d : 0;
    target_coord[static_cast<std::size_t>(j)] = h * u[static_cast<std::size_t>(a)];
    source_shift[static_cast<std::size_t>(j)] = h * u[static_cast<std::size_t>(b)];
  }

  std::vector<double> g(static_cast<std::size_t>(n) * n * n);
  std::size_t idx = 0;
  for (int jx = 0; jx < n; ++jx)
    for (int jy = 0; jy < n; ++jy)
      for (int jz = 0; jz < n; ++jz, ++idx) {
        const Point3 x{target_coord[static_cast<std::size_t>(jx)],
                       target_coord[static_cast<std::size_t>(jy)],
                       target_coord[static_cast<std::size_t>(jz)]};
        const Point3 y{t[0] * width + source_shift[static_cast<std::size_t>(jx)],
                       t[1] * width + source_shift[static_cast<std::size_t>(jy)],
                       t[2] * width + source_shift[static_cast<std::size_t>(jz)]};
        const double v = kernel.function(x, y);
        if (!std::isfinite(v)) {
          std::ostringstream msg;
          msg.precision(17);
          msg << "M2L precompute aborted at offset (" << t[0] << ", " << t[1] << ", " << t[2]
              << "): kernel '" << kernel.name << "' returned " << v << " for x=" << x
              << ", y=" << y;
          throw KernelError(msg.str());
        }
        g[idx] = v;
      }
  return g;
}

}  // namespace

UniformM2L::UniformM2L(M2LLayout layout, int order, std::vector<Level> levels)
    : layout_(layout),
      order_(order),
      levels_(std::move(levels)),
      fft_(std::make_shared<detail::RealFft3d>(2 * order - 1)) {}

UniformM2L UniformM2L::build(const KernelSpec& kernel, const Interpolator& interp,
                             const M2LLayout& layout) {
  if (interp.scheme() != SchemeKind::Uniform) {
    throw ConfigError("uniform M2L requires a uniform interpolator");
  }
  const detail::RealFft3d fft(2 * interp.order() - 1);
  const std::size_t spectrum = fft.complex_size();
  std::vector<Level> levels(static_cast<std::size_t>(layout.stored_levels()));
  for (int s = 0; s < layout.stored_levels(); ++s) {
    const double width = layout.cell_width(layout.slot_level(s));
    auto& symbols = levels[static_cast<std::size_t>(s)].symbols;
    symbols.resize(spectrum * kNumOffsets);
    parallel_for(kNumOffsets, [&](std::ptrdiff_t t) {
      std::vector<double> g = embedded_kernel(kernel, interp, width, static_cast<int>(t));
      fft.forward(g.data(), symbols.data() + static_cast<std::size_t>(t) * spectrum);
    });
  }
  return UniformM2L(layout, interp.order(), std::move(levels));
}

std::size_t UniformM2L::spectrum_size() const { return fft_->complex_size(); }

Eigen::Map<const Eigen::VectorXcd> UniformM2L::symbol(int level, int offset) const {
  const auto& symbols = levels_[static_cast<std::size_t>(layout_.slot(level))].symbols;
  const std::size_t size = spectrum_size();
  return {symbols.data() + static_cast<std::size_t>(offset) * size,
          static_cast<Eigen::Index>(size)};
}

UniformM2L::SourceData UniformM2L::prepare(int /*level*/, const Eigen::MatrixXd& multipole) const {
  const int p = order_;
  const int n = embedding();
  SourceData out(static_cast<Eigen::Index>(spectrum_size()), multipole.cols());
  std::vector<double> grid(fft_->real_size());
  for (Eigen::Index c = 0; c < multipole.cols(); ++c) {
    std::fill(grid.begin(), grid.end(), 0.0);
    Eigen::Index a = 0;
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j)
        for (int k = 0; k < p; ++k, ++a)
          grid[static_cast<std::size_t>((i * n + j) * n + k)] = multipole(a, c);
    fft_->forward(grid.data(), out.col(c).data());
  }
  return out;
}

UniformM2L::TargetData UniformM2L::zero_target(int /*level*/, Eigen::Index n_cols) const {
  return TargetData::Zero(static_cast<Eigen::Index>(spectrum_size()), n_cols);
}

void UniformM2L::accumulate(TargetData& acc, int level, int offset,
                            const SourceData& source) const {
  acc.array() += source.array().colwise() * symbol(level, offset).array();
}

void UniformM2L::finalize(int level, const TargetData& acc, Eigen::MatrixXd& local) const {
  const int p = order_;
  const int n = embedding();
  const double scale = layout_.scale(level) / static_cast<double>(fft_->real_size());
  Eigen::VectorXcd spectrum;
  std::vector<double> grid(fft_->real_size());
  for (Eigen::Index c = 0; c < acc.cols(); ++c) {
    spectrum = acc.col(c);
    fft_->inverse(spectrum.data(), grid.data());
    Eigen::Index a = 0;
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j)
        for (int k = 0; k < p; ++k, ++a)
          local(a, c) += scale * grid[static_cast<std::size_t>((i * n + j) * n + k)];
  }
}

std::size_t UniformM2L::memory_bytes() const {
  std::size_t n = 0;
  for (const auto& l : levels_) n += l.symbols.size();
  return n * sizeof(std::complex<double>);
}

}  // namespace bbfmm
