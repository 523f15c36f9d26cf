#pragma once

#include <complex>
#include <cstddef>

namespace bbfmm::detail {

/// Real <-> half-complex 3D DFT on an n^3 grid (row-major, last axis halved).
/// Plans are created once; transforms are safe to run concurrently.
class RealFft3d {
 public:
  explicit RealFft3d(int n);
  ~RealFft3d();
  RealFft3d(const RealFft3d&) = delete;
  RealFft3d& operator=(const RealFft3d&) = delete;

  int n() const { return n_; }
  std::size_t real_size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
  std::size_t complex_size() const { return static_cast<std::size_t>(n_) * n_ * (n_ / 2 + 1); }

  void forward(double* in, std::complex<double>* out) const;
  /// Unnormalized inverse; destroys `in`.
  void inverse(std::complex<double>* in, double* out) const;

 private:
  int n_;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

}  // namespace bbfmm::detail
