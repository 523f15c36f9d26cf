#include "fft.hpp"

#include <mutex>
#include <vector>

#include <fftw3.h>

namespace bbfmm::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft3d::RealFft3d(int n) : n_(n) {
  std::vector<double> real(real_size());
  std::vector<std::complex<double>> spectrum(complex_size());
  auto* c = reinterpret_cast<fftw_complex*>(spectrum.data());
  std::lock_guard<std::mutex> lock(planner_mutex());
  forward_plan_ = fftw_plan_dft_r2c_3d(n, n, n, real.data(), c, FFTW_ESTIMATE | FFTW_UNALIGNED);
  inverse_plan_ = fftw_plan_dft_c2r_3d(n, n, n, c, real.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
}

RealFft3d::~RealFft3d() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (forward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (inverse_plan_) fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void RealFft3d::forward(double* in, std::complex<double>* out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), in,
                       reinterpret_cast<fftw_complex*>(out));
}

void RealFft3d::inverse(std::complex<double>* in, double* out) const {
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), reinterpret_cast<fftw_complex*>(in),
                       out);
}

}  // namespace bbfmm::detail
